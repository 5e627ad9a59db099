//! Structural parse: tokens to a tree of keyed entries.
//!
//! This layer knows nothing about entity kinds; it only enforces the shared
//! shape `key "name"? { entries }` / `key values ;`. The trailing semicolon
//! of the last entry in a block may be omitted.

use super::lexer::{normalize, tokenize, Token, TokenKind};
use super::{Diagnostic, DiagnosticCode, SourceFile, SourceSpan};

#[derive(Debug, Clone)]
pub struct RawValue {
    pub text: String,
    pub quoted: bool,
    pub span: SourceSpan,
}

/// One entry: a top-level block/line or a nested one.
#[derive(Debug, Clone)]
pub struct RawEntry {
    pub key: String,
    pub key_span: SourceSpan,
    /// The optional quoted name preceding a block body.
    pub name: Option<RawValue>,
    pub values: Vec<RawValue>,
    /// `Some` for block form, `None` for line form.
    pub body: Option<Vec<RawEntry>>,
}

impl RawEntry {
    pub fn span_of_value(&self, index: usize) -> SourceSpan {
        self.values
            .get(index)
            .map(|v| v.span.clone())
            .unwrap_or_else(|| self.key_span.clone())
    }
}

pub fn parse_raw(file: &SourceFile, diagnostics: &mut Vec<Diagnostic>) -> Vec<RawEntry> {
    let text = normalize(&file.text);
    let tokens = tokenize(&file.name, &text, diagnostics);
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        diagnostics,
    };
    parser.parse_entries(true)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    diagnostics: &'a mut Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let token = self.tokens.get(self.pos);
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn error(&mut self, message: String, span: SourceSpan) {
        self.diagnostics
            .push(Diagnostic::error(DiagnosticCode::Syntax, message, span));
    }

    /// Skips to a recovery point after a malformed entry.
    fn recover(&mut self) {
        let mut depth = 0usize;
        while let Some(token) = self.peek() {
            match token.kind {
                TokenKind::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                TokenKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn parse_entries(&mut self, top_level: bool) -> Vec<RawEntry> {
        let mut entries = Vec::new();
        loop {
            match self.peek() {
                None => {
                    if !top_level {
                        let span = self
                            .tokens
                            .last()
                            .map(|t| t.span.clone())
                            .unwrap_or_else(SourceSpan::synthetic);
                        self.error("unexpected end of file inside block".into(), span);
                    }
                    return entries;
                }
                Some(token) if token.kind == TokenKind::RBrace => {
                    if top_level {
                        self.error("unmatched `}`".into(), token.span.clone());
                        self.bump();
                        continue;
                    }
                    return entries;
                }
                Some(token) if token.kind == TokenKind::Ident => {
                    if let Some(entry) = self.parse_entry() {
                        entries.push(entry);
                    }
                }
                Some(token) => {
                    self.error(
                        format!("expected a keyword, found `{}`", token.text),
                        token.span.clone(),
                    );
                    self.bump();
                }
            }
        }
    }

    fn parse_entry(&mut self) -> Option<RawEntry> {
        let key_token = self.bump()?;
        let mut entry = RawEntry {
            key: key_token.text.clone(),
            key_span: key_token.span.clone(),
            name: None,
            values: Vec::new(),
            body: None,
        };

        loop {
            match self.peek() {
                Some(token) if matches!(token.kind, TokenKind::Ident | TokenKind::Str) => {
                    entry.values.push(RawValue {
                        text: token.text.clone(),
                        quoted: token.kind == TokenKind::Str,
                        span: token.span.clone(),
                    });
                    self.bump();
                }
                Some(token) if token.kind == TokenKind::Semi => {
                    self.bump();
                    return Some(entry);
                }
                Some(token) if token.kind == TokenKind::LBrace => {
                    // values before `{` must be exactly the optional name string
                    match entry.values.len() {
                        0 => {}
                        1 if entry.values[0].quoted => {
                            entry.name = Some(entry.values.remove(0));
                        }
                        _ => {
                            self.error(
                                format!(
                                    "`{}` block accepts at most one quoted name before `{{`",
                                    entry.key
                                ),
                                token.span.clone(),
                            );
                            self.recover();
                            return None;
                        }
                    }
                    self.bump();
                    entry.body = Some(self.parse_entries(false));
                    match self.peek() {
                        Some(token) if token.kind == TokenKind::RBrace => {
                            self.bump();
                        }
                        _ => {
                            // missing `}` was already reported by parse_entries
                        }
                    }
                    // tolerate a semicolon after a closing brace
                    if let Some(token) = self.peek() {
                        if token.kind == TokenKind::Semi {
                            self.bump();
                        }
                    }
                    return Some(entry);
                }
                // end of block or file closes the final entry without `;`
                Some(_) | None => return Some(entry),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (Vec<RawEntry>, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let file = SourceFile::new("test.sdl", text);
        let entries = parse_raw(&file, &mut diags);
        (entries, diags)
    }

    #[test]
    fn parses_named_block_with_entries() {
        let (entries, diags) = parse("function \"x\" { perspective vehicular; scenario base; }");
        assert!(diags.is_empty());
        assert_eq!(entries.len(), 1);
        let block = &entries[0];
        assert_eq!(block.key, "function");
        assert_eq!(block.name.as_ref().unwrap().text, "x");
        assert_eq!(block.body.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn final_semicolon_is_optional() {
        let (entries, diags) = parse("function \"x\" { perspective vehicular }");
        assert!(diags.is_empty());
        let body = entries[0].body.as_ref().unwrap();
        assert_eq!(body.len(), 1);
        assert_eq!(body[0].values[0].text, "vehicular");
    }

    #[test]
    fn parses_line_form() {
        let (entries, diags) = parse("feasible h m s;\nflow a b;");
        assert!(diags.is_empty());
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].values.len(), 3);
        assert!(entries[0].body.is_none());
    }

    #[test]
    fn parses_nested_gates() {
        let (entries, diags) =
            parse("tree \"t\" { goal g; or { basic a f; and { basic b f; basic c f; } } }");
        assert!(diags.is_empty());
        let body = entries[0].body.as_ref().unwrap();
        let or = body.iter().find(|e| e.key == "or").unwrap();
        let or_body = or.body.as_ref().unwrap();
        assert_eq!(or_body.len(), 2);
        assert_eq!(or_body[1].key, "and");
    }

    #[test]
    fn recovers_after_malformed_entry() {
        let (entries, diags) = parse("mode \"m\" \"extra\" { }\nflow a b;");
        assert!(diags.iter().any(|d| d.code == DiagnosticCode::Syntax));
        assert!(entries.iter().any(|e| e.key == "flow"));
    }

    #[test]
    fn unmatched_close_brace() {
        let (_, diags) = parse("}\n");
        assert!(diags.iter().any(|d| d.message.contains("unmatched")));
    }

    #[test]
    fn eof_inside_block() {
        let (_, diags) = parse("item \"v\" { kind vehicle_type;");
        assert!(diags
            .iter()
            .any(|d| d.message.contains("unexpected end of file")));
    }
}
