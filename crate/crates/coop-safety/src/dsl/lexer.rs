//! Tokenizer for the block/line syntax.

use super::{Diagnostic, DiagnosticCode, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Str,
    LBrace,
    RBrace,
    Semi,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    /// Identifier text or decoded string contents.
    pub text: String,
    pub span: SourceSpan,
}

/// Splits normalized text into tokens. Malformed input produces `SYNTAX`
/// diagnostics; tokenization continues past them.
pub fn tokenize(file: &str, text: &str, diagnostics: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut column: u32 = 1;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let start_line = line;
        let start_column = column;
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '{' | '}' | ';' => {
                chars.next();
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    _ => TokenKind::Semi,
                };
                tokens.push(Token {
                    kind,
                    text: c.to_string(),
                    span: SourceSpan::new(file, start_line, start_column, 1),
                });
                column += 1;
            }
            '"' => {
                chars.next();
                column += 1;
                let mut value = String::new();
                let mut length: u32 = 1;
                let mut terminated = false;
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                    length += 1;
                    match c {
                        '"' => {
                            terminated = true;
                            break;
                        }
                        '\\' => match chars.peek() {
                            Some(&escaped @ ('"' | '\\')) => {
                                chars.next();
                                column += 1;
                                length += 1;
                                value.push(escaped);
                            }
                            _ => value.push('\\'),
                        },
                        other => value.push(other),
                    }
                }
                let span = SourceSpan::new(file, start_line, start_column, length);
                if !terminated {
                    diagnostics.push(Diagnostic::error(
                        DiagnosticCode::Syntax,
                        "unterminated string literal",
                        span.clone(),
                    ));
                }
                tokens.push(Token {
                    kind: TokenKind::Str,
                    text: value,
                    span,
                });
            }
            c if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                        word.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                let span = SourceSpan::new(file, start_line, start_column, word.len() as u32);
                if !word.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
                    diagnostics.push(Diagnostic::error(
                        DiagnosticCode::Syntax,
                        format!("identifier `{word}` must start with a lowercase letter"),
                        span.clone(),
                    ));
                }
                tokens.push(Token {
                    kind: TokenKind::Ident,
                    text: word,
                    span,
                });
            }
            other => {
                chars.next();
                diagnostics.push(Diagnostic::error(
                    DiagnosticCode::Syntax,
                    format!("unexpected character `{other}`"),
                    SourceSpan::new(file, start_line, start_column, 1),
                ));
                column += 1;
            }
        }
    }
    tokens
}

/// Normalizes CRLF line endings to LF before spans are computed.
pub fn normalize(text: &str) -> String {
    text.replace("\r\n", "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let tokens = tokenize("test.sdl", &normalize(text), &mut diags);
        (tokens, diags)
    }

    #[test]
    fn tokenizes_block_line() {
        let (tokens, diags) = lex("component \"x\" { item v; }\n");
        assert!(diags.is_empty());
        let kinds: Vec<TokenKind> = tokens.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident,
                TokenKind::Str,
                TokenKind::LBrace,
                TokenKind::Ident,
                TokenKind::Ident,
                TokenKind::Semi,
                TokenKind::RBrace,
            ]
        );
        assert_eq!(tokens[1].text, "x");
    }

    #[test]
    fn spans_are_one_based_and_crlf_normalized() {
        let (tokens, _) = lex("a;\r\nbb ccc;\r\n");
        assert_eq!(tokens[0].span.line, 1);
        assert_eq!(tokens[0].span.column, 1);
        let bb = &tokens[2];
        assert_eq!((bb.span.line, bb.span.column, bb.span.length), (2, 1, 2));
        let ccc = &tokens[3];
        assert_eq!((ccc.span.line, ccc.span.column, ccc.span.length), (2, 4, 3));
    }

    #[test]
    fn comments_are_skipped() {
        let (tokens, diags) = lex("# a comment\nfoo; # trailing\n");
        assert!(diags.is_empty());
        assert_eq!(tokens.len(), 2);
        assert_eq!(tokens[0].text, "foo");
        assert_eq!(tokens[0].span.line, 2);
    }

    #[test]
    fn string_escapes() {
        let (tokens, diags) = lex(r#"x "say \"hi\" \\ done";"#);
        assert!(diags.is_empty());
        assert_eq!(tokens[1].text, "say \"hi\" \\ done");
    }

    #[test]
    fn unterminated_string_is_reported() {
        let (_, diags) = lex("x \"oops\n");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagnosticCode::Syntax);
    }

    #[test]
    fn unexpected_character_is_reported() {
        let (_, diags) = lex("x = y;");
        assert!(diags
            .iter()
            .any(|d| d.code == DiagnosticCode::Syntax && d.message.contains('=')));
    }
}
