//! Safety-tactic and safety-pattern knowledge base, controlled tag
//! vocabularies, response-class exclusivity rules, and ASIL determination.
//!
//! The bundled default catalog defines the 13 tactics and the 15 patterns
//! built on them, together with the capability tags each tactic provides.
//! Catalogs are data: experts edit the catalog file, not the code.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dsl::{
    parse_raw, Diagnostic, DiagnosticCode, RawEntry, SourceFile, SourceSpan,
};
use crate::model::{AsilRating, Controllability, Exposure, Ident, Severity};

/// Source of the bundled default catalog.
pub const DEFAULT_CATALOG_TEXT: &str = include_str!("../data/default_catalog.sdl");

/// An abstract architectural design decision addressing safety.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyTactic {
    pub id: Ident,
    pub name: String,
    pub aim: String,
    pub description: String,
    pub provides: BTreeSet<Ident>,
    pub span: SourceSpan,
}

/// A prescribed architectural structure realizing one or more tactics.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyPattern {
    pub id: Ident,
    pub name: String,
    pub tactics: BTreeSet<Ident>,
    pub span: SourceSpan,
}

/// Unordered pairs of response classes that cannot both be implemented for
/// the same trigger.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResponseExclusivity {
    pairs: BTreeSet<(Ident, Ident)>,
}

impl ResponseExclusivity {
    pub fn insert(&mut self, a: Ident, b: Ident) {
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.pairs.insert(pair);
    }

    pub fn is_exclusive(&self, a: &Ident, b: &Ident) -> bool {
        let pair = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.pairs.contains(&pair)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Ident, Ident)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The loaded knowledge base. Immutable after load.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalog {
    pub tactics: BTreeMap<Ident, SafetyTactic>,
    pub patterns: BTreeMap<Ident, SafetyPattern>,
    pub exclusivity: ResponseExclusivity,
    /// Controlled trigger vocabulary; empty means unchecked.
    pub triggers: BTreeSet<Ident>,
    /// Controlled response-class vocabulary; empty means unchecked.
    pub responses: BTreeSet<Ident>,
}

impl Catalog {
    /// Loads and validates a catalog file.
    pub fn load(source: &SourceFile) -> Result<Catalog, CatalogError> {
        let mut diagnostics = Vec::new();
        let entries = parse_raw(source, &mut diagnostics);
        let catalog = lower_catalog(&entries, &mut diagnostics);
        if diagnostics.iter().any(Diagnostic::is_error) {
            return Err(CatalogError::Invalid(diagnostics));
        }
        Ok(catalog)
    }

    /// The default catalog shipped with the tool.
    pub fn bundled() -> Catalog {
        let source = SourceFile::new("<bundled catalog>", DEFAULT_CATALOG_TEXT);
        Catalog::load(&source).expect("bundled catalog must be valid")
    }

    /// Union of capability tags provided by the given tactics.
    pub fn provides_of<'a, I: IntoIterator<Item = &'a Ident>>(&self, tactics: I) -> BTreeSet<Ident> {
        tactics
            .into_iter()
            .filter_map(|id| self.tactics.get(id))
            .flat_map(|t| t.provides.iter().cloned())
            .collect()
    }

    /// Every capability tag any tactic provides.
    pub fn capability_vocabulary(&self) -> BTreeSet<Ident> {
        self.tactics
            .values()
            .flat_map(|t| t.provides.iter().cloned())
            .collect()
    }

    pub fn trigger_is_known(&self, tag: &Ident) -> bool {
        self.triggers.is_empty() || self.triggers.contains(tag)
    }

    pub fn response_is_known(&self, tag: &Ident) -> bool {
        self.responses.is_empty() || self.responses.contains(tag)
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog is invalid:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CatalogError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            CatalogError::Invalid(diags) => diags,
            CatalogError::Io { .. } => &[],
        }
    }
}

fn format_diagnostics(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn lower_catalog(entries: &[RawEntry], diagnostics: &mut Vec<Diagnostic>) -> Catalog {
    let mut catalog = Catalog::default();

    for entry in entries {
        match entry.key.as_str() {
            "tactic" => lower_tactic(entry, &mut catalog, diagnostics),
            "pattern" => lower_pattern(entry, &mut catalog, diagnostics),
            "exclusive" => lower_exclusive(entry, &mut catalog, diagnostics),
            other => diagnostics.push(Diagnostic::error(
                DiagnosticCode::WrongSection,
                format!("`{other}` is not a catalog block; catalog files define `tactic`, `pattern`, and `exclusive` only"),
                entry.key_span.clone(),
            )),
        }
    }

    if catalog.tactics.is_empty() {
        diagnostics.push(Diagnostic {
            severity: crate::dsl::DiagnosticSeverity::Error,
            code: DiagnosticCode::MissingField,
            message: "catalog must define at least one tactic".into(),
            span: None,
            entity: None,
        });
    }

    // patterns must reference declared tactics
    for pattern in catalog.patterns.values() {
        for tactic in &pattern.tactics {
            if !catalog.tactics.contains_key(tactic) {
                diagnostics.push(
                    Diagnostic::error(
                        DiagnosticCode::UnknownTactic,
                        format!("pattern `{}` references unknown tactic `{tactic}`", pattern.id),
                        pattern.span.clone(),
                    )
                    .with_entity(pattern.id.clone()),
                );
            }
        }
    }

    // exclusivity pairs must use declared responses when a vocabulary exists
    if !catalog.responses.is_empty() {
        for (a, b) in catalog.exclusivity.pairs() {
            for tag in [a, b] {
                if !catalog.responses.contains(tag) {
                    diagnostics.push(Diagnostic {
                        severity: crate::dsl::DiagnosticSeverity::Error,
                        code: DiagnosticCode::UnknownResponse,
                        message: format!("exclusivity pair uses undeclared response `{tag}`"),
                        span: None,
                        entity: None,
                    });
                }
            }
        }
    }

    catalog
}

fn block_name(entry: &RawEntry, diagnostics: &mut Vec<Diagnostic>) -> Option<Ident> {
    match &entry.name {
        Some(value) if Ident::is_valid(&value.text) => Some(Ident::new(value.text.clone())),
        Some(value) => {
            diagnostics.push(Diagnostic::error(
                DiagnosticCode::BadValue,
                format!("`{}` is not a valid identifier", value.text),
                value.span.clone(),
            ));
            None
        }
        None => {
            diagnostics.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("`{}` block requires a quoted identifier name", entry.key),
                entry.key_span.clone(),
            ));
            None
        }
    }
}

fn single_string(
    entry: &RawEntry,
    key: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Option<String> {
    if entry.values.len() == 1 {
        Some(entry.values[0].text.clone())
    } else {
        diagnostics.push(Diagnostic::error(
            DiagnosticCode::BadValue,
            format!("`{key}` expects exactly one value"),
            entry.key_span.clone(),
        ));
        None
    }
}

fn lower_tactic(entry: &RawEntry, catalog: &mut Catalog, diagnostics: &mut Vec<Diagnostic>) {
    let Some(id) = block_name(entry, diagnostics) else {
        return;
    };
    let mut name = None;
    let mut aim = None;
    let mut description = None;
    let mut provides = BTreeSet::new();

    for item in entry.body.as_deref().unwrap_or_default() {
        match item.key.as_str() {
            "name" => name = single_string(item, "name", diagnostics),
            "aim" => aim = single_string(item, "aim", diagnostics),
            "description" => description = single_string(item, "description", diagnostics),
            "provides" => {
                for value in &item.values {
                    provides.insert(Ident::new(value.text.clone()));
                }
            }
            other => diagnostics.push(Diagnostic::error(
                DiagnosticCode::UnknownKey,
                format!("unknown key `{other}` in tactic block"),
                item.key_span.clone(),
            )),
        }
    }

    if provides.is_empty() {
        diagnostics.push(
            Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("tactic `{id}` must provide at least one capability tag"),
                entry.key_span.clone(),
            )
            .with_entity(id.clone()),
        );
    }

    let name = name.unwrap_or_else(|| id.as_str().replace('_', " "));
    if catalog
        .tactics
        .values()
        .any(|t| t.name.eq_ignore_ascii_case(&name))
    {
        diagnostics.push(Diagnostic::error(
            DiagnosticCode::DupId,
            format!("tactic name `{name}` is already defined"),
            entry.key_span.clone(),
        ));
        return;
    }
    if catalog.tactics.contains_key(&id) {
        diagnostics.push(Diagnostic::error(
            DiagnosticCode::DupId,
            format!("duplicate tactic `{id}`"),
            entry.key_span.clone(),
        ));
        return;
    }

    catalog.tactics.insert(
        id.clone(),
        SafetyTactic {
            id,
            name,
            aim: aim.unwrap_or_default(),
            description: description.unwrap_or_default(),
            provides,
            span: entry.key_span.clone(),
        },
    );
}

fn lower_pattern(entry: &RawEntry, catalog: &mut Catalog, diagnostics: &mut Vec<Diagnostic>) {
    let Some(id) = block_name(entry, diagnostics) else {
        return;
    };
    let mut name = None;
    let mut tactics = BTreeSet::new();

    for item in entry.body.as_deref().unwrap_or_default() {
        match item.key.as_str() {
            "name" => name = single_string(item, "name", diagnostics),
            "tactics" => {
                for value in &item.values {
                    tactics.insert(Ident::new(value.text.clone()));
                }
            }
            other => diagnostics.push(Diagnostic::error(
                DiagnosticCode::UnknownKey,
                format!("unknown key `{other}` in pattern block"),
                item.key_span.clone(),
            )),
        }
    }

    if tactics.is_empty() {
        diagnostics.push(
            Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("pattern `{id}` must reference at least one tactic"),
                entry.key_span.clone(),
            )
            .with_entity(id.clone()),
        );
    }
    if catalog.patterns.contains_key(&id) {
        diagnostics.push(Diagnostic::error(
            DiagnosticCode::DupId,
            format!("duplicate pattern `{id}`"),
            entry.key_span.clone(),
        ));
        return;
    }

    catalog.patterns.insert(
        id.clone(),
        SafetyPattern {
            id: id.clone(),
            name: name.unwrap_or_else(|| id.as_str().replace('_', " ")),
            tactics,
            span: entry.key_span.clone(),
        },
    );
}

fn lower_exclusive(entry: &RawEntry, catalog: &mut Catalog, diagnostics: &mut Vec<Diagnostic>) {
    for item in entry.body.as_deref().unwrap_or_default() {
        match item.key.as_str() {
            "triggers" => {
                for value in &item.values {
                    catalog.triggers.insert(Ident::new(value.text.clone()));
                }
            }
            "responses" => {
                for value in &item.values {
                    catalog.responses.insert(Ident::new(value.text.clone()));
                }
            }
            "pair" => {
                if item.values.len() == 2 {
                    catalog.exclusivity.insert(
                        Ident::new(item.values[0].text.clone()),
                        Ident::new(item.values[1].text.clone()),
                    );
                } else {
                    diagnostics.push(Diagnostic::error(
                        DiagnosticCode::BadValue,
                        "`pair` expects exactly two response classes",
                        item.key_span.clone(),
                    ));
                }
            }
            other => diagnostics.push(Diagnostic::error(
                DiagnosticCode::UnknownKey,
                format!("unknown key `{other}` in exclusive block"),
                item.key_span.clone(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// ASIL determination
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{kind} index {value} is out of range (max {max})")]
pub struct AsilDomainError {
    pub kind: &'static str,
    pub value: u8,
    pub max: u8,
}

/// The (severity, exposure, controllability) -> ASIL risk table.
///
/// Encoded additively: QM whenever any index is 0, otherwise the index sum k
/// maps k<=6 -> QM, 7 -> A, 8 -> B, 9 -> C, 10 -> D.
#[derive(Debug, Clone, Copy, Default)]
pub struct AsilTable;

impl AsilTable {
    pub fn rate(s: Severity, e: Exposure, c: Controllability) -> AsilRating {
        if s.value() == 0 || e.value() == 0 || c.value() == 0 {
            return AsilRating::Qm;
        }
        match s.value() as u16 + e.value() as u16 + c.value() as u16 {
            0..=6 => AsilRating::Qm,
            7 => AsilRating::A,
            8 => AsilRating::B,
            9 => AsilRating::C,
            _ => AsilRating::D,
        }
    }
}

/// Rates raw indices, rejecting out-of-range values.
pub fn determine_asil(s: u8, e: u8, c: u8) -> Result<AsilRating, AsilDomainError> {
    let severity = Severity::new(s).ok_or(AsilDomainError {
        kind: "severity",
        value: s,
        max: Severity::MAX,
    })?;
    let exposure = Exposure::new(e).ok_or(AsilDomainError {
        kind: "exposure",
        value: e,
        max: Exposure::MAX,
    })?;
    let controllability = Controllability::new(c).ok_or(AsilDomainError {
        kind: "controllability",
        value: c,
        max: Controllability::MAX,
    })?;
    Ok(AsilTable::rate(severity, exposure, controllability))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_defines_13_tactics_and_15_patterns() {
        let catalog = Catalog::bundled();
        assert_eq!(catalog.tactics.len(), 13);
        assert_eq!(catalog.patterns.len(), 15);
        // every tactic is used by at least one pattern
        for tactic in catalog.tactics.keys() {
            assert!(
                catalog.patterns.values().any(|p| p.tactics.contains(tactic)),
                "tactic {tactic} is not used by any pattern"
            );
        }
        // seeded capability tags
        let heartbeat = &catalog.tactics[&Ident::from("heartbeat")];
        assert!(heartbeat.provides.contains(&Ident::from("liveness_monitoring")));
        let barrier = &catalog.tactics[&Ident::from("barrier")];
        assert!(barrier.provides.contains(&Ident::from("failure_containment")));
        assert!(barrier.provides.contains(&Ident::from("interference_isolation")));
    }

    #[test]
    fn pattern_with_unknown_tactic_is_rejected() {
        let source = SourceFile::new(
            "bad.sdl",
            "tactic \"t\" { provides x; }\npattern \"p\" { tactics fooing; }\n",
        );
        let err = Catalog::load(&source).unwrap_err();
        assert!(err
            .diagnostics()
            .iter()
            .any(|d| d.code == DiagnosticCode::UnknownTactic));
    }

    #[test]
    fn empty_tactic_list_is_rejected() {
        let source = SourceFile::new("empty.sdl", "exclusive { pair a b; }\n");
        let err = Catalog::load(&source).unwrap_err();
        assert!(err
            .diagnostics()
            .iter()
            .any(|d| d.message.contains("at least one tactic")));
    }

    #[test]
    fn determine_asil_matches_decision_table() {
        assert_eq!(determine_asil(0, 4, 3), Ok(AsilRating::Qm));
        assert_eq!(determine_asil(3, 4, 3), Ok(AsilRating::D));
        assert_eq!(determine_asil(2, 2, 2), Ok(AsilRating::Qm));
        assert_eq!(determine_asil(2, 3, 2), Ok(AsilRating::A));
        assert_eq!(determine_asil(3, 4, 0), Ok(AsilRating::Qm));
        assert!(determine_asil(4, 0, 0).is_err());
        assert!(determine_asil(3, 5, 3).is_err());
    }

    #[test]
    fn determine_asil_is_monotone() {
        let rate = |s, e, c| determine_asil(s, e, c).unwrap();
        for s in 0..=3u8 {
            for e in 0..=4u8 {
                for c in 0..=3u8 {
                    if s < 3 {
                        assert!(rate(s, e, c) <= rate(s + 1, e, c));
                    }
                    if e < 4 {
                        assert!(rate(s, e, c) <= rate(s, e + 1, c));
                    }
                    if c < 3 {
                        assert!(rate(s, e, c) <= rate(s, e, c + 1));
                    }
                }
            }
        }
    }

    #[test]
    fn exclusivity_is_symmetric() {
        let mut rules = ResponseExclusivity::default();
        rules.insert(Ident::from("emit_fault_message"), Ident::from("suppress_all_messages"));
        assert!(rules.is_exclusive(
            &Ident::from("suppress_all_messages"),
            &Ident::from("emit_fault_message")
        ));
        assert!(!rules.is_exclusive(&Ident::from("safe_stop"), &Ident::from("emit_fault_message")));
    }
}
