//! Parser front-end for the model and catalog files.
//!
//! One block/line syntax serves every input kind:
//!
//! ```text
//! kind "name" { key value ...; nested { ... } }   # block form
//! kind value value ...;                            # line form
//! ```
//!
//! Identifiers are `[a-z][a-z0-9_]*`, prose lives in double-quoted strings,
//! and `#` starts a line comment. CRLF is normalized to LF before spans are
//! computed. The parser builds and validates structure only; it never
//! computes ASILs, cut sets, or fulfillment.

mod lexer;
mod lower;
mod raw;

pub use lower::{parse_model, validate_model};
pub(crate) use raw::{parse_raw, RawEntry, RawValue};

use std::fmt;

use serde::Serialize;

use crate::model::Ident;

/// A location inside one input file. Line and column are 1-based and counted
/// in characters after CRLF normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            file: file.into(),
            line,
            column,
            length,
        }
    }

    /// Span for entities constructed outside any source file.
    pub fn synthetic() -> Self {
        SourceSpan::new("<synthetic>", 1, 1, 0)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// One input file: a display name plus its full text.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub name: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        SourceFile {
            name: name.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticSeverity {
    Error,
    Warning,
}

/// Stable diagnostic codes. Every `Error` prevents pipeline execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    Syntax,
    UnknownKind,
    UnknownKey,
    WrongSection,
    MissingField,
    BadValue,
    BadSec,
    EmptyText,
    EmptyGate,
    DupId,
    DupEntry,
    DupGuideWord,
    UnknownRef,
    UnknownComponent,
    UnknownFunction,
    UnknownHazard,
    UnknownMode,
    UnknownSituation,
    UnknownGoal,
    UnknownTactic,
    UnknownTechComponent,
    UnknownTrigger,
    UnknownResponse,
    Cycle,
    MissingRating,
    ConflictingDefault,
    RedundantFeasibility,
    ItemRule,
    CoopUnmapped,
    FlowCrossItem,
    PerspectiveMismatch,
    UnsatisfiableAtom,
    OverlappingFsr,
}

impl DiagnosticCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "SYNTAX",
            DiagnosticCode::UnknownKind => "UNKNOWN_KIND",
            DiagnosticCode::UnknownKey => "UNKNOWN_KEY",
            DiagnosticCode::WrongSection => "WRONG_SECTION",
            DiagnosticCode::MissingField => "MISSING_FIELD",
            DiagnosticCode::BadValue => "BAD_VALUE",
            DiagnosticCode::BadSec => "BAD_SEC",
            DiagnosticCode::EmptyText => "EMPTY_TEXT",
            DiagnosticCode::EmptyGate => "EMPTY_GATE",
            DiagnosticCode::DupId => "DUP_ID",
            DiagnosticCode::DupEntry => "DUP_ENTRY",
            DiagnosticCode::DupGuideWord => "DUP_GUIDE_WORD",
            DiagnosticCode::UnknownRef => "UNKNOWN_REF",
            DiagnosticCode::UnknownComponent => "UNKNOWN_COMPONENT",
            DiagnosticCode::UnknownFunction => "UNKNOWN_FUNCTION",
            DiagnosticCode::UnknownHazard => "UNKNOWN_HAZARD",
            DiagnosticCode::UnknownMode => "UNKNOWN_MODE",
            DiagnosticCode::UnknownSituation => "UNKNOWN_SITUATION",
            DiagnosticCode::UnknownGoal => "UNKNOWN_GOAL",
            DiagnosticCode::UnknownTactic => "UNKNOWN_TACTIC",
            DiagnosticCode::UnknownTechComponent => "UNKNOWN_TECH_COMPONENT",
            DiagnosticCode::UnknownTrigger => "UNKNOWN_TRIGGER",
            DiagnosticCode::UnknownResponse => "UNKNOWN_RESPONSE",
            DiagnosticCode::Cycle => "CYCLE",
            DiagnosticCode::MissingRating => "MISSING_RATING",
            DiagnosticCode::ConflictingDefault => "CONFLICTING_DEFAULT",
            DiagnosticCode::RedundantFeasibility => "REDUNDANT_FEASIBILITY",
            DiagnosticCode::ItemRule => "ITEM_RULE",
            DiagnosticCode::CoopUnmapped => "COOP_UNMAPPED",
            DiagnosticCode::FlowCrossItem => "FLOW_CROSS_ITEM",
            DiagnosticCode::PerspectiveMismatch => "PERSPECTIVE_MISMATCH",
            DiagnosticCode::UnsatisfiableAtom => "UNSATISFIABLE_ATOM",
            DiagnosticCode::OverlappingFsr => "OVERLAPPING_FSR",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parse- or validation-level finding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: DiagnosticSeverity,
    pub code: DiagnosticCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entity: Option<Ident>,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: DiagnosticSeverity::Error,
            code,
            message: message.into(),
            span: Some(span),
            entity: None,
        }
    }

    pub fn warning(code: DiagnosticCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: DiagnosticSeverity::Warning,
            code,
            message: message.into(),
            span: Some(span),
            entity: None,
        }
    }

    pub fn with_entity(mut self, entity: Ident) -> Self {
        self.entity = Some(entity);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == DiagnosticSeverity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            DiagnosticSeverity::Error => "error",
            DiagnosticSeverity::Warning => "warning",
        };
        match &self.span {
            Some(span) => write!(f, "{level}[{}] {span}: {}", self.code, self.message),
            None => write!(f, "{level}[{}] {}", self.code, self.message),
        }
    }
}

/// Whether any diagnostic is an error.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
