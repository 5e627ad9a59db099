//! Functional safety assessment for cooperative driving architectures.
//!
//! The library turns declarative model files into an assessment report in
//! two parts:
//!
//! 1. **Derive FSRs**: scenario functions are expanded into guide-word
//!    hazards, combined with operational modes and situations into rated
//!    hazardous events, merged into ASIL-rated safety goals, and mapped
//!    through fault-tree minimal cut sets onto functional safety
//!    requirements allocated to single architecture components.
//! 2. **Check fulfillment**: FSRs are first screened for conflicts within
//!    their component groups, then each FSR's capability requirement is
//!    evaluated against the safety tactics implemented by the realizing
//!    technical components; unfulfilled FSRs get ranked safety-pattern
//!    recommendations.
//!
//! Entry points: [`pipeline::run_pipeline`] for files on disk,
//! [`pipeline::run_in_memory`] for constructed models, and the per-stage
//! functions in [`hara`], [`fta`], and [`conformance`].

pub mod catalog;
pub mod conformance;
pub mod dsl;
pub mod fta;
pub mod hara;
pub mod model;
pub mod pipeline;
pub mod report;

pub use catalog::{determine_asil, AsilTable, Catalog};
pub use conformance::{applicable_tactics, assess, detect_conflicts};
pub use dsl::{parse_model, validate_model, Diagnostic, SourceFile, SourceSpan};
pub use fta::{derive_fsrs, minimal_cut_sets};
pub use hara::{derive_goals, enumerate_events, generate_hazards, run_hara};
pub use model::{AsilRating, Model, Perspective};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError};
pub use report::{render, render_json, render_markdown, AssessmentReport, Format, Stage};
