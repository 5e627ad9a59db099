//! End-to-end orchestration: files -> model -> HARA -> FSRs -> conformance
//! -> report, runnable stage by stage.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError};
use crate::conformance::{assess, detect_conflicts};
use crate::dsl::{parse_model, Diagnostic, SourceFile};
use crate::fta::{derive_fsrs, FsrError};
use crate::hara::{run_hara, HaraError};
use crate::model::Model;
use crate::report::{
    build_report, AssessmentReport, InputDigest, Meta, ReportParts, Stage, SCHEMA_VERSION,
};

/// Environment variable overriding the default catalog path; an explicit
/// catalog argument wins over it.
pub const CATALOG_ENV_VAR: &str = "COOP_SAFETY_CATALOG";

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    /// Model files, or directories expanded to their `*.sdl` files.
    pub model_paths: Vec<PathBuf>,
    pub catalog_path: Option<PathBuf>,
    pub timestamps: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("model has errors")]
    Parse(Vec<Diagnostic>),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Hara(#[from] HaraError),
    #[error(transparent)]
    Fsr(#[from] FsrError),
}

impl PipelineError {
    /// Parse diagnostics carried by this error, if any.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            PipelineError::Parse(diags) => diags,
            PipelineError::Catalog(err) => err.diagnostics(),
            _ => &[],
        }
    }
}

/// A successful pipeline run: the report plus non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: AssessmentReport,
    pub warnings: Vec<Diagnostic>,
}

/// Where the catalog came from, for the report meta section.
#[derive(Debug, Clone)]
pub enum CatalogSource {
    Bundled,
    Path(PathBuf),
}

impl CatalogSource {
    /// Flag wins over the `COOP_SAFETY_CATALOG` environment variable, which
    /// wins over the bundled default.
    pub fn resolve(flag: Option<&Path>) -> CatalogSource {
        if let Some(path) = flag {
            return CatalogSource::Path(path.to_path_buf());
        }
        match std::env::var_os(CATALOG_ENV_VAR) {
            Some(path) if !path.is_empty() => CatalogSource::Path(PathBuf::from(path)),
            _ => CatalogSource::Bundled,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CatalogSource::Bundled => "bundled".to_string(),
            CatalogSource::Path(path) => path.display().to_string(),
        }
    }

    pub fn load(&self) -> Result<Catalog, CatalogError> {
        match self {
            CatalogSource::Bundled => Ok(Catalog::bundled()),
            CatalogSource::Path(path) => {
                let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Catalog::load(&SourceFile::new(path.display().to_string(), text))
            }
        }
    }
}

/// Expands directories to their `*.sdl` files, sorted by name.
pub fn expand_model_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, PipelineError> {
    let mut expanded = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|source| PipelineError::Io {
                    path: path.display().to_string(),
                    source,
                })?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "sdl"))
                .collect();
            files.sort();
            expanded.extend(files);
        } else {
            expanded.push(path.clone());
        }
    }
    Ok(expanded)
}

fn read_sources(paths: &[PathBuf]) -> Result<(Vec<SourceFile>, Vec<InputDigest>), PipelineError> {
    let mut sources = Vec::new();
    let mut digests = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let digest = Sha256::digest(text.as_bytes());
        let sha256: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        digests.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        sources.push(SourceFile::new(path.display().to_string(), text));
    }
    Ok((sources, digests))
}

fn timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "1970-01-01T00:00:00Z".to_string())
}

/// Loads and validates the model without running any analysis. Returns the
/// model, non-fatal diagnostics, and the loaded catalog.
pub fn load_model(
    config: &PipelineConfig,
) -> Result<(Model, Vec<Diagnostic>, Catalog, Vec<InputDigest>, CatalogSource), PipelineError> {
    let catalog_source = CatalogSource::resolve(config.catalog_path.as_deref());
    let catalog = catalog_source.load()?;
    let paths = expand_model_paths(&config.model_paths)?;
    let (sources, digests) = read_sources(&paths)?;
    let (model, diagnostics) = parse_model(&sources, &catalog);
    match model {
        Some(model) => Ok((model, diagnostics, catalog, digests, catalog_source)),
        None => Err(PipelineError::Parse(diagnostics)),
    }
}

/// Runs the pipeline up to `stage` and builds the report for that stage.
pub fn run(config: &PipelineConfig, stage: Stage) -> Result<PipelineOutput, PipelineError> {
    let (model, warnings, catalog, digests, catalog_source) = load_model(config)?;

    let meta = Meta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION.to_string(),
        stage,
        inputs: digests,
        catalog: catalog_source.describe(),
        generated_at: config.timestamps.then(timestamp),
    };

    let hara = run_hara(&model)?;

    let derived = if stage >= Stage::Fsrs {
        Some(derive_fsrs(&hara.goals, &model.trees, &model.annotations)?)
    } else {
        None
    };

    let conflicts = if stage >= Stage::Conflicts {
        derived
            .as_ref()
            .map(|d| detect_conflicts(&d.fsrs, &catalog.exclusivity))
    } else {
        None
    };

    let verdicts = if stage >= Stage::Assess {
        derived
            .as_ref()
            .map(|d| assess(&d.fsrs, &model.tech_components, &catalog))
    } else {
        None
    };

    let report = build_report(ReportParts {
        model: &model,
        hara: &hara,
        fsrs: derived.as_ref(),
        conflicts: conflicts.as_ref(),
        verdicts: verdicts.as_deref(),
        meta,
    });

    Ok(PipelineOutput { report, warnings })
}

/// Convenience wrapper running the complete pipeline.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    run(config, Stage::Report)
}

/// In-memory variant used by tests and bindings: no file IO, bundled or given
/// catalog, full pipeline.
pub fn run_in_memory(
    model: &Model,
    catalog: &Catalog,
    stage: Stage,
) -> Result<AssessmentReport, PipelineError> {
    let meta = Meta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION.to_string(),
        stage,
        inputs: Vec::new(),
        catalog: "in-memory".to_string(),
        generated_at: None,
    };
    let hara = run_hara(model)?;
    let derived = if stage >= Stage::Fsrs {
        Some(derive_fsrs(&hara.goals, &model.trees, &model.annotations)?)
    } else {
        None
    };
    let conflicts = if stage >= Stage::Conflicts {
        derived
            .as_ref()
            .map(|d| detect_conflicts(&d.fsrs, &catalog.exclusivity))
    } else {
        None
    };
    let verdicts = if stage >= Stage::Assess {
        derived
            .as_ref()
            .map(|d| assess(&d.fsrs, &model.tech_components, catalog))
    } else {
        None
    };
    Ok(build_report(ReportParts {
        model,
        hara: &hara,
        fsrs: derived.as_ref(),
        conflicts: conflicts.as_ref(),
        verdicts: verdicts.as_deref(),
        meta,
    }))
}
