//! Report assembly and rendering.
//!
//! The JSON document is the machine interface (schema shipped under
//! `docs/report.schema.json`); Markdown is the human interface. Reports are
//! deterministic: identical inputs produce byte-identical JSON unless
//! timestamps are requested.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::conformance::{AssessmentVerdict, ConflictReport, VerdictStatus};
use crate::fta::DerivedFsrs;
use crate::hara::HaraOutput;
use crate::model::{
    AsilRating, Fsr, Ident, Model, Perspective, RequirementDnf, Scenario,
};

pub const SCHEMA_VERSION: &str = "1";

/// How far the pipeline ran for this document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Hara,
    Goals,
    Fsrs,
    Conflicts,
    Assess,
    Report,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Hara => "hara",
            Stage::Goals => "goals",
            Stage::Fsrs => "fsrs",
            Stage::Conflicts => "conflicts",
            Stage::Assess => "assess",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool_version: String,
    pub schema_version: String,
    pub stage: Stage,
    pub inputs: Vec<InputDigest>,
    pub catalog: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PerPerspective {
    pub vehicular: u64,
    pub cooperative: u64,
    pub total: u64,
}

impl PerPerspective {
    fn add(&mut self, perspective: Perspective, amount: u64) {
        match perspective {
            Perspective::Vehicular => self.vehicular += amount,
            Perspective::Cooperative => self.cooperative += amount,
        }
        self.total += amount;
    }
}

/// ASIL histogram with every rating present for stable output.
pub type AsilHistogram = BTreeMap<String, u64>;

fn empty_histogram() -> AsilHistogram {
    AsilRating::ALL
        .iter()
        .map(|r| (r.as_str().to_string(), 0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCounts {
    pub raw: PerPerspective,
    pub feasible: PerPerspective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalCounts {
    #[serde(flatten)]
    pub totals: PerPerspective,
    pub asil: AsilHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsrCounts {
    #[serde(flatten)]
    pub totals: PerPerspective,
    pub asil: AsilHistogram,
    pub by_component: BTreeMap<Ident, PerPerspective>,
    pub component_groups: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FulfillmentCounts {
    pub fulfilled: PerPerspective,
    pub unfulfilled: PerPerspective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCounts {
    pub grouped: u64,
    pub naive: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub functions: PerPerspective,
    pub hazards: PerPerspective,
    pub draft_hazards: u64,
    pub events: EventCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goals: Option<GoalCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fsrs: Option<FsrCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fulfillment: Option<FulfillmentCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparisons: Option<ComparisonCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceHazard {
    pub id: Ident,
    pub guide_word: String,
    pub draft: bool,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceFunction {
    pub id: Ident,
    pub perspective: Perspective,
    pub scenario: Scenario,
    pub description: String,
    pub hazards: Vec<TraceHazard>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNamed {
    pub id: Ident,
    pub name: String,
    pub perspective: Perspective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub hazard: Ident,
    pub mode: Ident,
    pub situation: Ident,
    pub severity: String,
    pub exposure: String,
    pub controllability: String,
    pub asil: AsilRating,
}

/// Reference into the events section by the identifying triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEventRef {
    pub hazard: Ident,
    pub mode: Ident,
    pub situation: Ident,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceGoal {
    pub id: Ident,
    pub perspective: Perspective,
    pub asil: AsilRating,
    pub draft: bool,
    pub text: String,
    pub events: Vec<TraceEventRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceFsr {
    pub id: Ident,
    pub component: Ident,
    pub failure_mode: Ident,
    pub perspective: Perspective,
    pub asil: AsilRating,
    pub draft: bool,
    pub text: String,
    pub trigger: Ident,
    pub response_class: Ident,
    pub requirement: RequirementDnf,
    pub source_goals: BTreeSet<Ident>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Traceability {
    pub functions: Vec<TraceFunction>,
    pub modes: Vec<TraceNamed>,
    pub situations: Vec<TraceNamed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<TraceEvent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goals: Option<Vec<TraceGoal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fsrs: Option<Vec<TraceFsr>>,
    /// (component, failure mode) pairs derived in both perspectives.
    pub overlapping_fsr_pairs: Vec<(Ident, Ident)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentReport {
    pub meta: Meta,
    pub counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conflicts: Option<ConflictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<AssessmentVerdict>>,
    pub traceability: Traceability,
}

/// Everything the report builder consumes. Later-stage sections are `None`
/// for stage-limited documents.
pub struct ReportParts<'a> {
    pub model: &'a Model,
    pub hara: &'a HaraOutput,
    pub fsrs: Option<&'a DerivedFsrs>,
    pub conflicts: Option<&'a ConflictReport>,
    pub verdicts: Option<&'a [AssessmentVerdict]>,
    pub meta: Meta,
}

pub fn build_report(parts: ReportParts<'_>) -> AssessmentReport {
    let ReportParts {
        model,
        hara,
        fsrs,
        conflicts,
        verdicts,
        meta,
    } = parts;

    let stage = meta.stage;

    // -- traceability -------------------------------------------------------
    let mut functions = Vec::new();
    for function in model.functions.values() {
        let hazards = hara
            .hazards
            .iter()
            .filter(|h| h.function == function.id)
            .map(|h| TraceHazard {
                id: h.id.clone(),
                guide_word: h.guide_word.as_str().to_string(),
                draft: h.draft,
                text: h.text.clone(),
            })
            .collect();
        functions.push(TraceFunction {
            id: function.id.clone(),
            perspective: function.perspective,
            scenario: function.scenario,
            description: function.description.clone(),
            hazards,
        });
    }

    let modes = model
        .modes
        .values()
        .map(|m| TraceNamed {
            id: m.id.clone(),
            name: m.name.clone(),
            perspective: m.perspective,
        })
        .collect();
    let situations = model
        .situations
        .values()
        .map(|s| TraceNamed {
            id: s.id.clone(),
            name: s.name.clone(),
            perspective: s.perspective,
        })
        .collect();

    let events = (stage >= Stage::Hara).then(|| {
        hara.events
            .iter()
            .map(|event| TraceEvent {
                hazard: event.key.hazard.clone(),
                mode: event.key.mode.clone(),
                situation: event.key.situation.clone(),
                severity: event.rating.severity.to_string(),
                exposure: event.rating.exposure.to_string(),
                controllability: event.rating.controllability.to_string(),
                asil: crate::catalog::AsilTable::rate(
                    event.rating.severity,
                    event.rating.exposure,
                    event.rating.controllability,
                ),
            })
            .collect::<Vec<_>>()
    });
    let goals = (stage >= Stage::Goals).then(|| {
        hara.goals
            .iter()
            .map(|goal| TraceGoal {
                id: goal.id.clone(),
                perspective: goal.perspective,
                asil: goal.asil,
                draft: goal.draft,
                text: goal.text.clone(),
                events: goal
                    .member_events
                    .iter()
                    .map(|key| TraceEventRef {
                        hazard: key.hazard.clone(),
                        mode: key.mode.clone(),
                        situation: key.situation.clone(),
                    })
                    .collect(),
            })
            .collect::<Vec<_>>()
    });

    let trace_fsrs = fsrs.map(|derived| {
        derived
            .fsrs
            .iter()
            .map(|fsr| TraceFsr {
                id: fsr.id.clone(),
                component: fsr.component.clone(),
                failure_mode: fsr.failure_mode.clone(),
                perspective: fsr.perspective,
                asil: fsr.asil,
                draft: fsr.draft,
                text: fsr.text.clone(),
                trigger: fsr.trigger.clone(),
                response_class: fsr.response_class.clone(),
                requirement: fsr.requirement.clone(),
                source_goals: fsr.source_goals.clone(),
            })
            .collect::<Vec<_>>()
    });

    let traceability = Traceability {
        functions,
        modes,
        situations,
        events,
        goals,
        fsrs: trace_fsrs,
        overlapping_fsr_pairs: fsrs
            .map(|d| d.cross_perspective_overlaps.clone())
            .unwrap_or_default(),
    };

    // -- counts --------------------------------------------------------------
    let counts = compute_counts(&traceability, verdicts, conflicts);

    AssessmentReport {
        meta,
        counts,
        conflicts: conflicts.cloned(),
        verdicts: verdicts.map(|v| v.to_vec()),
        traceability,
    }
}

fn compute_counts(
    traceability: &Traceability,
    verdicts: Option<&[AssessmentVerdict]>,
    conflicts: Option<&ConflictReport>,
) -> Counts {
    let mut functions = PerPerspective::default();
    let mut hazards = PerPerspective::default();
    let mut draft_hazards = 0;
    let mut raw = PerPerspective::default();
    let mut modes = PerPerspective::default();
    let mut situations = PerPerspective::default();

    for mode in &traceability.modes {
        modes.add(mode.perspective, 1);
    }
    for situation in &traceability.situations {
        situations.add(situation.perspective, 1);
    }
    for function in &traceability.functions {
        functions.add(function.perspective, 1);
        hazards.add(function.perspective, function.hazards.len() as u64);
        draft_hazards += function.hazards.iter().filter(|h| h.draft).count() as u64;
    }
    for perspective in Perspective::ALL {
        let hazard_count = match perspective {
            Perspective::Vehicular => hazards.vehicular,
            Perspective::Cooperative => hazards.cooperative,
        };
        let mode_count = match perspective {
            Perspective::Vehicular => modes.vehicular,
            Perspective::Cooperative => modes.cooperative,
        };
        let situation_count = match perspective {
            Perspective::Vehicular => situations.vehicular,
            Perspective::Cooperative => situations.cooperative,
        };
        raw.add(perspective, hazard_count * mode_count * situation_count);
    }

    let hazard_perspective: BTreeMap<&Ident, Perspective> = traceability
        .functions
        .iter()
        .flat_map(|f| f.hazards.iter().map(move |h| (&h.id, f.perspective)))
        .collect();
    let mut feasible = PerPerspective::default();
    if let Some(events) = &traceability.events {
        for event in events {
            if let Some(&perspective) = hazard_perspective.get(&event.hazard) {
                feasible.add(perspective, 1);
            }
        }
    }

    let goals = traceability.goals.as_ref().map(|goals| {
        let mut totals = PerPerspective::default();
        let mut asil = empty_histogram();
        for goal in goals {
            totals.add(goal.perspective, 1);
            *asil.entry(goal.asil.as_str().to_string()).or_default() += 1;
        }
        GoalCounts { totals, asil }
    });

    let fsr_counts = traceability.fsrs.as_ref().map(|fsrs| {
        let mut totals = PerPerspective::default();
        let mut asil = empty_histogram();
        let mut by_component: BTreeMap<Ident, PerPerspective> = BTreeMap::new();
        for fsr in fsrs {
            totals.add(fsr.perspective, 1);
            *asil.entry(fsr.asil.as_str().to_string()).or_default() += 1;
            by_component
                .entry(fsr.component.clone())
                .or_default()
                .add(fsr.perspective, 1);
        }
        let component_groups = by_component.len() as u64;
        FsrCounts {
            totals,
            asil,
            by_component,
            component_groups,
        }
    });

    let fulfillment = verdicts.map(|verdicts| {
        let mut fulfilled = PerPerspective::default();
        let mut unfulfilled = PerPerspective::default();
        let perspective_of: BTreeMap<&Ident, Perspective> = traceability
            .fsrs
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|f| (&f.id, f.perspective))
            .collect();
        for verdict in verdicts {
            let Some(&perspective) = perspective_of.get(&verdict.fsr) else {
                continue;
            };
            match verdict.status {
                VerdictStatus::Fulfilled => fulfilled.add(perspective, 1),
                VerdictStatus::Unfulfilled => unfulfilled.add(perspective, 1),
            }
        }
        FulfillmentCounts {
            fulfilled,
            unfulfilled,
        }
    });

    let comparisons = conflicts.map(|c| ComparisonCounts {
        grouped: c.comparisons_grouped,
        naive: c.comparisons_naive,
    });

    Counts {
        functions,
        hazards,
        draft_hazards,
        events: EventCounts { raw, feasible },
        goals,
        fsrs: fsr_counts,
        fulfillment,
        comparisons,
    }
}

/// Recomputes the summary counts from the detail sections; reports are
/// internally consistent exactly when this equals `report.counts`.
pub fn recompute_counts(report: &AssessmentReport) -> Counts {
    compute_counts(
        &report.traceability,
        report.verdicts.as_deref(),
        report.conflicts.as_ref(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Markdown,
}

pub fn render(report: &AssessmentReport, format: Format) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Markdown => render_markdown(report),
    }
}

pub fn render_json(report: &AssessmentReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

fn draft_marker(draft: bool) -> &'static str {
    if draft {
        " *(draft)*"
    } else {
        ""
    }
}

fn join_idents<'a, I: IntoIterator<Item = &'a Ident>>(idents: I) -> String {
    let joined: Vec<&str> = idents.into_iter().map(|i| i.as_str()).collect();
    if joined.is_empty() {
        "-".to_string()
    } else {
        joined.join(", ")
    }
}

pub fn render_markdown(report: &AssessmentReport) -> String {
    let mut out = String::new();
    let meta = &report.meta;
    out.push_str("# Cooperative Safety Assessment Report\n\n");
    out.push_str(&format!(
        "- Tool version: {}\n- Stage: {}\n- Catalog: {}\n",
        meta.tool_version,
        meta.stage.as_str(),
        meta.catalog
    ));
    if let Some(at) = &meta.generated_at {
        out.push_str(&format!("- Generated at: {at}\n"));
    }
    for input in &meta.inputs {
        out.push_str(&format!("- Input: {} (sha256 {})\n", input.path, input.sha256));
    }
    out.push('\n');

    out.push_str("## Summary\n\n");
    out.push_str("| Metric | Vehicular | Cooperative | Total |\n");
    out.push_str("| --- | ---: | ---: | ---: |\n");
    let counts = &report.counts;
    let mut row = |name: &str, p: &PerPerspective| {
        out.push_str(&format!(
            "| {name} | {} | {} | {} |\n",
            p.vehicular, p.cooperative, p.total
        ));
    };
    row("Functions", &counts.functions);
    row("Hazards", &counts.hazards);
    row("Hazardous events (raw product)", &counts.events.raw);
    row("Hazardous events (feasible)", &counts.events.feasible);
    if let Some(goals) = &counts.goals {
        row("Safety goals", &goals.totals);
    }
    if let Some(fsrs) = &counts.fsrs {
        row("FSRs", &fsrs.totals);
    }
    if let Some(fulfillment) = &counts.fulfillment {
        row("Fulfilled FSRs", &fulfillment.fulfilled);
        row("Unfulfilled FSRs", &fulfillment.unfulfilled);
    }
    out.push('\n');
    if counts.draft_hazards > 0 {
        out.push_str(&format!(
            "{} hazard text(s) are mechanically templated drafts, marked *(draft)* below.\n\n",
            counts.draft_hazards
        ));
    }

    if counts.goals.is_some() || counts.fsrs.is_some() {
        out.push_str("## ASIL Distribution\n\n");
        out.push_str("| ASIL | Goals | FSRs |\n| --- | ---: | ---: |\n");
        for rating in AsilRating::ALL {
            let goals = counts
                .goals
                .as_ref()
                .and_then(|g| g.asil.get(rating.as_str()))
                .copied()
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into());
            let fsrs = counts
                .fsrs
                .as_ref()
                .and_then(|f| f.asil.get(rating.as_str()))
                .copied()
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!("| {} | {goals} | {fsrs} |\n", rating.as_str()));
        }
        out.push('\n');
    }

    if let Some(fsr_counts) = &counts.fsrs {
        out.push_str("## FSRs by Component\n\n");
        if fsr_counts.totals.total == 0 {
            out.push_str("No FSRs derived.\n\n");
        } else {
            out.push_str("| Component | Total | Vehicular | Cooperative |\n");
            out.push_str("| --- | ---: | ---: | ---: |\n");
            for (component, p) in &fsr_counts.by_component {
                out.push_str(&format!(
                    "| {component} | {} | {} | {} |\n",
                    p.total, p.vehicular, p.cooperative
                ));
            }
            out.push('\n');
        }
    }

    if let Some(conflicts) = &report.conflicts {
        out.push_str("## Conflict Check\n\n");
        out.push_str(&format!(
            "Grouping by component needed {} comparisons instead of {} naive pairwise comparisons.\n\n",
            conflicts.comparisons_grouped, conflicts.comparisons_naive
        ));
        if conflicts.pairs.is_empty() {
            out.push_str("No conflicts detected.\n\n");
        } else {
            out.push_str("| First | Second | Component | Rule |\n| --- | --- | --- | --- |\n");
            for pair in &conflicts.pairs {
                let rule = match &pair.rule {
                    crate::conformance::ConflictRule::ExclusiveResponses { responses } => {
                        format!("exclusive responses {} / {}", responses.0, responses.1)
                    }
                    crate::conformance::ConflictRule::Explicit => "explicit annotation".into(),
                };
                out.push_str(&format!(
                    "| {} | {} | {} | {rule} |\n",
                    pair.first, pair.second, pair.component
                ));
            }
            out.push('\n');
        }
    }

    if let (Some(verdicts), Some(fsrs)) = (&report.verdicts, &report.traceability.fsrs) {
        let fsr_by_id: BTreeMap<&Ident, &TraceFsr> = fsrs.iter().map(|f| (&f.id, f)).collect();
        let fulfilled: Vec<&AssessmentVerdict> = verdicts
            .iter()
            .filter(|v| v.status == VerdictStatus::Fulfilled)
            .collect();
        let unfulfilled: Vec<&AssessmentVerdict> = verdicts
            .iter()
            .filter(|v| v.status == VerdictStatus::Unfulfilled)
            .collect();

        out.push_str("## Fulfilled FSRs\n\n");
        if fulfilled.is_empty() {
            out.push_str("None.\n\n");
        } else {
            out.push_str("| FSR | Component | Perspective | ASIL | Applied tactics | Text |\n");
            out.push_str("| --- | --- | --- | --- | --- | --- |\n");
            for verdict in fulfilled {
                let Some(fsr) = fsr_by_id.get(&verdict.fsr) else {
                    continue;
                };
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {}{} |\n",
                    fsr.id,
                    fsr.component,
                    fsr.perspective,
                    fsr.asil,
                    join_idents(&verdict.applied_tactics),
                    fsr.text,
                    draft_marker(fsr.draft),
                ));
            }
            out.push('\n');
        }

        out.push_str("## Unfulfilled FSRs\n\n");
        if unfulfilled.is_empty() {
            out.push_str("None.\n\n");
        } else {
            out.push_str(
                "| FSR | Component | ASIL | Missing capabilities | Recommended patterns | Text |\n",
            );
            out.push_str("| --- | --- | --- | --- | --- | --- |\n");
            for verdict in unfulfilled {
                let Some(fsr) = fsr_by_id.get(&verdict.fsr) else {
                    continue;
                };
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {}{} |\n",
                    fsr.id,
                    fsr.component,
                    fsr.asil,
                    join_idents(&verdict.missing_atoms),
                    join_idents(verdict.recommended_patterns.iter().take(5)),
                    fsr.text,
                    draft_marker(fsr.draft),
                ));
            }
            out.push('\n');
        }
    }

    if !report.traceability.overlapping_fsr_pairs.is_empty() {
        out.push_str("## Overlapping FSRs Across Perspectives\n\n");
        for (component, failure_mode) in &report.traceability.overlapping_fsr_pairs {
            out.push_str(&format!("- {component} / {failure_mode}\n"));
        }
        out.push('\n');
    }

    out.push_str("## Traceability\n\n### Functions and Hazards\n\n");
    if report.traceability.functions.is_empty() {
        out.push_str("No functions declared.\n\n");
    }
    for function in &report.traceability.functions {
        out.push_str(&format!(
            "- **{}** ({}, {}): {}\n",
            function.id,
            function.perspective,
            function.scenario.as_str(),
            function.description
        ));
        for hazard in &function.hazards {
            out.push_str(&format!(
                "  - {} [{}] {}{}\n",
                hazard.id,
                hazard.guide_word,
                hazard.text,
                draft_marker(hazard.draft)
            ));
        }
    }
    out.push('\n');

    if let Some(goals) = &report.traceability.goals {
        out.push_str("### Safety Goals\n\n");
        if goals.is_empty() {
            out.push_str("No safety goals derived.\n\n");
        } else {
            out.push_str("| Goal | Perspective | ASIL | Events | Text |\n");
            out.push_str("| --- | --- | --- | ---: | --- |\n");
            for goal in goals {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {}{} |\n",
                    goal.id,
                    goal.perspective,
                    goal.asil,
                    goal.events.len(),
                    goal.text,
                    draft_marker(goal.draft)
                ));
            }
            out.push('\n');
        }
    }

    if let (Some(fsrs), None) = (&report.traceability.fsrs, &report.verdicts) {
        out.push_str("### FSRs\n\n");
        if fsrs.is_empty() {
            out.push_str("No FSRs derived.\n\n");
        } else {
            out.push_str("| FSR | Component | Perspective | ASIL | Source goals | Text |\n");
            out.push_str("| --- | --- | --- | --- | --- | --- |\n");
            for fsr in fsrs {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {}{} |\n",
                    fsr.id,
                    fsr.component,
                    fsr.perspective,
                    fsr.asil,
                    join_idents(&fsr.source_goals),
                    fsr.text,
                    draft_marker(fsr.draft)
                ));
            }
            out.push('\n');
        }
    }

    out
}

/// Builds `Fsr` lookups used by renderers and tests.
pub fn fsrs_by_component(fsrs: &[Fsr]) -> BTreeMap<&Ident, Vec<&Fsr>> {
    let mut map: BTreeMap<&Ident, Vec<&Fsr>> = BTreeMap::new();
    for fsr in fsrs {
        map.entry(&fsr.component).or_default().push(fsr);
    }
    map
}
