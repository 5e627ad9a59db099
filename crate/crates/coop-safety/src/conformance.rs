//! Conformance checking against the technical architecture.
//!
//! Phase 1 groups FSRs by functional component and checks each in-group pair
//! for conflicts, cutting the quadratic comparison count. Phase 2 matches
//! FSR capability requirements against the tactics implemented by the
//! realizing technical components, and recommends patterns for the gaps.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::{Catalog, ResponseExclusivity};
use crate::model::{Fsr, Ident, RequirementDnf, TechnicalComponent};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ConflictRule {
    /// Equal triggers with response classes declared mutually exclusive.
    ExclusiveResponses { responses: (Ident, Ident) },
    /// An authored `conflicts_with` annotation.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictPair {
    pub first: Ident,
    pub second: Ident,
    pub component: Ident,
    #[serde(flatten)]
    pub rule: ConflictRule,
}

/// Outcome of phase 1 with both comparison counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictReport {
    pub pairs: Vec<ConflictPair>,
    pub comparisons_grouped: u64,
    pub comparisons_naive: u64,
}

/// Compares only FSR pairs sharing a functional component. A pair conflicts
/// when triggers are equal and the response classes form an exclusivity pair,
/// or when an explicit `conflicts_with` annotation names the pair.
pub fn detect_conflicts(fsrs: &[Fsr], exclusivity: &ResponseExclusivity) -> ConflictReport {
    let n = fsrs.len() as u64;
    let comparisons_naive = n * n.saturating_sub(1) / 2;

    let mut groups: BTreeMap<&Ident, Vec<&Fsr>> = BTreeMap::new();
    for fsr in fsrs {
        groups.entry(&fsr.component).or_default().push(fsr);
    }

    let mut comparisons_grouped = 0u64;
    let mut pairs = Vec::new();
    for (component, members) in &groups {
        let k = members.len() as u64;
        comparisons_grouped += k * k.saturating_sub(1) / 2;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (a, b) = (members[i], members[j]);
                let explicit = a
                    .conflicts_with
                    .contains(&(b.component.clone(), b.failure_mode.clone()))
                    || b.conflicts_with
                        .contains(&(a.component.clone(), a.failure_mode.clone()));
                let rule = if explicit {
                    Some(ConflictRule::Explicit)
                } else if a.trigger == b.trigger
                    && exclusivity.is_exclusive(&a.response_class, &b.response_class)
                {
                    Some(ConflictRule::ExclusiveResponses {
                        responses: (a.response_class.clone(), b.response_class.clone()),
                    })
                } else {
                    None
                };
                if let Some(rule) = rule {
                    pairs.push(ConflictPair {
                        first: a.id.clone(),
                        second: b.id.clone(),
                        component: (*component).clone(),
                        rule,
                    });
                }
            }
        }
    }

    pairs.sort_by(|a, b| (&a.first, &a.second).cmp(&(&b.first, &b.second)));
    ConflictReport {
        pairs,
        comparisons_grouped,
        comparisons_naive,
    }
}

/// Tactics whose provided capabilities intersect the FSR's requirement atoms,
/// plus the atoms no catalog tactic provides (reported as warnings upstream).
pub fn applicable_tactics(fsr: &Fsr, catalog: &Catalog) -> (BTreeSet<Ident>, BTreeSet<Ident>) {
    requirement_applicable_tactics(&fsr.requirement, catalog)
}

fn requirement_applicable_tactics(
    requirement: &RequirementDnf,
    catalog: &Catalog,
) -> (BTreeSet<Ident>, BTreeSet<Ident>) {
    let atoms = requirement.atoms();
    let tactics: BTreeSet<Ident> = catalog
        .tactics
        .values()
        .filter(|t| t.provides.intersection(&atoms).next().is_some())
        .map(|t| t.id.clone())
        .collect();
    let vocabulary = catalog.capability_vocabulary();
    let unsatisfiable: BTreeSet<Ident> = atoms
        .into_iter()
        .filter(|atom| !vocabulary.contains(atom))
        .collect();
    (tactics, unsatisfiable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Fulfilled,
    Unfulfilled,
}

/// Why an FSR could not be assessed against an implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictReason {
    NoRealization,
}

/// Per-FSR assessment outcome. `status` is `Fulfilled` exactly when
/// `satisfied_alternative` is present, and the satisfied alternative is
/// always a subset of `available_capabilities`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentVerdict {
    pub fsr: Ident,
    pub status: VerdictStatus,
    pub applicable_tactics: BTreeSet<Ident>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied_alternative: Option<BTreeSet<Ident>>,
    pub implemented_tactics_considered: BTreeSet<Ident>,
    /// Implemented tactics that contribute an atom of the satisfied
    /// alternative; empty when unfulfilled.
    pub applied_tactics: BTreeSet<Ident>,
    pub available_capabilities: BTreeSet<Ident>,
    pub missing_atoms: BTreeSet<Ident>,
    /// Ranked recommendations; empty when fulfilled.
    pub recommended_patterns: Vec<Ident>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty", default)]
    pub unsatisfiable_atoms: BTreeSet<Ident>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<VerdictReason>,
}

/// Checks every FSR against the technical architecture.
///
/// Capabilities available to an FSR are the union of `provides` over the
/// implemented tactics of the technical components realizing the FSR's
/// functional component, plus those of their linked safety mechanisms.
pub fn assess(
    fsrs: &[Fsr],
    tech_components: &BTreeMap<Ident, TechnicalComponent>,
    catalog: &Catalog,
) -> Vec<AssessmentVerdict> {
    let mut verdicts: Vec<AssessmentVerdict> =
        fsrs.iter().map(|fsr| assess_one(fsr, tech_components, catalog)).collect();
    verdicts.sort_by(|a, b| a.fsr.cmp(&b.fsr));
    verdicts
}

fn assess_one(
    fsr: &Fsr,
    tech_components: &BTreeMap<Ident, TechnicalComponent>,
    catalog: &Catalog,
) -> AssessmentVerdict {
    let realizing: Vec<&TechnicalComponent> = tech_components
        .values()
        .filter(|t| t.realizes == fsr.component)
        .collect();

    let mut implemented: BTreeSet<Ident> = BTreeSet::new();
    for tech in &realizing {
        implemented.extend(tech.implemented_tactics.keys().cloned());
        for link in &tech.linked_mechanisms {
            if let Some(mechanism) = tech_components.get(link) {
                implemented.extend(mechanism.implemented_tactics.keys().cloned());
            }
        }
    }

    let available: BTreeSet<Ident> = catalog.provides_of(implemented.iter());
    let satisfied_alternative = fsr
        .requirement
        .alternatives
        .iter()
        .find(|alt| alt.is_subset(&available))
        .cloned();

    let (applicable, unsatisfiable) = applicable_tactics(fsr, catalog);

    let applied_tactics = match &satisfied_alternative {
        Some(alt) => implemented
            .iter()
            .filter(|tactic| {
                catalog
                    .tactics
                    .get(*tactic)
                    .is_some_and(|t| t.provides.intersection(alt).next().is_some())
            })
            .cloned()
            .collect(),
        None => BTreeSet::new(),
    };

    let missing_atoms: BTreeSet<Ident> = fsr
        .requirement
        .atoms()
        .difference(&available)
        .cloned()
        .collect();

    let status = if satisfied_alternative.is_some() {
        VerdictStatus::Fulfilled
    } else {
        VerdictStatus::Unfulfilled
    };

    let recommended_patterns = match status {
        VerdictStatus::Fulfilled => Vec::new(),
        VerdictStatus::Unfulfilled => rank_patterns(catalog, &applicable, &missing_atoms),
    };

    AssessmentVerdict {
        fsr: fsr.id.clone(),
        status,
        applicable_tactics: applicable,
        satisfied_alternative,
        implemented_tactics_considered: implemented,
        applied_tactics,
        available_capabilities: available,
        missing_atoms,
        recommended_patterns,
        unsatisfiable_atoms: unsatisfiable,
        reason: realizing.is_empty().then_some(VerdictReason::NoRealization),
    }
}

/// Patterns whose tactic set intersects the applicable tactics, ranked by how
/// many still-missing atoms their tactics would provide, ties by pattern id.
fn rank_patterns(
    catalog: &Catalog,
    applicable: &BTreeSet<Ident>,
    missing_atoms: &BTreeSet<Ident>,
) -> Vec<Ident> {
    let mut ranked: Vec<(usize, &Ident)> = catalog
        .patterns
        .values()
        .filter(|p| p.tactics.intersection(applicable).next().is_some())
        .map(|p| {
            let coverage = catalog
                .provides_of(p.tactics.iter())
                .intersection(missing_atoms)
                .count();
            (coverage, &p.id)
        })
        .collect();
    ranked.sort_by(|(cov_a, id_a), (cov_b, id_b)| cov_b.cmp(cov_a).then_with(|| id_a.cmp(id_b)));
    ranked.into_iter().map(|(_, id)| id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::SourceSpan;
    use crate::model::{AsilRating, Perspective};

    fn fsr(id: &str, component: &str, trigger: &str, response: &str, alts: &[&[&str]]) -> Fsr {
        Fsr {
            id: id.into(),
            text: format!("fsr {id}"),
            draft: false,
            component: component.into(),
            failure_mode: Ident::new(format!("fm_{id}")),
            perspective: Perspective::Vehicular,
            source_goals: std::iter::once(Ident::from("g")).collect(),
            asil: AsilRating::C,
            trigger: trigger.into(),
            response_class: response.into(),
            requirement: RequirementDnf {
                alternatives: alts
                    .iter()
                    .map(|alt| alt.iter().map(|a| Ident::from(*a)).collect())
                    .collect(),
            },
            conflicts_with: BTreeSet::new(),
        }
    }

    fn tech(id: &str, realizes: &str, tactics: &[&str], links: &[&str]) -> (Ident, TechnicalComponent) {
        (
            id.into(),
            TechnicalComponent {
                id: id.into(),
                realizes: realizes.into(),
                implemented_tactics: tactics
                    .iter()
                    .map(|t| (Ident::from(*t), String::new()))
                    .collect(),
                linked_mechanisms: links.iter().map(|l| Ident::from(*l)).collect(),
                span: SourceSpan::synthetic(),
            },
        )
    }

    #[test]
    fn equal_trigger_exclusive_responses_conflict() {
        let catalog = Catalog::bundled();
        let fsrs = vec![
            fsr("fsr_01", "actuation_sensor", "actuation_sensor_failure", "emit_fault_message", &[&["plausibility_check"]]),
            fsr("fsr_02", "actuation_sensor", "actuation_sensor_failure", "suppress_all_messages", &[&["plausibility_check"]]),
        ];
        let report = detect_conflicts(&fsrs, &catalog.exclusivity);
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.comparisons_grouped, 1);
        assert_eq!(report.comparisons_naive, 1);
        assert!(matches!(
            report.pairs[0].rule,
            ConflictRule::ExclusiveResponses { .. }
        ));
    }

    #[test]
    fn different_components_are_never_compared() {
        let catalog = Catalog::bundled();
        let fsrs = vec![
            fsr("fsr_01", "a", "actuation_sensor_failure", "emit_fault_message", &[&["plausibility_check"]]),
            fsr("fsr_02", "b", "actuation_sensor_failure", "suppress_all_messages", &[&["plausibility_check"]]),
        ];
        let report = detect_conflicts(&fsrs, &catalog.exclusivity);
        assert!(report.pairs.is_empty());
        assert_eq!(report.comparisons_grouped, 0);
        assert_eq!(report.comparisons_naive, 1);
    }

    #[test]
    fn explicit_annotation_conflicts() {
        let catalog = Catalog::bundled();
        let mut a = fsr("fsr_a", "c", "component_fault", "safe_stop", &[&["recovery"]]);
        let b = fsr("fsr_b", "c", "sensor_fault", "alert_driver", &[&["recovery"]]);
        a.conflicts_with
            .insert((b.component.clone(), b.failure_mode.clone()));
        let report = detect_conflicts(&[a, b], &catalog.exclusivity);
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.pairs[0].rule, ConflictRule::Explicit);
    }

    #[test]
    fn applicable_tactics_by_capability_intersection() {
        let catalog = Catalog::bundled();
        let f = fsr(
            "fsr_accel",
            "acceleration_sensing",
            "sensor_fault",
            "switch_backup_channel",
            &[&["failure_masking", "diverse_channel"]],
        );
        let (tactics, unsatisfiable) = applicable_tactics(&f, &catalog);
        assert!(tactics.contains(&Ident::from("diverse_redundancy")));
        assert!(unsatisfiable.is_empty());
    }

    #[test]
    fn unsatisfiable_atoms_are_flagged() {
        let catalog = Catalog::bundled();
        let f = fsr("fsr_x", "c", "component_fault", "safe_stop", &[&["teleportation"]]);
        let (tactics, unsatisfiable) = applicable_tactics(&f, &catalog);
        assert!(tactics.is_empty());
        assert_eq!(unsatisfiable.len(), 1);
    }

    #[test]
    fn plausibility_gap_recommends_sanity_check_pattern() {
        let catalog = Catalog::bundled();
        let f = fsr("fsr_p", "c", "component_fault", "safe_stop", &[&["plausibility_check"]]);
        let tech_components = BTreeMap::from([tech("c_sw", "c", &[], &[])]);
        let verdicts = assess(&[f], &tech_components, &catalog);
        assert_eq!(verdicts[0].status, VerdictStatus::Unfulfilled);
        assert!(verdicts[0]
            .recommended_patterns
            .contains(&Ident::from("sanity_check_pattern")));
        assert!(verdicts[0].applied_tactics.is_empty());
    }

    #[test]
    fn no_realization_is_reported() {
        let catalog = Catalog::bundled();
        let f = fsr("fsr_p", "c", "component_fault", "safe_stop", &[&["plausibility_check"]]);
        let verdicts = assess(&[f], &BTreeMap::new(), &catalog);
        assert_eq!(verdicts[0].status, VerdictStatus::Unfulfilled);
        assert_eq!(verdicts[0].reason, Some(VerdictReason::NoRealization));
    }

    #[test]
    fn linked_mechanism_tactics_count() {
        let catalog = Catalog::bundled();
        let f = fsr("fsr_m", "c", "component_fault", "safe_stop", &[&["runtime_monitoring"]]);
        let tech_components = BTreeMap::from([
            tech("c_sw", "c", &[], &["mgmt"]),
            tech("mgmt", "c", &["condition_monitoring"], &[]),
        ]);
        // mgmt realizes c here as well, but the link alone would suffice
        let verdicts = assess(&[f], &tech_components, &catalog);
        assert_eq!(verdicts[0].status, VerdictStatus::Fulfilled);
        assert_eq!(
            verdicts[0].applied_tactics,
            BTreeSet::from([Ident::from("condition_monitoring")])
        );
    }

    #[test]
    fn fulfilled_verdict_is_sound_and_has_no_recommendations() {
        let catalog = Catalog::bundled();
        let f = fsr(
            "fsr_s",
            "c",
            "component_fault",
            "safe_stop",
            &[&["plausibility_check"], &["failure_masking"]],
        );
        let tech_components = BTreeMap::from([tech("c_sw", "c", &["sanity_check"], &[])]);
        let verdicts = assess(&[f], &tech_components, &catalog);
        let verdict = &verdicts[0];
        assert_eq!(verdict.status, VerdictStatus::Fulfilled);
        let alt = verdict.satisfied_alternative.as_ref().unwrap();
        assert!(alt.is_subset(&verdict.available_capabilities));
        assert!(verdict.recommended_patterns.is_empty());
        assert_eq!(
            verdict.applied_tactics,
            BTreeSet::from([Ident::from("sanity_check")])
        );
    }
}
