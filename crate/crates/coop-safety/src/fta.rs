//! Fault-tree analysis: minimal cut sets and FSR derivation.
//!
//! Cut sets come from a top-down MOCUS-style expansion (OR gates split rows,
//! AND gates extend rows) followed by absorption-based minimization. Trees at
//! this scale have well under a hundred leaves, so the exact expansion is the
//! right tool.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    max_asil, FaultTree, Fsr, FsrAnnotation, Gate, Ident, Perspective, SafetyGoal,
};

/// A minimal set of basic events whose joint occurrence causes the top event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CutSet {
    pub basics: BTreeSet<(Ident, Ident)>,
}

/// Computes the minimal cut sets of a gate tree.
///
/// The returned family is subset-free and canonically ordered by
/// (size, lexicographic ids).
pub fn minimal_cut_sets(root: &Gate) -> Vec<CutSet> {
    // each row is a conjunction of pending gates / collected basics
    let mut rows: Vec<(Vec<&Gate>, BTreeSet<(Ident, Ident)>)> =
        vec![(vec![root], BTreeSet::new())];
    let mut complete: Vec<BTreeSet<(Ident, Ident)>> = Vec::new();

    while let Some((mut pending, mut basics)) = rows.pop() {
        let Some(gate) = pending.pop() else {
            complete.push(basics);
            continue;
        };
        match gate {
            Gate::Basic {
                component,
                failure_mode,
            } => {
                basics.insert((component.clone(), failure_mode.clone()));
                rows.push((pending, basics));
            }
            Gate::And(children) => {
                pending.extend(children.iter());
                rows.push((pending, basics));
            }
            Gate::Or(children) => {
                for child in children {
                    let mut branch_pending = pending.clone();
                    branch_pending.push(child);
                    rows.push((branch_pending, basics.clone()));
                }
            }
        }
    }

    minimize(complete)
}

/// Removes supersets (absorption) and duplicates, then orders canonically.
fn minimize(mut sets: Vec<BTreeSet<(Ident, Ident)>>) -> Vec<CutSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<BTreeSet<(Ident, Ident)>> = Vec::new();
    for candidate in sets {
        if !kept.iter().any(|k| k.is_subset(&candidate)) {
            kept.push(candidate);
        }
    }
    kept.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    kept.into_iter().map(|basics| CutSet { basics }).collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum FsrError {
    #[error("{} basic event(s) have no fsr_annotation: {}", .0.len(), format_pairs(.0))]
    MissingAnnotations(Vec<(Ident, Ident)>),
    #[error("goal(s) without a fault tree: {}", format_ids(.0))]
    GoalsWithoutTrees(Vec<Ident>),
}

fn format_pairs(pairs: &[(Ident, Ident)]) -> String {
    pairs
        .iter()
        .map(|(c, f)| format!("{c}/{f}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn format_ids(ids: &[Ident]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// FSRs plus the (component, failure mode) pairs that were derived in both
/// perspectives. Such overlaps stay separate FSRs and are flagged in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFsrs {
    pub fsrs: Vec<Fsr>,
    pub cross_perspective_overlaps: Vec<(Ident, Ident)>,
}

/// Derives one FSR per distinct (component, failure mode) appearing in any
/// minimal cut set of any tree of any goal, within each perspective.
///
/// FSRs for the same basic event across goals are merged, accumulating
/// `source_goals`; the ASIL is the maximum over those goals.
pub fn derive_fsrs(
    goals: &[SafetyGoal],
    trees: &BTreeMap<Ident, FaultTree>,
    annotations: &BTreeMap<(Ident, Ident), FsrAnnotation>,
) -> Result<DerivedFsrs, FsrError> {
    let goalless: Vec<Ident> = goals
        .iter()
        .filter(|g| !trees.values().any(|t| t.goal.as_ref() == Some(&g.id)))
        .map(|g| g.id.clone())
        .collect();
    if !goalless.is_empty() {
        return Err(FsrError::GoalsWithoutTrees(goalless));
    }

    // (perspective, component, failure_mode) -> source goals
    let mut sources: BTreeMap<(Perspective, Ident, Ident), BTreeSet<Ident>> = BTreeMap::new();
    let mut missing: BTreeSet<(Ident, Ident)> = BTreeSet::new();

    for goal in goals {
        for tree in trees.values().filter(|t| t.goal.as_ref() == Some(&goal.id)) {
            for cut_set in minimal_cut_sets(&tree.root) {
                for (component, failure_mode) in cut_set.basics {
                    if !annotations.contains_key(&(component.clone(), failure_mode.clone())) {
                        missing.insert((component.clone(), failure_mode.clone()));
                        continue;
                    }
                    sources
                        .entry((goal.perspective, component, failure_mode))
                        .or_default()
                        .insert(goal.id.clone());
                }
            }
        }
    }

    if !missing.is_empty() {
        return Err(FsrError::MissingAnnotations(missing.into_iter().collect()));
    }

    // pairs present in both perspectives keep one FSR per perspective,
    // disambiguated by an id suffix, and are flagged as overlaps
    let mut pair_perspectives: BTreeMap<(Ident, Ident), BTreeSet<Perspective>> = BTreeMap::new();
    for (perspective, component, failure_mode) in sources.keys() {
        pair_perspectives
            .entry((component.clone(), failure_mode.clone()))
            .or_default()
            .insert(*perspective);
    }
    let overlaps: Vec<(Ident, Ident)> = pair_perspectives
        .iter()
        .filter(|(_, perspectives)| perspectives.len() > 1)
        .map(|(pair, _)| pair.clone())
        .collect();

    let goal_by_id: BTreeMap<&Ident, &SafetyGoal> = goals.iter().map(|g| (&g.id, g)).collect();
    let mut fsrs = Vec::with_capacity(sources.len());
    for ((perspective, component, failure_mode), source_goals) in &sources {
        let annotation = &annotations[&(component.clone(), failure_mode.clone())];
        let overlapping = pair_perspectives[&(component.clone(), failure_mode.clone())].len() > 1;
        let id = if overlapping {
            Ident::new(format!(
                "fsr_{component}_{failure_mode}_{}",
                perspective.as_str()
            ))
        } else {
            Ident::new(format!("fsr_{component}_{failure_mode}"))
        };
        let asil = max_asil(
            source_goals
                .iter()
                .filter_map(|g| goal_by_id.get(g).map(|goal| goal.asil)),
        )
        .expect("non-empty source goals");
        let (text, draft) = match &annotation.text {
            Some(text) => (text.clone(), false),
            None => {
                let first_goal = source_goals.iter().next().expect("non-empty");
                let goal_text = goal_by_id
                    .get(first_goal)
                    .map(|g| g.text.as_str())
                    .unwrap_or("the safety goal");
                (
                    format!(
                        "A failure ({failure_mode}) in {component} shall not lead to violation of {goal_text}"
                    ),
                    true,
                )
            }
        };
        fsrs.push(Fsr {
            id,
            text,
            draft,
            component: component.clone(),
            failure_mode: failure_mode.clone(),
            perspective: *perspective,
            source_goals: source_goals.clone(),
            asil,
            trigger: annotation.trigger.clone(),
            response_class: annotation.response_class.clone(),
            requirement: annotation.requirement.clone(),
            conflicts_with: annotation.conflicts_with.clone(),
        });
    }

    fsrs.sort_by(|a, b| {
        (&a.component, &a.failure_mode, a.perspective)
            .cmp(&(&b.component, &b.failure_mode, b.perspective))
    });
    Ok(DerivedFsrs {
        fsrs,
        cross_perspective_overlaps: overlaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::SourceSpan;
    use crate::model::{AsilRating, EventKey, RequirementDnf};

    fn basic(c: &str, f: &str) -> Gate {
        Gate::Basic {
            component: c.into(),
            failure_mode: f.into(),
        }
    }

    fn sets(root: &Gate) -> Vec<Vec<(String, String)>> {
        minimal_cut_sets(root)
            .into_iter()
            .map(|cs| {
                cs.basics
                    .iter()
                    .map(|(c, f)| (c.to_string(), f.to_string()))
                    .collect()
            })
            .collect()
    }

    fn expected(raw: &[&[(&str, &str)]]) -> Vec<Vec<(String, String)>> {
        raw.iter()
            .map(|set| {
                set.iter()
                    .map(|(c, f)| (c.to_string(), f.to_string()))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn or_of_basics_yields_singletons() {
        let tree = Gate::Or(vec![basic("a", "f"), basic("b", "f")]);
        assert_eq!(sets(&tree), expected(&[&[("a", "f")], &[("b", "f")]]));
    }

    #[test]
    fn and_distributes_over_or() {
        let tree = Gate::And(vec![
            basic("a", "f"),
            Gate::Or(vec![basic("b", "f"), basic("c", "f")]),
        ]);
        assert_eq!(
            sets(&tree),
            expected(&[&[("a", "f"), ("b", "f")], &[("a", "f"), ("c", "f")]])
        );
    }

    #[test]
    fn absorption_drops_supersets() {
        // OR(a, AND(a, b)) -> {{a}}; confirmed by the brute-force oracle in
        // the acceptance suite
        let tree = Gate::Or(vec![
            basic("a", "f"),
            Gate::And(vec![basic("a", "f"), basic("b", "f")]),
        ]);
        assert_eq!(sets(&tree), expected(&[&[("a", "f")]]));
    }

    #[test]
    fn single_basic_tree() {
        assert_eq!(sets(&basic("x", "f")), expected(&[&[("x", "f")]]));
    }

    fn goal(id: &str, perspective: Perspective, asil: AsilRating) -> SafetyGoal {
        SafetyGoal {
            id: id.into(),
            text: format!("goal {id}"),
            draft: false,
            perspective,
            member_events: std::iter::once(EventKey {
                hazard: "h".into(),
                mode: "m".into(),
                situation: "s".into(),
            })
            .collect(),
            asil,
        }
    }

    fn tree(id: &str, goal: &str, root: Gate) -> (Ident, FaultTree) {
        (
            id.into(),
            FaultTree {
                id: id.into(),
                goal: Some(goal.into()),
                root,
                span: SourceSpan::synthetic(),
            },
        )
    }

    fn annotation(c: &str, f: &str) -> ((Ident, Ident), FsrAnnotation) {
        (
            (c.into(), f.into()),
            FsrAnnotation {
                component: c.into(),
                failure_mode: f.into(),
                trigger: "component_fault".into(),
                response_class: "safe_stop".into(),
                requirement: RequirementDnf {
                    alternatives: vec![std::iter::once(Ident::from("plausibility_check")).collect()],
                },
                text: None,
                conflicts_with: BTreeSet::new(),
                span: SourceSpan::synthetic(),
            },
        )
    }

    #[test]
    fn singleton_tree_yields_one_fsr_with_goal_asil() {
        let goals = vec![goal("g1", Perspective::Vehicular, AsilRating::C)];
        let trees = BTreeMap::from([tree("t1", "g1", basic("x", "f"))]);
        let annotations = BTreeMap::from([annotation("x", "f")]);
        let derived = derive_fsrs(&goals, &trees, &annotations).unwrap();
        assert_eq!(derived.fsrs.len(), 1);
        let fsr = &derived.fsrs[0];
        assert_eq!(fsr.asil, AsilRating::C);
        assert_eq!(fsr.component, Ident::from("x"));
        assert_eq!(fsr.id, Ident::from("fsr_x_f"));
        assert!(fsr.draft);
        assert!(fsr.text.contains("A failure (f) in x"));
        assert!(derived.cross_perspective_overlaps.is_empty());
    }

    #[test]
    fn merge_accumulates_goals_and_takes_max_asil() {
        let goals = vec![
            goal("g1", Perspective::Vehicular, AsilRating::B),
            goal("g2", Perspective::Vehicular, AsilRating::D),
        ];
        let trees = BTreeMap::from([
            tree("t1", "g1", basic("x", "f")),
            tree("t2", "g2", basic("x", "f")),
        ]);
        let annotations = BTreeMap::from([annotation("x", "f")]);
        let derived = derive_fsrs(&goals, &trees, &annotations).unwrap();
        assert_eq!(derived.fsrs.len(), 1);
        assert_eq!(derived.fsrs[0].asil, AsilRating::D);
        assert_eq!(derived.fsrs[0].source_goals.len(), 2);
    }

    #[test]
    fn missing_annotations_are_all_listed() {
        let goals = vec![goal("g1", Perspective::Vehicular, AsilRating::B)];
        let trees = BTreeMap::from([tree(
            "t1",
            "g1",
            Gate::Or(vec![basic("x", "f"), basic("y", "f")]),
        )]);
        let err = derive_fsrs(&goals, &trees, &BTreeMap::new()).unwrap_err();
        match err {
            FsrError::MissingAnnotations(pairs) => assert_eq!(pairs.len(), 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn goal_without_tree_is_an_error() {
        let goals = vec![goal("g1", Perspective::Vehicular, AsilRating::B)];
        assert!(matches!(
            derive_fsrs(&goals, &BTreeMap::new(), &BTreeMap::new()),
            Err(FsrError::GoalsWithoutTrees(_))
        ));
    }

    #[test]
    fn cross_perspective_overlap_keeps_separate_fsrs() {
        let goals = vec![
            goal("g1", Perspective::Vehicular, AsilRating::B),
            goal("g2", Perspective::Cooperative, AsilRating::C),
        ];
        let trees = BTreeMap::from([
            tree("t1", "g1", basic("x", "f")),
            tree("t2", "g2", basic("x", "f")),
        ]);
        let annotations = BTreeMap::from([annotation("x", "f")]);
        let derived = derive_fsrs(&goals, &trees, &annotations).unwrap();
        assert_eq!(derived.fsrs.len(), 2);
        assert_eq!(derived.cross_perspective_overlaps.len(), 1);
        let ids: Vec<&str> = derived.fsrs.iter().map(|f| f.id.as_str()).collect();
        assert!(ids.contains(&"fsr_x_f_vehicular"));
        assert!(ids.contains(&"fsr_x_f_cooperative"));
    }
}
