//! Hazard analysis and risk assessment: functions -> hazards -> hazardous
//! events -> ASIL-rated, merged safety goals, independently per perspective.
//!
//! All operations are pure functions of immutable inputs with canonically
//! ordered outputs, so the two perspectives can run in any order (or in
//! parallel) without changing results.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::catalog::AsilTable;
use crate::model::{
    EventKey, FeasibilityPolicy, Hazard, HazardDecl, HazardousEvent, Ident, MergeGroup, Model,
    OperationalMode, OperationalSituation, Perspective, SafetyGoal, Sec, SystemFunction,
};

#[derive(Debug, Error, PartialEq)]
pub enum HaraError {
    #[error("hazard declaration `{hazard}` references unknown function `{function}`")]
    UnknownFunction { hazard: Ident, function: Ident },
    #[error("{} feasible triple(s) have no rating: {}", .0.len(), format_keys(.0))]
    MissingRatings(Vec<EventKey>),
    #[error("merge group `{group}` mixes events from both perspectives")]
    MixedPerspectives { group: Ident },
    #[error("event {event} is claimed by merge groups `{first}` and `{second}`")]
    EventInTwoGroups {
        event: EventKey,
        first: Ident,
        second: Ident,
    },
    #[error("merge group `{group}` references {event}, which is not a feasible event")]
    UnknownMergeEvent { group: Ident, event: EventKey },
    #[error("merge group `{group}` covers no events")]
    EmptyGroup { group: Ident },
    #[error("derived goal id `{id}` collides with a declared merge goal")]
    DuplicateGoalId { id: Ident },
}

fn format_keys(keys: &[EventKey]) -> String {
    keys.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Materialises one hazard per declared (function, guide word) pair.
///
/// Declarations are the applicability matrix; authored text is used verbatim,
/// otherwise the text is templated as "<guide word> <function description>"
/// and flagged as draft. Output is sorted by (function id, guide word).
pub fn generate_hazards(
    functions: &BTreeMap<Ident, SystemFunction>,
    decls: &[HazardDecl],
) -> Result<Vec<Hazard>, HaraError> {
    let mut hazards = Vec::with_capacity(decls.len());
    for decl in decls {
        let function = functions
            .get(&decl.function)
            .ok_or_else(|| HaraError::UnknownFunction {
                hazard: decl.id.clone(),
                function: decl.function.clone(),
            })?;
        let (text, draft) = match &decl.text {
            Some(text) => (text.clone(), false),
            None => (
                format!("{} {}", decl.guide_word.phrase(), function.description),
                true,
            ),
        };
        hazards.push(Hazard {
            id: decl.id.clone(),
            function: decl.function.clone(),
            guide_word: decl.guide_word,
            text,
            draft,
            perspective: function.perspective,
        });
    }
    hazards.sort_by_key(|h| (h.function.clone(), h.guide_word));
    Ok(hazards)
}

/// Enumerates the feasible (hazard, mode, situation) triples of one
/// perspective and attaches their ratings.
pub fn enumerate_events(
    hazards: &[Hazard],
    modes: &[&OperationalMode],
    situations: &[&OperationalSituation],
    policy: &FeasibilityPolicy,
    ratings: &BTreeMap<EventKey, Sec>,
) -> Result<Vec<HazardousEvent>, HaraError> {
    let mut events = Vec::new();
    let mut missing = Vec::new();
    for hazard in hazards {
        for mode in modes {
            for situation in situations {
                let key = EventKey {
                    hazard: hazard.id.clone(),
                    mode: mode.id.clone(),
                    situation: situation.id.clone(),
                };
                if !policy.admits(&key) {
                    continue;
                }
                match ratings.get(&key) {
                    Some(&rating) => events.push(HazardousEvent {
                        key,
                        perspective: hazard.perspective,
                        rating,
                    }),
                    None => missing.push(key),
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(HaraError::MissingRatings(missing));
    }
    events.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(events)
}

/// Partitions events into ASIL-rated safety goals.
///
/// Each merge group becomes one goal; events claimed by no group become
/// singleton goals. Goal ASIL is the maximum event ASIL over its members.
pub fn derive_goals(
    events: &[HazardousEvent],
    merge_groups: &BTreeMap<Ident, MergeGroup>,
    hazards: &[Hazard],
) -> Result<Vec<SafetyGoal>, HaraError> {
    let by_key: BTreeMap<&EventKey, &HazardousEvent> =
        events.iter().map(|e| (&e.key, e)).collect();
    let hazard_text: BTreeMap<&Ident, &str> =
        hazards.iter().map(|h| (&h.id, h.text.as_str())).collect();

    let mut claimed: BTreeMap<EventKey, Ident> = BTreeMap::new();
    let mut goals = Vec::new();

    for group in merge_groups.values() {
        let mut members: BTreeSet<EventKey> = BTreeSet::new();
        for hazard in &group.hazards {
            for event in events.iter().filter(|e| &e.key.hazard == hazard) {
                members.insert(event.key.clone());
            }
        }
        for key in &group.events {
            if !by_key.contains_key(key) {
                return Err(HaraError::UnknownMergeEvent {
                    group: group.id.clone(),
                    event: key.clone(),
                });
            }
            members.insert(key.clone());
        }
        if members.is_empty() {
            return Err(HaraError::EmptyGroup {
                group: group.id.clone(),
            });
        }
        for key in &members {
            if let Some(first) = claimed.get(key) {
                return Err(HaraError::EventInTwoGroups {
                    event: key.clone(),
                    first: first.clone(),
                    second: group.id.clone(),
                });
            }
            claimed.insert(key.clone(), group.id.clone());
        }

        let perspectives: BTreeSet<Perspective> = members
            .iter()
            .filter_map(|k| by_key.get(k).map(|e| e.perspective))
            .collect();
        if perspectives.len() > 1 {
            return Err(HaraError::MixedPerspectives {
                group: group.id.clone(),
            });
        }
        let perspective = perspectives.into_iter().next().expect("non-empty group");

        let asil = members
            .iter()
            .filter_map(|k| by_key.get(k))
            .map(|e| {
                AsilTable::rate(
                    e.rating.severity,
                    e.rating.exposure,
                    e.rating.controllability,
                )
            })
            .max()
            .expect("non-empty group");

        let (text, draft) = match &group.text {
            Some(text) => (text.clone(), false),
            None => {
                let first = members.iter().next().expect("non-empty group");
                let hazard = hazard_text
                    .get(&first.hazard)
                    .copied()
                    .unwrap_or("the hazard");
                (
                    format!(
                        "{hazard} shall be prevented across all covered operational modes and situations"
                    ),
                    true,
                )
            }
        };

        goals.push(SafetyGoal {
            id: group.id.clone(),
            text,
            draft,
            perspective,
            member_events: members,
            asil,
        });
    }

    // unmerged events become singleton goals
    let declared: BTreeSet<&Ident> = merge_groups.keys().collect();
    for event in events {
        if claimed.contains_key(&event.key) {
            continue;
        }
        let id = Ident::new(format!(
            "g_{}_{}_{}",
            event.key.hazard, event.key.mode, event.key.situation
        ));
        if declared.contains(&id) {
            return Err(HaraError::DuplicateGoalId { id });
        }
        let hazard = hazard_text
            .get(&event.key.hazard)
            .copied()
            .unwrap_or("the hazard");
        goals.push(SafetyGoal {
            id,
            text: format!(
                "{hazard} shall be prevented (mode: {}, situation: {})",
                event.key.mode, event.key.situation
            ),
            draft: true,
            perspective: event.perspective,
            member_events: BTreeSet::from([event.key.clone()]),
            asil: AsilTable::rate(
                event.rating.severity,
                event.rating.exposure,
                event.rating.controllability,
            ),
        });
    }

    goals.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(goals)
}

/// Output of the full HARA chain for both perspectives.
#[derive(Debug, Clone, PartialEq)]
pub struct HaraOutput {
    pub hazards: Vec<Hazard>,
    pub events: Vec<HazardousEvent>,
    pub goals: Vec<SafetyGoal>,
}

impl HaraOutput {
    pub fn hazards_for(&self, perspective: Perspective) -> impl Iterator<Item = &Hazard> {
        self.hazards
            .iter()
            .filter(move |h| h.perspective == perspective)
    }

    pub fn events_for(&self, perspective: Perspective) -> impl Iterator<Item = &HazardousEvent> {
        self.events
            .iter()
            .filter(move |e| e.perspective == perspective)
    }

    pub fn goals_for(&self, perspective: Perspective) -> impl Iterator<Item = &SafetyGoal> {
        self.goals
            .iter()
            .filter(move |g| g.perspective == perspective)
    }
}

/// Runs hazards -> events -> goals over both perspectives of a model.
pub fn run_hara(model: &Model) -> Result<HaraOutput, HaraError> {
    let hazards = generate_hazards(&model.functions, &model.hazard_decls)?;
    let mut events = Vec::new();
    for perspective in Perspective::ALL {
        let slice: Vec<Hazard> = hazards
            .iter()
            .filter(|h| h.perspective == perspective)
            .cloned()
            .collect();
        let policy = model.feasibility_policy(perspective);
        events.extend(enumerate_events(
            &slice,
            &model.modes_for(perspective),
            &model.situations_for(perspective),
            &policy,
            &model.ratings,
        )?);
    }
    events.sort_by(|a, b| a.key.cmp(&b.key));
    let goals = derive_goals(&events, &model.merge_groups, &hazards)?;
    Ok(HaraOutput {
        hazards,
        events,
        goals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::SourceSpan;
    use crate::model::{
        AsilRating, Controllability, Exposure, FeasibilityDefault, GuideWord, Scenario, Severity,
    };

    fn function(id: &str, perspective: Perspective, description: &str) -> SystemFunction {
        SystemFunction {
            id: id.into(),
            description: description.into(),
            perspective,
            scenario: Scenario::Base,
            span: SourceSpan::synthetic(),
        }
    }

    fn decl(id: &str, function: &str, gw: GuideWord, text: Option<&str>) -> HazardDecl {
        HazardDecl {
            id: id.into(),
            function: function.into(),
            guide_word: gw,
            text: text.map(str::to_string),
            span: SourceSpan::synthetic(),
        }
    }

    fn sec(s: u8, e: u8, c: u8) -> Sec {
        Sec {
            severity: Severity::new(s).unwrap(),
            exposure: Exposure::new(e).unwrap(),
            controllability: Controllability::new(c).unwrap(),
        }
    }

    fn mode(id: &str, perspective: Perspective) -> OperationalMode {
        OperationalMode {
            id: id.into(),
            name: id.into(),
            perspective,
            span: SourceSpan::synthetic(),
        }
    }

    fn situation(id: &str, perspective: Perspective) -> OperationalSituation {
        OperationalSituation {
            id: id.into(),
            name: id.into(),
            perspective,
            span: SourceSpan::synthetic(),
        }
    }

    #[test]
    fn guide_word_templating_marks_drafts() {
        let mut functions = BTreeMap::new();
        functions.insert(
            Ident::from("f"),
            function(
                "f",
                Perspective::Cooperative,
                "keep sufficiently safe inter-vehicular distance",
            ),
        );
        let decls = vec![
            decl("h_less", "f", GuideWord::Less, Some("keeping less than sufficiently safe inter-vehicular distance")),
            decl("h_no", "f", GuideWord::No, None),
        ];
        let hazards = generate_hazards(&functions, &decls).unwrap();
        assert_eq!(hazards.len(), 2);
        // sorted by (function, guide word): No before Less
        assert_eq!(hazards[0].id, Ident::from("h_no"));
        assert!(hazards[0].draft);
        assert_eq!(
            hazards[0].text,
            "no keep sufficiently safe inter-vehicular distance"
        );
        assert!(!hazards[1].draft);
        assert_eq!(
            hazards[1].text,
            "keeping less than sufficiently safe inter-vehicular distance"
        );
    }

    #[test]
    fn unknown_function_is_an_error() {
        let functions = BTreeMap::new();
        let decls = vec![decl("h", "missing", GuideWord::No, None)];
        assert!(matches!(
            generate_hazards(&functions, &decls),
            Err(HaraError::UnknownFunction { .. })
        ));
    }

    #[test]
    fn empty_applicability_yields_no_hazards() {
        let mut functions = BTreeMap::new();
        functions.insert(
            Ident::from("f"),
            function("f", Perspective::Vehicular, "drive"),
        );
        let hazards = generate_hazards(&functions, &[]).unwrap();
        assert!(hazards.is_empty());
    }

    fn one_hazard() -> Vec<Hazard> {
        vec![Hazard {
            id: "h".into(),
            function: "f".into(),
            guide_word: GuideWord::No,
            text: "no driving".into(),
            draft: true,
            perspective: Perspective::Vehicular,
        }]
    }

    #[test]
    fn singleton_product_yields_one_event() {
        let hazards = one_hazard();
        let m = mode("m", Perspective::Vehicular);
        let s = situation("s", Perspective::Vehicular);
        let policy = FeasibilityPolicy {
            default: FeasibilityDefault::Feasible,
            exceptions: BTreeSet::new(),
        };
        let mut ratings = BTreeMap::new();
        ratings.insert(
            EventKey {
                hazard: "h".into(),
                mode: "m".into(),
                situation: "s".into(),
            },
            sec(3, 4, 3),
        );
        let events = enumerate_events(&hazards, &[&m], &[&s], &policy, &ratings).unwrap();
        assert_eq!(events.len(), 1);
    }

    #[test]
    fn infeasible_default_with_no_exceptions_yields_no_events() {
        let hazards = one_hazard();
        let m = mode("m", Perspective::Vehicular);
        let s = situation("s", Perspective::Vehicular);
        let policy = FeasibilityPolicy {
            default: FeasibilityDefault::Infeasible,
            exceptions: BTreeSet::new(),
        };
        let events = enumerate_events(&hazards, &[&m], &[&s], &policy, &BTreeMap::new()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn missing_ratings_are_listed() {
        let hazards = one_hazard();
        let m = mode("m", Perspective::Vehicular);
        let s = situation("s", Perspective::Vehicular);
        let policy = FeasibilityPolicy {
            default: FeasibilityDefault::Feasible,
            exceptions: BTreeSet::new(),
        };
        let err = enumerate_events(&hazards, &[&m], &[&s], &policy, &BTreeMap::new()).unwrap_err();
        match err {
            HaraError::MissingRatings(keys) => assert_eq!(keys.len(), 1),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn singleton_goal_inherits_event_asil() {
        let events = vec![HazardousEvent {
            key: EventKey {
                hazard: "h".into(),
                mode: "m".into(),
                situation: "s".into(),
            },
            perspective: Perspective::Vehicular,
            rating: sec(3, 4, 3),
        }];
        let goals = derive_goals(&events, &BTreeMap::new(), &one_hazard()).unwrap();
        assert_eq!(goals.len(), 1);
        assert_eq!(goals[0].asil, AsilRating::D);
        assert!(goals[0].draft);
        assert_eq!(goals[0].member_events.len(), 1);
    }

    #[test]
    fn merge_group_takes_max_asil() {
        let key = |m: &str| EventKey {
            hazard: "h".into(),
            mode: m.into(),
            situation: "s".into(),
        };
        let events = vec![
            HazardousEvent {
                key: key("m1"),
                perspective: Perspective::Vehicular,
                rating: sec(2, 3, 2), // A
            },
            HazardousEvent {
                key: key("m2"),
                perspective: Perspective::Vehicular,
                rating: sec(3, 4, 3), // D
            },
        ];
        let mut groups = BTreeMap::new();
        groups.insert(
            Ident::from("g"),
            MergeGroup {
                id: "g".into(),
                text: Some("a goal".into()),
                hazards: vec!["h".into()],
                events: vec![],
                span: SourceSpan::synthetic(),
            },
        );
        let goals = derive_goals(&events, &groups, &one_hazard()).unwrap();
        assert_eq!(goals.len(), 1);
        assert_eq!(goals[0].asil, AsilRating::D);
        assert_eq!(goals[0].member_events.len(), 2);
        assert!(!goals[0].draft);
    }

    #[test]
    fn event_in_two_groups_is_an_error() {
        let events = vec![HazardousEvent {
            key: EventKey {
                hazard: "h".into(),
                mode: "m".into(),
                situation: "s".into(),
            },
            perspective: Perspective::Vehicular,
            rating: sec(1, 1, 1),
        }];
        let mut groups = BTreeMap::new();
        for id in ["g1", "g2"] {
            groups.insert(
                Ident::from(id),
                MergeGroup {
                    id: id.into(),
                    text: None,
                    hazards: vec!["h".into()],
                    events: vec![],
                    span: SourceSpan::synthetic(),
                },
            );
        }
        assert!(matches!(
            derive_goals(&events, &groups, &one_hazard()),
            Err(HaraError::EventInTwoGroups { .. })
        ));
    }

    #[test]
    fn mixed_perspective_group_is_an_error() {
        let mut hazards = one_hazard();
        hazards.push(Hazard {
            id: "hc".into(),
            function: "fc".into(),
            guide_word: GuideWord::No,
            text: "no platooning".into(),
            draft: true,
            perspective: Perspective::Cooperative,
        });
        let events = vec![
            HazardousEvent {
                key: EventKey {
                    hazard: "h".into(),
                    mode: "m".into(),
                    situation: "s".into(),
                },
                perspective: Perspective::Vehicular,
                rating: sec(1, 1, 1),
            },
            HazardousEvent {
                key: EventKey {
                    hazard: "hc".into(),
                    mode: "mc".into(),
                    situation: "sc".into(),
                },
                perspective: Perspective::Cooperative,
                rating: sec(1, 1, 1),
            },
        ];
        let mut groups = BTreeMap::new();
        groups.insert(
            Ident::from("g"),
            MergeGroup {
                id: "g".into(),
                text: None,
                hazards: vec!["h".into(), "hc".into()],
                events: vec![],
                span: SourceSpan::synthetic(),
            },
        );
        assert!(matches!(
            derive_goals(&events, &groups, &hazards),
            Err(HaraError::MixedPerspectives { .. })
        ));
    }
}
