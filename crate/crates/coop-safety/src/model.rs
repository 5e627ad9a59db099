//! Domain types shared across the assessment pipeline.
//!
//! The model is the validated universe of declared entities: items and their
//! functional architectures, system functions, hazards, operational modes and
//! situations, the feasibility matrix, event ratings, the goal-merge map,
//! fault trees, requirement annotations, and the technical architecture.
//! Everything is immutable after validation and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::dsl::SourceSpan;

/// Identifier for any named entity (`[a-z][a-z0-9_]*`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Ident(pub String);

impl Ident {
    pub fn new(s: impl Into<String>) -> Self {
        Ident(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether `s` is a well-formed identifier.
    pub fn is_valid(s: &str) -> bool {
        let mut chars = s.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident(s.to_string())
    }
}

/// The unit under analysis: each hazard, goal, and FSR belongs to exactly one
/// perspective and the two analyses never interact before safety analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    Vehicular,
    Cooperative,
}

impl Perspective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Perspective::Vehicular => "vehicular",
            Perspective::Cooperative => "cooperative",
        }
    }

    pub const ALL: [Perspective; 2] = [Perspective::Vehicular, Perspective::Cooperative];
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    VehicleType,
    CooperativeSystem,
}

/// An analysis item: one per vehicle type plus one for the cooperative system.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: Ident,
    pub kind: ItemKind,
    pub span: SourceSpan,
}

/// A black-box functional component, the allocation target for FSRs.
///
/// Components of the cooperative item either reference a vehicle component by
/// id (`vehicle_ref`) or are declared external actors (e.g. the cloud).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalComponent {
    pub id: Ident,
    pub name: String,
    pub class: Option<Ident>,
    pub item: Ident,
    pub vehicle_ref: Option<Ident>,
    pub external: bool,
    pub span: SourceSpan,
}

/// Directed data flow between two components of the same item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Flow {
    pub from: Ident,
    pub to: Ident,
}

/// Scenario a function was decomposed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Base,
    Sc1,
    Sc2,
    Sc3,
    Sc4,
    Sc5,
}

impl Scenario {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "base" => Scenario::Base,
            "sc1" => Scenario::Sc1,
            "sc2" => Scenario::Sc2,
            "sc3" => Scenario::Sc3,
            "sc4" => Scenario::Sc4,
            "sc5" => Scenario::Sc5,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Base => "base",
            Scenario::Sc1 => "sc1",
            Scenario::Sc2 => "sc2",
            Scenario::Sc3 => "sc3",
            Scenario::Sc4 => "sc4",
            Scenario::Sc5 => "sc5",
        }
    }
}

/// A function extracted from the scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFunction {
    pub id: Ident,
    pub description: String,
    pub perspective: Perspective,
    pub scenario: Scenario,
    pub span: SourceSpan,
}

/// The seven guide words applied to functions during hazard identification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuideWord {
    No,
    More,
    Less,
    AsWellAs,
    PartOf,
    Reverse,
    OtherThan,
}

impl GuideWord {
    pub const ALL: [GuideWord; 7] = [
        GuideWord::No,
        GuideWord::More,
        GuideWord::Less,
        GuideWord::AsWellAs,
        GuideWord::PartOf,
        GuideWord::Reverse,
        GuideWord::OtherThan,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "no" => GuideWord::No,
            "more" => GuideWord::More,
            "less" => GuideWord::Less,
            "as_well_as" => GuideWord::AsWellAs,
            "part_of" => GuideWord::PartOf,
            "reverse" => GuideWord::Reverse,
            "other_than" => GuideWord::OtherThan,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GuideWord::No => "no",
            GuideWord::More => "more",
            GuideWord::Less => "less",
            GuideWord::AsWellAs => "as_well_as",
            GuideWord::PartOf => "part_of",
            GuideWord::Reverse => "reverse",
            GuideWord::OtherThan => "other_than",
        }
    }

    /// Phrase used when templating a draft hazard text.
    pub fn phrase(&self) -> &'static str {
        match self {
            GuideWord::No => "no",
            GuideWord::More => "more",
            GuideWord::Less => "less",
            GuideWord::AsWellAs => "as well as",
            GuideWord::PartOf => "part of",
            GuideWord::Reverse => "reverse",
            GuideWord::OtherThan => "other than",
        }
    }
}

/// A declared (function, guide word) pairing, optionally with authored text.
///
/// Declarations are the guide-word applicability matrix; the HARA engine
/// materialises them into [`Hazard`]s, templating text where none is authored.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardDecl {
    pub id: Ident,
    pub function: Ident,
    pub guide_word: GuideWord,
    pub text: Option<String>,
    pub span: SourceSpan,
}

/// A materialised hazard. `draft` marks mechanically templated text.
#[derive(Debug, Clone, PartialEq)]
pub struct Hazard {
    pub id: Ident,
    pub function: Ident,
    pub guide_word: GuideWord,
    pub text: String,
    pub draft: bool,
    pub perspective: Perspective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationalMode {
    pub id: Ident,
    pub name: String,
    pub perspective: Perspective,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationalSituation {
    pub id: Ident,
    pub name: String,
    pub perspective: Perspective,
    pub span: SourceSpan,
}

macro_rules! bounded_index {
    ($name:ident, $prefix:literal, $max:literal) => {
        /// Bounded classification index.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u8);

        impl $name {
            pub const MAX: u8 = $max;

            pub fn new(value: u8) -> Option<Self> {
                (value <= $max).then_some(Self(value))
            }

            pub fn value(&self) -> u8 {
                self.0
            }

            /// Parses the `s0`/`e4`/`c3` token form.
            pub fn parse(s: &str) -> Option<Self> {
                let rest = s.strip_prefix($prefix)?;
                let value: u8 = rest.parse().ok()?;
                Self::new(value)
            }

            pub fn all() -> impl Iterator<Item = Self> {
                (0..=$max).map(Self)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $prefix.to_uppercase(), self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    };
}

bounded_index!(Severity, "s", 3);
bounded_index!(Exposure, "e", 4);
bounded_index!(Controllability, "c", 3);

/// Severity/exposure/controllability rating of one hazardous event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sec {
    pub severity: Severity,
    pub exposure: Exposure,
    pub controllability: Controllability,
}

/// Key of a hazardous event: the (hazard, mode, situation) triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKey {
    pub hazard: Ident,
    pub mode: Ident,
    pub situation: Ident,
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.hazard, self.mode, self.situation)
    }
}

/// A feasible (hazard, operational mode, operational situation) triple with
/// its S/E/C rating.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardousEvent {
    pub key: EventKey,
    pub perspective: Perspective,
    pub rating: Sec,
}

/// Automotive Safety Integrity Level with the total order QM < A < B < C < D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AsilRating {
    Qm,
    A,
    B,
    C,
    D,
}

impl AsilRating {
    pub const ALL: [AsilRating; 5] = [
        AsilRating::Qm,
        AsilRating::A,
        AsilRating::B,
        AsilRating::C,
        AsilRating::D,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AsilRating::Qm => "QM",
            AsilRating::A => "A",
            AsilRating::B => "B",
            AsilRating::C => "C",
            AsilRating::D => "D",
        }
    }
}

impl fmt::Display for AsilRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for AsilRating {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// An ASIL-rated safety goal covering one or more hazardous events.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyGoal {
    pub id: Ident,
    pub text: String,
    pub draft: bool,
    pub perspective: Perspective,
    pub member_events: BTreeSet<EventKey>,
    pub asil: AsilRating,
}

/// Requirement expression in disjunctive normal form: the FSR is satisfiable
/// by any one alternative, each a set of capability tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RequirementDnf {
    pub alternatives: Vec<BTreeSet<Ident>>,
}

impl RequirementDnf {
    /// Union of all atoms across alternatives.
    pub fn atoms(&self) -> BTreeSet<Ident> {
        self.alternatives.iter().flatten().cloned().collect()
    }
}

/// A functional safety requirement allocated to exactly one component.
#[derive(Debug, Clone, PartialEq)]
pub struct Fsr {
    pub id: Ident,
    pub text: String,
    pub draft: bool,
    pub component: Ident,
    pub failure_mode: Ident,
    pub perspective: Perspective,
    pub source_goals: BTreeSet<Ident>,
    pub asil: AsilRating,
    pub trigger: Ident,
    pub response_class: Ident,
    pub requirement: RequirementDnf,
    pub conflicts_with: BTreeSet<(Ident, Ident)>,
}

/// Authored annotation keyed by (component, failure mode); attaches the
/// controlled trigger/response tags and the capability requirement to the
/// FSR derived for that basic event.
#[derive(Debug, Clone, PartialEq)]
pub struct FsrAnnotation {
    pub component: Ident,
    pub failure_mode: Ident,
    pub trigger: Ident,
    pub response_class: Ident,
    pub requirement: RequirementDnf,
    pub text: Option<String>,
    pub conflicts_with: BTreeSet<(Ident, Ident)>,
    pub span: SourceSpan,
}

/// Gate tree of a fault tree after subtree references are resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    And(Vec<Gate>),
    Or(Vec<Gate>),
    Basic { component: Ident, failure_mode: Ident },
}

impl Gate {
    /// All (component, failure mode) basic events in the subtree.
    pub fn basic_events(&self) -> BTreeSet<(Ident, Ident)> {
        let mut out = BTreeSet::new();
        self.collect_basics(&mut out);
        out
    }

    fn collect_basics(&self, out: &mut BTreeSet<(Ident, Ident)>) {
        match self {
            Gate::And(children) | Gate::Or(children) => {
                for child in children {
                    child.collect_basics(out);
                }
            }
            Gate::Basic {
                component,
                failure_mode,
            } => {
                out.insert((component.clone(), failure_mode.clone()));
            }
        }
    }
}

/// A fault tree; trees without a goal serve as reusable subtrees only.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultTree {
    pub id: Ident,
    pub goal: Option<Ident>,
    pub root: Gate,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityDefault {
    Feasible,
    Infeasible,
}

/// Declared feasibility matrix: one model-wide default plus explicit
/// exception triples (spans kept for diagnostics).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityDecl {
    pub default: Option<FeasibilityDefault>,
    pub feasible: BTreeMap<EventKey, SourceSpan>,
    pub infeasible: BTreeMap<EventKey, SourceSpan>,
}

/// The per-perspective slice the HARA engine evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityPolicy {
    pub default: FeasibilityDefault,
    pub exceptions: BTreeSet<EventKey>,
}

impl FeasibilityPolicy {
    pub fn admits(&self, key: &EventKey) -> bool {
        match self.default {
            FeasibilityDefault::Feasible => !self.exceptions.contains(key),
            FeasibilityDefault::Infeasible => self.exceptions.contains(key),
        }
    }
}

/// One group of the goal-merge map. Members are resolved against the
/// enumerated events when goals are derived; `hazards` entries pull in every
/// feasible event of a hazard, `events` entries name single triples.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeGroup {
    pub id: Ident,
    pub text: Option<String>,
    pub hazards: Vec<Ident>,
    pub events: Vec<EventKey>,
    pub span: SourceSpan,
}

/// A runtime component of the technical software architecture with its
/// implemented-tactic inventory.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalComponent {
    pub id: Ident,
    pub realizes: Ident,
    pub implemented_tactics: BTreeMap<Ident, String>,
    pub linked_mechanisms: BTreeSet<Ident>,
    pub span: SourceSpan,
}

/// The validated model: every cross-reference resolves, all invariants hold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub items: BTreeMap<Ident, Item>,
    pub components: BTreeMap<Ident, FunctionalComponent>,
    pub flows: Vec<Flow>,
    pub functions: BTreeMap<Ident, SystemFunction>,
    pub hazard_decls: Vec<HazardDecl>,
    pub modes: BTreeMap<(Perspective, Ident), OperationalMode>,
    pub situations: BTreeMap<(Perspective, Ident), OperationalSituation>,
    pub feasibility: FeasibilityDecl,
    pub ratings: BTreeMap<EventKey, Sec>,
    pub merge_groups: BTreeMap<Ident, MergeGroup>,
    pub trees: BTreeMap<Ident, FaultTree>,
    pub tech_components: BTreeMap<Ident, TechnicalComponent>,
    pub annotations: BTreeMap<(Ident, Ident), FsrAnnotation>,
}

impl Model {
    /// Hazard declarations of one perspective, ordered (function, guide word).
    pub fn hazard_decls_for(&self, perspective: Perspective) -> Vec<&HazardDecl> {
        let mut decls: Vec<&HazardDecl> = self
            .hazard_decls
            .iter()
            .filter(|d| {
                self.functions
                    .get(&d.function)
                    .map(|f| f.perspective == perspective)
                    .unwrap_or(false)
            })
            .collect();
        decls.sort_by_key(|d| (d.function.clone(), d.guide_word));
        decls
    }

    pub fn functions_for(&self, perspective: Perspective) -> Vec<&SystemFunction> {
        self.functions
            .values()
            .filter(|f| f.perspective == perspective)
            .collect()
    }

    pub fn modes_for(&self, perspective: Perspective) -> Vec<&OperationalMode> {
        self.modes
            .values()
            .filter(|m| m.perspective == perspective)
            .collect()
    }

    pub fn situations_for(&self, perspective: Perspective) -> Vec<&OperationalSituation> {
        self.situations
            .values()
            .filter(|s| s.perspective == perspective)
            .collect()
    }

    /// Perspective of a hazard declaration, via its function.
    pub fn hazard_perspective(&self, hazard: &Ident) -> Option<Perspective> {
        let decl = self.hazard_decls.iter().find(|d| &d.id == hazard)?;
        self.functions.get(&decl.function).map(|f| f.perspective)
    }

    /// The feasibility policy slice for one perspective. Without an explicit
    /// `feasibility_default` declaration every combination is admitted.
    pub fn feasibility_policy(&self, perspective: Perspective) -> FeasibilityPolicy {
        let default = self
            .feasibility
            .default
            .unwrap_or(FeasibilityDefault::Feasible);
        let source = match default {
            FeasibilityDefault::Feasible => &self.feasibility.infeasible,
            FeasibilityDefault::Infeasible => &self.feasibility.feasible,
        };
        let exceptions = source
            .keys()
            .filter(|k| self.hazard_perspective(&k.hazard) == Some(perspective))
            .cloned()
            .collect();
        FeasibilityPolicy {
            default,
            exceptions,
        }
    }

    /// Trees analysed for a given goal.
    pub fn trees_for_goal(&self, goal: &Ident) -> Vec<&FaultTree> {
        self.trees
            .values()
            .filter(|t| t.goal.as_ref() == Some(goal))
            .collect()
    }
}

/// Returns the maximum ASIL over a non-empty iterator, `None` when empty.
pub fn max_asil<I: IntoIterator<Item = AsilRating>>(ratings: I) -> Option<AsilRating> {
    ratings.into_iter().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asil_order_is_total() {
        use AsilRating::*;
        assert!(Qm < A && A < B && B < C && C < D);
        assert_eq!(max_asil([A, D, Qm]), Some(D));
        assert_eq!(max_asil::<[AsilRating; 0]>([]), None);
        // max is associative: max(max(a,b),c) == max(a,max(b,c))
        for &a in &AsilRating::ALL {
            for &b in &AsilRating::ALL {
                for &c in &AsilRating::ALL {
                    assert_eq!(a.max(b).max(c), a.max(b.max(c)));
                }
            }
        }
    }

    #[test]
    fn bounded_indices_reject_out_of_range() {
        assert!(Severity::new(3).is_some());
        assert!(Severity::new(4).is_none());
        assert!(Exposure::new(4).is_some());
        assert!(Exposure::new(5).is_none());
        assert!(Controllability::parse("c3").is_some());
        assert!(Controllability::parse("c4").is_none());
        assert!(Severity::parse("e2").is_none());
        assert_eq!(Severity::parse("s2").unwrap().value(), 2);
        assert_eq!(format!("{}", Exposure::new(4).unwrap()), "E4");
    }

    #[test]
    fn guide_word_round_trip() {
        for gw in GuideWord::ALL {
            assert_eq!(GuideWord::parse(gw.as_str()), Some(gw));
        }
        assert_eq!(GuideWord::parse("none"), None);
        assert_eq!(GuideWord::AsWellAs.phrase(), "as well as");
    }

    #[test]
    fn ident_validity() {
        assert!(Ident::is_valid("vehicle_control"));
        assert!(Ident::is_valid("x"));
        assert!(!Ident::is_valid("Vehicle"));
        assert!(!Ident::is_valid("2x"));
        assert!(!Ident::is_valid(""));
        assert!(!Ident::is_valid("a-b"));
    }

    #[test]
    fn feasibility_policy_defaults() {
        let all = FeasibilityPolicy {
            default: FeasibilityDefault::Feasible,
            exceptions: BTreeSet::new(),
        };
        let none = FeasibilityPolicy {
            default: FeasibilityDefault::Infeasible,
            exceptions: BTreeSet::new(),
        };
        let key = EventKey {
            hazard: "h".into(),
            mode: "m".into(),
            situation: "s".into(),
        };
        assert!(all.admits(&key));
        assert!(!none.admits(&key));
    }
}
