//! Lowering: raw entries from all input files into one validated [`Model`].
//!
//! Lowering is order-independent across files: entities land in canonically
//! ordered maps, so shuffling file order never changes the resulting model.
//! Reference failures drop the offending entity after reporting, keeping the
//! partial model consistent for later checks.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::raw::{parse_raw, RawEntry, RawValue};
use super::{has_errors, Diagnostic, DiagnosticCode, SourceFile, SourceSpan};
use crate::catalog::Catalog;
use crate::model::{
    Controllability, EventKey, Exposure, FeasibilityDecl, FeasibilityDefault, Flow,
    FsrAnnotation, FunctionalComponent, FaultTree, Gate, GuideWord, HazardDecl, Ident, Item,
    ItemKind, MergeGroup, Model, OperationalMode, OperationalSituation, Perspective,
    RequirementDnf, Scenario, Sec, Severity, SystemFunction, TechnicalComponent,
};

const MODEL_KINDS: &[&str] = &[
    "item",
    "component",
    "flow",
    "function",
    "mode",
    "situation",
    "feasibility_default",
    "feasible",
    "infeasible",
    "hazard",
    "event_rating",
    "merge_goal",
    "tree",
    "tech_component",
    "implements_tactic",
    "fsr_annotation",
];

const CATALOG_KINDS: &[&str] = &["tactic", "pattern", "exclusive"];

/// Parses model files against a catalog. Returns the model only when no
/// error-severity diagnostic was produced; warnings may accompany a model.
pub fn parse_model(
    files: &[SourceFile],
    catalog: &Catalog,
) -> (Option<Model>, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut entries = Vec::new();
    for file in files {
        entries.extend(parse_raw(file, &mut diagnostics));
    }

    let mut lowerer = Lowerer {
        catalog,
        model: Model::default(),
    };
    lowerer.lower(&entries, &mut diagnostics);
    let model = lowerer.model;

    diagnostics.extend(validate_model(&model));
    if !has_errors(&diagnostics) {
        check_rating_completeness(&model, &mut diagnostics);
    }

    if has_errors(&diagnostics) {
        (None, diagnostics)
    } else {
        (Some(model), diagnostics)
    }
}

struct Lowerer<'a> {
    catalog: &'a Catalog,
    model: Model,
}

impl<'a> Lowerer<'a> {
    fn lower(&mut self, entries: &[RawEntry], diags: &mut Vec<Diagnostic>) {
        let by_kind = |kind: &str| entries.iter().filter(move |e| e.key == kind);

        for entry in entries {
            if CATALOG_KINDS.contains(&entry.key.as_str()) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::WrongSection,
                    format!(
                        "`{}` blocks belong in the catalog file, not in model files",
                        entry.key
                    ),
                    entry.key_span.clone(),
                ));
            } else if !MODEL_KINDS.contains(&entry.key.as_str()) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::UnknownKind,
                    format!("unknown declaration kind `{}`", entry.key),
                    entry.key_span.clone(),
                ));
            }
        }

        for entry in by_kind("item") {
            self.lower_item(entry, diags);
        }
        // components resolve `ref` targets against each other: declare first
        let component_entries: Vec<&RawEntry> = by_kind("component").collect();
        for entry in &component_entries {
            self.declare_component(entry, diags);
        }
        for entry in &component_entries {
            self.resolve_component_ref(entry, diags);
        }
        for entry in by_kind("flow") {
            self.lower_flow(entry, diags);
        }
        for entry in by_kind("function") {
            self.lower_function(entry, diags);
        }
        for entry in by_kind("hazard") {
            self.lower_hazard(entry, diags);
        }
        self.model
            .hazard_decls
            .sort_by_key(|d| (d.function.clone(), d.guide_word));
        for entry in by_kind("mode") {
            self.lower_mode_or_situation(entry, true, diags);
        }
        for entry in by_kind("situation") {
            self.lower_mode_or_situation(entry, false, diags);
        }
        for entry in by_kind("feasibility_default") {
            self.lower_feasibility_default(entry, diags);
        }
        for entry in by_kind("feasible") {
            self.lower_feasibility_line(entry, true, diags);
        }
        for entry in by_kind("infeasible") {
            self.lower_feasibility_line(entry, false, diags);
        }
        self.warn_redundant_feasibility(diags);
        for entry in by_kind("event_rating") {
            self.lower_event_rating(entry, diags);
        }
        for entry in by_kind("merge_goal") {
            self.lower_merge_goal(entry, diags);
        }
        self.lower_trees(&by_kind("tree").collect::<Vec<_>>(), diags);
        let tech_entries: Vec<&RawEntry> = by_kind("tech_component").collect();
        for entry in &tech_entries {
            self.lower_tech_component(entry, diags);
        }
        self.resolve_tech_links(diags);
        for entry in by_kind("implements_tactic") {
            self.lower_implements_tactic(entry, diags);
        }
        for entry in by_kind("fsr_annotation") {
            self.lower_fsr_annotation(entry, diags);
        }
    }

    // -- shared helpers ----------------------------------------------------

    fn block_body<'e>(
        &self,
        entry: &'e RawEntry,
        diags: &mut Vec<Diagnostic>,
    ) -> Option<&'e [RawEntry]> {
        match &entry.body {
            Some(body) => Some(body),
            None => {
                diags.push(Diagnostic::error(
                    DiagnosticCode::Syntax,
                    format!("`{}` requires a block body", entry.key),
                    entry.key_span.clone(),
                ));
                None
            }
        }
    }

    fn block_id(&self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) -> Option<(Ident, SourceSpan)> {
        match &entry.name {
            Some(value) if Ident::is_valid(&value.text) => {
                Some((Ident::new(value.text.clone()), value.span.clone()))
            }
            Some(value) => {
                diags.push(Diagnostic::error(
                    DiagnosticCode::BadValue,
                    format!("`{}` is not a valid identifier", value.text),
                    value.span.clone(),
                ));
                None
            }
            None => {
                diags.push(Diagnostic::error(
                    DiagnosticCode::MissingField,
                    format!("`{}` block requires a quoted identifier name", entry.key),
                    entry.key_span.clone(),
                ));
                None
            }
        }
    }

    fn ident_value(value: &RawValue, diags: &mut Vec<Diagnostic>) -> Option<Ident> {
        if Ident::is_valid(&value.text) {
            Some(Ident::new(value.text.clone()))
        } else {
            diags.push(Diagnostic::error(
                DiagnosticCode::BadValue,
                format!("`{}` is not a valid identifier", value.text),
                value.span.clone(),
            ));
            None
        }
    }

    fn expect_values<'e>(
        entry: &'e RawEntry,
        count: usize,
        diags: &mut Vec<Diagnostic>,
    ) -> Option<&'e [RawValue]> {
        if entry.values.len() == count {
            Some(&entry.values)
        } else {
            diags.push(Diagnostic::error(
                DiagnosticCode::BadValue,
                format!(
                    "`{}` expects {count} value(s), found {}",
                    entry.key,
                    entry.values.len()
                ),
                entry.key_span.clone(),
            ));
            None
        }
    }

    fn unknown_key(entry: &RawEntry, context: &str, diags: &mut Vec<Diagnostic>) {
        diags.push(Diagnostic::error(
            DiagnosticCode::UnknownKey,
            format!("unknown key `{}` in {context} block", entry.key),
            entry.key_span.clone(),
        ));
    }

    /// Resolves a (hazard, mode, situation) value triple, checking each part
    /// within the hazard's perspective.
    fn resolve_triple(
        &self,
        values: &[RawValue],
        diags: &mut Vec<Diagnostic>,
    ) -> Option<(EventKey, Perspective)> {
        let hazard = Ident::new(values[0].text.clone());
        let Some(perspective) = self.model.hazard_perspective(&hazard) else {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownHazard,
                format!("unknown hazard `{hazard}`"),
                values[0].span.clone(),
            ));
            return None;
        };
        let mode = Ident::new(values[1].text.clone());
        if !self.model.modes.contains_key(&(perspective, mode.clone())) {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownMode,
                format!("unknown {perspective} mode `{mode}`"),
                values[1].span.clone(),
            ));
            return None;
        }
        let situation = Ident::new(values[2].text.clone());
        if !self
            .model
            .situations
            .contains_key(&(perspective, situation.clone()))
        {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownSituation,
                format!("unknown {perspective} situation `{situation}`"),
                values[2].span.clone(),
            ));
            return None;
        }
        Some((
            EventKey {
                hazard,
                mode,
                situation,
            },
            perspective,
        ))
    }

    // -- per-kind lowering -------------------------------------------------

    fn lower_item(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        if self.model.items.contains_key(&id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate item id `{id}`"),
                id_span,
            ));
            return;
        }
        let mut kind = None;
        for item in body {
            match item.key.as_str() {
                "kind" => {
                    if let Some(values) = Self::expect_values(item, 1, diags) {
                        kind = match values[0].text.as_str() {
                            "vehicle_type" => Some(ItemKind::VehicleType),
                            "cooperative_system" => Some(ItemKind::CooperativeSystem),
                            other => {
                                diags.push(Diagnostic::error(
                                    DiagnosticCode::BadValue,
                                    format!("item kind must be `vehicle_type` or `cooperative_system`, found `{other}`"),
                                    values[0].span.clone(),
                                ));
                                None
                            }
                        };
                    }
                }
                _ => Self::unknown_key(item, "item", diags),
            }
        }
        let Some(kind) = kind else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("item `{id}` is missing its `kind`"),
                entry.key_span.clone(),
            ));
            return;
        };
        self.model.items.insert(
            id.clone(),
            Item {
                id,
                kind,
                span: entry.key_span.clone(),
            },
        );
    }

    fn declare_component(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        if self.model.components.contains_key(&id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate component id `{id}`"),
                id_span,
            ));
            return;
        }
        let mut item = None;
        let mut name = None;
        let mut class = None;
        let mut external = false;
        for field in body {
            match field.key.as_str() {
                "item" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let target = Ident::new(values[0].text.clone());
                        if self.model.items.contains_key(&target) {
                            item = Some(target);
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownRef,
                                format!("unknown item `{target}`"),
                                values[0].span.clone(),
                            ));
                        }
                    }
                }
                "name" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        name = Some(values[0].text.clone());
                    }
                }
                "class" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        class = Self::ident_value(&values[0], diags);
                    }
                }
                "ref" => {} // second pass
                "external" => external = true,
                _ => Self::unknown_key(field, "component", diags),
            }
        }
        let Some(item) = item else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("component `{id}` is missing its `item`"),
                entry.key_span.clone(),
            ));
            return;
        };
        self.model.components.insert(
            id.clone(),
            FunctionalComponent {
                name: name.unwrap_or_else(|| id.as_str().replace('_', " ")),
                id,
                class,
                item,
                vehicle_ref: None,
                external,
                span: entry.key_span.clone(),
            },
        );
    }

    fn resolve_component_ref(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(name) = &entry.name else { return };
        let id = Ident::new(name.text.clone());
        let Some(body) = &entry.body else { return };
        for field in body.iter().filter(|f| f.key == "ref") {
            let Some(values) = Self::expect_values(field, 1, diags) else {
                continue;
            };
            let target = Ident::new(values[0].text.clone());
            if !self.model.components.contains_key(&target) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::UnknownComponent,
                    format!("unknown component `{target}` referenced by `{id}`"),
                    values[0].span.clone(),
                ));
                continue;
            }
            if let Some(component) = self.model.components.get_mut(&id) {
                if component.vehicle_ref.is_some() {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::DupEntry,
                        format!("component `{id}` declares more than one `ref`"),
                        field.key_span.clone(),
                    ));
                } else {
                    component.vehicle_ref = Some(target);
                }
            }
        }
    }

    fn lower_flow(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(values) = Self::expect_values(entry, 2, diags) else {
            return;
        };
        let mut endpoints = Vec::new();
        for value in values {
            let id = Ident::new(value.text.clone());
            if self.model.components.contains_key(&id) {
                endpoints.push(id);
            } else {
                diags.push(Diagnostic::error(
                    DiagnosticCode::UnknownComponent,
                    format!("unknown component `{id}` in flow"),
                    value.span.clone(),
                ));
            }
        }
        if let [from, to] = endpoints.as_slice() {
            let flow = Flow {
                from: from.clone(),
                to: to.clone(),
            };
            if !self.model.flows.contains(&flow) {
                self.model.flows.push(flow);
                self.model.flows.sort();
            }
        }
    }

    fn lower_function(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        if self.model.functions.contains_key(&id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate function id `{id}`"),
                id_span,
            ));
            return;
        }
        let mut perspective = None;
        let mut description = None;
        let mut scenario = Scenario::Base;
        for field in body {
            match field.key.as_str() {
                "perspective" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        perspective = parse_perspective(&values[0], diags);
                    }
                }
                "description" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        if values[0].text.trim().is_empty() {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::EmptyText,
                                format!("function `{id}` has an empty description"),
                                values[0].span.clone(),
                            ));
                        } else {
                            description = Some(values[0].text.clone());
                        }
                    }
                }
                "scenario" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        match Scenario::parse(&values[0].text) {
                            Some(s) => scenario = s,
                            None => diags.push(Diagnostic::error(
                                DiagnosticCode::BadValue,
                                format!(
                                    "scenario must be `base` or `sc1`..`sc5`, found `{}`",
                                    values[0].text
                                ),
                                values[0].span.clone(),
                            )),
                        }
                    }
                }
                _ => Self::unknown_key(field, "function", diags),
            }
        }
        let Some(perspective) = perspective else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("function `{id}` is missing its `perspective`"),
                entry.key_span.clone(),
            ));
            return;
        };
        let Some(description) = description else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("function `{id}` is missing its `description`"),
                entry.key_span.clone(),
            ));
            return;
        };
        self.model.functions.insert(
            id.clone(),
            SystemFunction {
                id,
                description,
                perspective,
                scenario,
                span: entry.key_span.clone(),
            },
        );
    }

    fn lower_hazard(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        let mut function = None;
        let mut guide_word = None;
        let mut text = None;
        for field in body {
            match field.key.as_str() {
                "function" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let target = Ident::new(values[0].text.clone());
                        if self.model.functions.contains_key(&target) {
                            function = Some(target);
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownFunction,
                                format!("unknown function `{target}`"),
                                values[0].span.clone(),
                            ));
                        }
                    }
                }
                "guide_word" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        match GuideWord::parse(&values[0].text) {
                            Some(gw) => guide_word = Some(gw),
                            None => diags.push(Diagnostic::error(
                                DiagnosticCode::BadValue,
                                format!("`{}` is not one of the seven guide words", values[0].text),
                                values[0].span.clone(),
                            )),
                        }
                    }
                }
                "text" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        if values[0].text.trim().is_empty() {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::EmptyText,
                                "hazard text must not be empty",
                                values[0].span.clone(),
                            ));
                        } else {
                            text = Some(values[0].text.clone());
                        }
                    }
                }
                _ => Self::unknown_key(field, "hazard", diags),
            }
        }
        let (Some(function), Some(guide_word)) = (function, guide_word) else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                "hazard block requires `function` and `guide_word`",
                entry.key_span.clone(),
            ));
            return;
        };
        if self
            .model
            .hazard_decls
            .iter()
            .any(|d| d.function == function && d.guide_word == guide_word)
        {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupGuideWord,
                format!(
                    "guide word `{}` is already applied to function `{function}`",
                    guide_word.as_str()
                ),
                entry.key_span.clone(),
            ));
            return;
        }
        let id = match &entry.name {
            Some(value) => match Ident::is_valid(&value.text) {
                true => Ident::new(value.text.clone()),
                false => {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::BadValue,
                        format!("`{}` is not a valid identifier", value.text),
                        value.span.clone(),
                    ));
                    return;
                }
            },
            None => Ident::new(format!("h_{function}_{}", guide_word.as_str())),
        };
        if self.model.hazard_decls.iter().any(|d| d.id == id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate hazard id `{id}`"),
                entry.key_span.clone(),
            ));
            return;
        }
        self.model.hazard_decls.push(HazardDecl {
            id,
            function,
            guide_word,
            text,
            span: entry.key_span.clone(),
        });
    }

    fn lower_mode_or_situation(
        &mut self,
        entry: &RawEntry,
        is_mode: bool,
        diags: &mut Vec<Diagnostic>,
    ) {
        let kind = if is_mode { "mode" } else { "situation" };
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        let mut perspective = None;
        let mut name = None;
        for field in body {
            match field.key.as_str() {
                "perspective" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        perspective = parse_perspective(&values[0], diags);
                    }
                }
                "name" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        name = Some(values[0].text.clone());
                    }
                }
                _ => Self::unknown_key(field, kind, diags),
            }
        }
        let Some(perspective) = perspective else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("{kind} `{id}` is missing its `perspective`"),
                entry.key_span.clone(),
            ));
            return;
        };
        let key = (perspective, id.clone());
        let name = name.unwrap_or_else(|| id.as_str().replace('_', " "));
        if is_mode {
            if self.model.modes.contains_key(&key) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::DupId,
                    format!("duplicate {perspective} mode `{id}`"),
                    id_span,
                ));
                return;
            }
            self.model.modes.insert(
                key,
                OperationalMode {
                    id,
                    name,
                    perspective,
                    span: entry.key_span.clone(),
                },
            );
        } else {
            if self.model.situations.contains_key(&key) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::DupId,
                    format!("duplicate {perspective} situation `{id}`"),
                    id_span,
                ));
                return;
            }
            self.model.situations.insert(
                key,
                OperationalSituation {
                    id,
                    name,
                    perspective,
                    span: entry.key_span.clone(),
                },
            );
        }
    }

    fn lower_feasibility_default(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(values) = Self::expect_values(entry, 1, diags) else {
            return;
        };
        let default = match values[0].text.as_str() {
            "feasible" => FeasibilityDefault::Feasible,
            "infeasible" => FeasibilityDefault::Infeasible,
            other => {
                diags.push(Diagnostic::error(
                    DiagnosticCode::BadValue,
                    format!("feasibility default must be `feasible` or `infeasible`, found `{other}`"),
                    values[0].span.clone(),
                ));
                return;
            }
        };
        match self.model.feasibility.default {
            None => self.model.feasibility.default = Some(default),
            Some(existing) if existing == default => {}
            Some(_) => diags.push(Diagnostic::error(
                DiagnosticCode::ConflictingDefault,
                "feasibility default conflicts with an earlier declaration",
                entry.key_span.clone(),
            )),
        }
    }

    fn lower_feasibility_line(
        &mut self,
        entry: &RawEntry,
        feasible: bool,
        diags: &mut Vec<Diagnostic>,
    ) {
        let Some(values) = Self::expect_values(entry, 3, diags) else {
            return;
        };
        let Some((key, _)) = self.resolve_triple(values, diags) else {
            return;
        };
        let map = if feasible {
            &mut self.model.feasibility.feasible
        } else {
            &mut self.model.feasibility.infeasible
        };
        if map.insert(key, entry.key_span.clone()).is_some() {
            diags.push(Diagnostic::warning(
                DiagnosticCode::DupEntry,
                "feasibility triple is declared twice",
                entry.key_span.clone(),
            ));
        }
    }

    fn warn_redundant_feasibility(&self, diags: &mut Vec<Diagnostic>) {
        let default = self
            .model
            .feasibility
            .default
            .unwrap_or(FeasibilityDefault::Feasible);
        let redundant = match default {
            FeasibilityDefault::Feasible => &self.model.feasibility.feasible,
            FeasibilityDefault::Infeasible => &self.model.feasibility.infeasible,
        };
        for (key, span) in redundant {
            diags.push(Diagnostic::warning(
                DiagnosticCode::RedundantFeasibility,
                format!("triple {key} restates the `{}` default and is ignored", match default {
                    FeasibilityDefault::Feasible => "feasible",
                    FeasibilityDefault::Infeasible => "infeasible",
                }),
                span.clone(),
            ));
        }
    }

    fn lower_event_rating(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(values) = Self::expect_values(entry, 6, diags) else {
            return;
        };
        let Some((key, _)) = self.resolve_triple(values, diags) else {
            return;
        };
        let severity = Severity::parse(&values[3].text);
        let exposure = Exposure::parse(&values[4].text);
        let controllability = Controllability::parse(&values[5].text);
        for (parsed, value, expected) in [
            (severity.is_none(), &values[3], "s0..s3"),
            (exposure.is_none(), &values[4], "e0..e4"),
            (controllability.is_none(), &values[5], "c0..c3"),
        ] {
            if parsed {
                diags.push(Diagnostic::error(
                    DiagnosticCode::BadSec,
                    format!("`{}` is not a valid rating (expected {expected})", value.text),
                    value.span.clone(),
                ));
            }
        }
        let (Some(severity), Some(exposure), Some(controllability)) =
            (severity, exposure, controllability)
        else {
            return;
        };
        let rating = Sec {
            severity,
            exposure,
            controllability,
        };
        if self.model.ratings.insert(key, rating).is_some() {
            diags.push(Diagnostic::warning(
                DiagnosticCode::DupEntry,
                "rating replaces an earlier rating for the same triple",
                entry.key_span.clone(),
            ));
        }
    }

    fn lower_merge_goal(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        if self.model.merge_groups.contains_key(&id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate goal id `{id}`"),
                id_span,
            ));
            return;
        }
        let mut text = None;
        let mut hazards = Vec::new();
        let mut events = Vec::new();
        for field in body {
            match field.key.as_str() {
                "text" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        text = Some(values[0].text.clone());
                    }
                }
                "hazards" => {
                    for value in &field.values {
                        let hazard = Ident::new(value.text.clone());
                        if self.model.hazard_perspective(&hazard).is_some() {
                            hazards.push(hazard);
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownHazard,
                                format!("unknown hazard `{hazard}`"),
                                value.span.clone(),
                            ));
                        }
                    }
                }
                "event" => {
                    if let Some(values) = Self::expect_values(field, 3, diags) {
                        if let Some((key, _)) = self.resolve_triple(values, diags) {
                            events.push(key);
                        }
                    }
                }
                _ => Self::unknown_key(field, "merge_goal", diags),
            }
        }
        self.model.merge_groups.insert(
            id.clone(),
            MergeGroup {
                id,
                text,
                hazards,
                events,
                span: entry.key_span.clone(),
            },
        );
    }

    fn lower_trees(&mut self, entries: &[&RawEntry], diags: &mut Vec<Diagnostic>) {
        // first pass: parse structure
        let mut decls: BTreeMap<Ident, (Option<Ident>, RawGate, SourceSpan)> = BTreeMap::new();
        for entry in entries {
            let Some((id, id_span)) = self.block_id(entry, diags) else {
                continue;
            };
            let Some(body) = self.block_body(entry, diags) else {
                continue;
            };
            if decls.contains_key(&id) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::DupId,
                    format!("duplicate tree id `{id}`"),
                    id_span,
                ));
                continue;
            }
            let mut goal = None;
            let mut roots = Vec::new();
            for field in body {
                match field.key.as_str() {
                    "goal" => {
                        if let Some(values) = Self::expect_values(field, 1, diags) {
                            let target = Ident::new(values[0].text.clone());
                            if self.model.merge_groups.contains_key(&target) {
                                goal = Some(target);
                            } else {
                                diags.push(Diagnostic::error(
                                    DiagnosticCode::UnknownGoal,
                                    format!("tree `{id}` references unknown goal `{target}`"),
                                    values[0].span.clone(),
                                ));
                            }
                        }
                    }
                    "or" | "and" | "basic" | "subtree" => {
                        if let Some(gate) = self.lower_gate(field, diags) {
                            roots.push(gate);
                        }
                    }
                    _ => Self::unknown_key(field, "tree", diags),
                }
            }
            match roots.len() {
                0 => diags.push(Diagnostic::error(
                    DiagnosticCode::MissingField,
                    format!("tree `{id}` has no root gate"),
                    entry.key_span.clone(),
                )),
                1 => {
                    decls.insert(id, (goal, roots.pop().unwrap(), entry.key_span.clone()));
                }
                _ => diags.push(Diagnostic::error(
                    DiagnosticCode::Syntax,
                    format!("tree `{id}` must have exactly one root gate"),
                    entry.key_span.clone(),
                )),
            }
        }

        // second pass: resolve subtree references, rejecting cycles
        let ids: Vec<Ident> = decls.keys().cloned().collect();
        let mut resolved: BTreeMap<Ident, Option<Gate>> = BTreeMap::new();
        for id in &ids {
            let mut stack = Vec::new();
            self.resolve_tree(id, &decls, &mut resolved, &mut stack, diags);
        }
        for id in ids {
            if let Some(Some(root)) = resolved.get(&id) {
                let (goal, _, span) = &decls[&id];
                self.model.trees.insert(
                    id.clone(),
                    FaultTree {
                        id,
                        goal: goal.clone(),
                        root: root.clone(),
                        span: span.clone(),
                    },
                );
            }
        }
    }

    fn lower_gate(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) -> Option<RawGate> {
        match entry.key.as_str() {
            "basic" => {
                let values = Self::expect_values(entry, 2, diags)?;
                let component = Ident::new(values[0].text.clone());
                if !self.model.components.contains_key(&component) {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::UnknownComponent,
                        format!("unknown component `{component}` in basic event"),
                        values[0].span.clone(),
                    ));
                    return None;
                }
                let failure_mode = Self::ident_value(&values[1], diags)?;
                Some(RawGate::Basic {
                    component,
                    failure_mode,
                })
            }
            "subtree" => {
                let values = Self::expect_values(entry, 1, diags)?;
                Some(RawGate::Subtree {
                    id: Ident::new(values[0].text.clone()),
                    span: values[0].span.clone(),
                })
            }
            "or" | "and" => {
                let body = entry.body.as_deref().or_else(|| {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::Syntax,
                        format!("`{}` gate requires a block body", entry.key),
                        entry.key_span.clone(),
                    ));
                    None
                })?;
                let mut children = Vec::new();
                for child in body {
                    match child.key.as_str() {
                        "or" | "and" | "basic" | "subtree" => {
                            if let Some(gate) = self.lower_gate(child, diags) {
                                children.push(gate);
                            }
                        }
                        _ => Self::unknown_key(child, "gate", diags),
                    }
                }
                if children.is_empty() {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::EmptyGate,
                        format!("`{}` gate requires at least one child", entry.key),
                        entry.key_span.clone(),
                    ));
                    return None;
                }
                Some(if entry.key == "or" {
                    RawGate::Or(children)
                } else {
                    RawGate::And(children)
                })
            }
            _ => unreachable!("caller filters gate keys"),
        }
    }

    fn resolve_tree(
        &self,
        id: &Ident,
        decls: &BTreeMap<Ident, (Option<Ident>, RawGate, SourceSpan)>,
        resolved: &mut BTreeMap<Ident, Option<Gate>>,
        stack: &mut Vec<Ident>,
        diags: &mut Vec<Diagnostic>,
    ) -> Option<Gate> {
        if let Some(result) = resolved.get(id) {
            return result.clone();
        }
        let (_, raw, _) = decls.get(id)?;
        stack.push(id.clone());
        let gate = self.resolve_gate(raw, decls, resolved, stack, diags);
        stack.pop();
        resolved.insert(id.clone(), gate.clone());
        gate
    }

    fn resolve_gate(
        &self,
        raw: &RawGate,
        decls: &BTreeMap<Ident, (Option<Ident>, RawGate, SourceSpan)>,
        resolved: &mut BTreeMap<Ident, Option<Gate>>,
        stack: &mut Vec<Ident>,
        diags: &mut Vec<Diagnostic>,
    ) -> Option<Gate> {
        match raw {
            RawGate::Basic {
                component,
                failure_mode,
            } => Some(Gate::Basic {
                component: component.clone(),
                failure_mode: failure_mode.clone(),
            }),
            RawGate::Subtree { id, span } => {
                if stack.contains(id) {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::Cycle,
                        format!("subtree inclusion cycle through `{id}`"),
                        span.clone(),
                    ));
                    return None;
                }
                if !decls.contains_key(id) {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::UnknownRef,
                        format!("unknown subtree `{id}`"),
                        span.clone(),
                    ));
                    return None;
                }
                self.resolve_tree(id, decls, resolved, stack, diags)
            }
            RawGate::And(children) => {
                let resolved_children: Vec<Gate> = children
                    .iter()
                    .filter_map(|c| self.resolve_gate(c, decls, resolved, stack, diags))
                    .collect();
                (resolved_children.len() == children.len()).then_some(Gate::And(resolved_children))
            }
            RawGate::Or(children) => {
                let resolved_children: Vec<Gate> = children
                    .iter()
                    .filter_map(|c| self.resolve_gate(c, decls, resolved, stack, diags))
                    .collect();
                (resolved_children.len() == children.len()).then_some(Gate::Or(resolved_children))
            }
        }
    }

    fn lower_tech_component(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some((id, id_span)) = self.block_id(entry, diags) else {
            return;
        };
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        if self.model.tech_components.contains_key(&id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!("duplicate technical component id `{id}`"),
                id_span,
            ));
            return;
        }
        let mut realizes = None;
        let mut links = BTreeSet::new();
        for field in body {
            match field.key.as_str() {
                "realizes" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let target = Ident::new(values[0].text.clone());
                        if self.model.components.contains_key(&target) {
                            if realizes.is_some() {
                                diags.push(Diagnostic::error(
                                    DiagnosticCode::DupEntry,
                                    format!("technical component `{id}` declares more than one `realizes`"),
                                    field.key_span.clone(),
                                ));
                            } else {
                                realizes = Some(target);
                            }
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownComponent,
                                format!("unknown component `{target}`"),
                                values[0].span.clone(),
                            ));
                        }
                    }
                }
                "links" => {
                    for value in &field.values {
                        links.insert(Ident::new(value.text.clone()));
                    }
                }
                _ => Self::unknown_key(field, "tech_component", diags),
            }
        }
        let Some(realizes) = realizes else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                format!("technical component `{id}` is missing its `realizes`"),
                entry.key_span.clone(),
            ));
            return;
        };
        self.model.tech_components.insert(
            id.clone(),
            TechnicalComponent {
                id,
                realizes,
                implemented_tactics: BTreeMap::new(),
                linked_mechanisms: links,
                span: entry.key_span.clone(),
            },
        );
    }

    fn resolve_tech_links(&mut self, diags: &mut Vec<Diagnostic>) {
        let known: BTreeSet<Ident> = self.model.tech_components.keys().cloned().collect();
        for tech in self.model.tech_components.values() {
            for link in &tech.linked_mechanisms {
                if !known.contains(link) {
                    diags.push(
                        Diagnostic::error(
                            DiagnosticCode::UnknownTechComponent,
                            format!(
                                "technical component `{}` links unknown mechanism `{link}`",
                                tech.id
                            ),
                            tech.span.clone(),
                        )
                        .with_entity(tech.id.clone()),
                    );
                }
            }
        }
    }

    fn lower_implements_tactic(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        if entry.values.len() < 2 || entry.values.len() > 3 {
            diags.push(Diagnostic::error(
                DiagnosticCode::BadValue,
                "`implements_tactic` expects a technical component, a tactic, and an optional evidence note",
                entry.key_span.clone(),
            ));
            return;
        }
        let tech_id = Ident::new(entry.values[0].text.clone());
        if !self.model.tech_components.contains_key(&tech_id) {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownTechComponent,
                format!("unknown technical component `{tech_id}`"),
                entry.span_of_value(0),
            ));
            return;
        }
        let tactic = Ident::new(entry.values[1].text.clone());
        if !self.catalog.tactics.contains_key(&tactic) {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownTactic,
                format!("unknown tactic `{tactic}`"),
                entry.span_of_value(1),
            ));
            return;
        }
        let evidence = entry
            .values
            .get(2)
            .map(|v| v.text.clone())
            .unwrap_or_default();
        let tech = self.model.tech_components.get_mut(&tech_id).unwrap();
        if tech.implemented_tactics.insert(tactic, evidence).is_some() {
            diags.push(Diagnostic::warning(
                DiagnosticCode::DupEntry,
                format!("`{tech_id}` already implements that tactic"),
                entry.key_span.clone(),
            ));
        }
    }

    fn lower_fsr_annotation(&mut self, entry: &RawEntry, diags: &mut Vec<Diagnostic>) {
        let Some(body) = self.block_body(entry, diags) else {
            return;
        };
        let mut component: Option<Ident> = None;
        let mut failure_mode = None;
        let mut trigger = None;
        let mut response = None;
        let mut alternatives: Vec<BTreeSet<Ident>> = Vec::new();
        let mut text = None;
        let mut conflicts_with = BTreeSet::new();
        for field in body {
            match field.key.as_str() {
                "component" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let target = Ident::new(values[0].text.clone());
                        if !self.model.components.contains_key(&target) {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownComponent,
                                format!("unknown component `{target}`"),
                                values[0].span.clone(),
                            ));
                        } else if component.is_some() {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::DupEntry,
                                "FSR allocated to more than one component (exactly one is required)",
                                field.key_span.clone(),
                            ));
                        } else {
                            component = Some(target);
                        }
                    }
                }
                "failure_mode" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        failure_mode = Self::ident_value(&values[0], diags);
                    }
                }
                "trigger" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let tag = Ident::new(values[0].text.clone());
                        if self.catalog.trigger_is_known(&tag) {
                            trigger = Some(tag);
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownTrigger,
                                format!("trigger `{tag}` is not in the catalog vocabulary"),
                                values[0].span.clone(),
                            ));
                        }
                    }
                }
                "response" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        let tag = Ident::new(values[0].text.clone());
                        if self.catalog.response_is_known(&tag) {
                            response = Some(tag);
                        } else {
                            diags.push(Diagnostic::error(
                                DiagnosticCode::UnknownResponse,
                                format!("response class `{tag}` is not in the catalog vocabulary"),
                                values[0].span.clone(),
                            ));
                        }
                    }
                }
                "requires" => {
                    if field.values.is_empty() {
                        diags.push(Diagnostic::error(
                            DiagnosticCode::BadValue,
                            "`requires` must name at least one capability tag",
                            field.key_span.clone(),
                        ));
                    } else {
                        alternatives.push(
                            field
                                .values
                                .iter()
                                .map(|v| Ident::new(v.text.clone()))
                                .collect(),
                        );
                    }
                }
                "text" => {
                    if let Some(values) = Self::expect_values(field, 1, diags) {
                        text = Some(values[0].text.clone());
                    }
                }
                "conflicts_with" => {
                    if let Some(values) = Self::expect_values(field, 2, diags) {
                        conflicts_with.insert((
                            Ident::new(values[0].text.clone()),
                            Ident::new(values[1].text.clone()),
                        ));
                    }
                }
                _ => Self::unknown_key(field, "fsr_annotation", diags),
            }
        }
        let (Some(component), Some(failure_mode), Some(trigger), Some(response)) =
            (component, failure_mode, trigger, response)
        else {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                "fsr_annotation requires `component`, `failure_mode`, `trigger`, and `response`",
                entry.key_span.clone(),
            ));
            return;
        };
        if alternatives.is_empty() {
            diags.push(Diagnostic::error(
                DiagnosticCode::MissingField,
                "fsr_annotation requires at least one `requires` alternative",
                entry.key_span.clone(),
            ));
            return;
        }
        let key = (component.clone(), failure_mode.clone());
        if self.model.annotations.contains_key(&key) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DupId,
                format!(
                    "duplicate fsr_annotation for `{component}`/`{failure_mode}`"
                ),
                entry.key_span.clone(),
            ));
            return;
        }
        self.model.annotations.insert(
            key,
            FsrAnnotation {
                component,
                failure_mode,
                trigger,
                response_class: response,
                requirement: RequirementDnf { alternatives },
                text,
                conflicts_with,
                span: entry.key_span.clone(),
            },
        );
    }
}

#[derive(Debug, Clone)]
enum RawGate {
    And(Vec<RawGate>),
    Or(Vec<RawGate>),
    Basic { component: Ident, failure_mode: Ident },
    Subtree { id: Ident, span: SourceSpan },
}

fn parse_perspective(value: &RawValue, diags: &mut Vec<Diagnostic>) -> Option<Perspective> {
    match value.text.as_str() {
        "vehicular" => Some(Perspective::Vehicular),
        "cooperative" => Some(Perspective::Cooperative),
        other => {
            diags.push(Diagnostic::error(
                DiagnosticCode::BadValue,
                format!("perspective must be `vehicular` or `cooperative`, found `{other}`"),
                value.span.clone(),
            ));
            None
        }
    }
}

/// Structural validation of a (possibly programmatically built) model.
/// Returns an empty list exactly when every type invariant holds.
pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    // item rules: at most one cooperative system; at least one vehicle type
    // once any item or component is declared
    let coop_items: Vec<&Item> = model
        .items
        .values()
        .filter(|i| i.kind == ItemKind::CooperativeSystem)
        .collect();
    for extra in coop_items.iter().skip(1) {
        diags.push(
            Diagnostic::error(
                DiagnosticCode::ItemRule,
                "more than one cooperative_system item is declared",
                extra.span.clone(),
            )
            .with_entity(extra.id.clone()),
        );
    }
    let has_vehicle = model
        .items
        .values()
        .any(|i| i.kind == ItemKind::VehicleType);
    if !model.items.is_empty() && !has_vehicle {
        let first = model.items.values().next().unwrap();
        diags.push(
            Diagnostic::error(
                DiagnosticCode::ItemRule,
                "a model with items must declare at least one vehicle_type item",
                first.span.clone(),
            )
            .with_entity(first.id.clone()),
        );
    }

    // component mapping rules
    for component in model.components.values() {
        let Some(item) = model.items.get(&component.item) else {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::UnknownRef,
                    format!("component `{}` references unknown item", component.id),
                    component.span.clone(),
                )
                .with_entity(component.id.clone()),
            );
            continue;
        };
        match item.kind {
            ItemKind::VehicleType => {
                if component.vehicle_ref.is_some() || component.external {
                    diags.push(
                        Diagnostic::error(
                            DiagnosticCode::BadValue,
                            format!(
                                "vehicle component `{}` must not declare `ref` or `external`",
                                component.id
                            ),
                            component.span.clone(),
                        )
                        .with_entity(component.id.clone()),
                    );
                }
            }
            ItemKind::CooperativeSystem => match (&component.vehicle_ref, component.external) {
                (Some(_), true) => diags.push(
                    Diagnostic::error(
                        DiagnosticCode::BadValue,
                        format!(
                            "cooperative component `{}` cannot be both mapped and external",
                            component.id
                        ),
                        component.span.clone(),
                    )
                    .with_entity(component.id.clone()),
                ),
                (None, false) => diags.push(
                    Diagnostic::error(
                        DiagnosticCode::CoopUnmapped,
                        format!(
                            "cooperative component `{}` must reference a vehicle component or be declared external",
                            component.id
                        ),
                        component.span.clone(),
                    )
                    .with_entity(component.id.clone()),
                ),
                (Some(target), false) => {
                    let target_is_vehicle = model
                        .components
                        .get(target)
                        .and_then(|c| model.items.get(&c.item))
                        .map(|i| i.kind == ItemKind::VehicleType)
                        .unwrap_or(false);
                    if !target_is_vehicle {
                        diags.push(
                            Diagnostic::error(
                                DiagnosticCode::BadValue,
                                format!(
                                    "cooperative component `{}` must reference a component of a vehicle item",
                                    component.id
                                ),
                                component.span.clone(),
                            )
                            .with_entity(component.id.clone()),
                        );
                    }
                }
            },
        }
    }

    // flows stay within one item
    for flow in &model.flows {
        let from_item = model.components.get(&flow.from).map(|c| &c.item);
        let to_item = model.components.get(&flow.to).map(|c| &c.item);
        if let (Some(from_item), Some(to_item)) = (from_item, to_item) {
            if from_item != to_item {
                diags.push(Diagnostic {
                    severity: super::DiagnosticSeverity::Error,
                    code: DiagnosticCode::FlowCrossItem,
                    message: format!(
                        "flow `{}` -> `{}` crosses item boundaries",
                        flow.from, flow.to
                    ),
                    span: None,
                    entity: Some(flow.from.clone()),
                });
            }
        }
    }

    // functions and hazards carry non-empty prose
    for function in model.functions.values() {
        if function.description.trim().is_empty() {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::EmptyText,
                    format!("function `{}` has an empty description", function.id),
                    function.span.clone(),
                )
                .with_entity(function.id.clone()),
            );
        }
    }
    let mut seen_pairs = BTreeSet::new();
    for decl in &model.hazard_decls {
        if decl.text.as_deref().is_some_and(|t| t.trim().is_empty()) {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::EmptyText,
                    format!("hazard `{}` has an empty text", decl.id),
                    decl.span.clone(),
                )
                .with_entity(decl.id.clone()),
            );
        }
        if !seen_pairs.insert((decl.function.clone(), decl.guide_word)) {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::DupGuideWord,
                    format!(
                        "guide word `{}` is applied twice to function `{}`",
                        decl.guide_word.as_str(),
                        decl.function
                    ),
                    decl.span.clone(),
                )
                .with_entity(decl.id.clone()),
            );
        }
        if !model.functions.contains_key(&decl.function) {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::UnknownFunction,
                    format!("hazard `{}` references unknown function", decl.id),
                    decl.span.clone(),
                )
                .with_entity(decl.id.clone()),
            );
        }
    }

    // fault trees stay within the goal's item scope
    for tree in model.trees.values() {
        let Some(goal_id) = &tree.goal else { continue };
        let Some(group) = model.merge_groups.get(goal_id) else {
            continue;
        };
        let perspective = group
            .hazards
            .first()
            .or_else(|| group.events.first().map(|e| &e.hazard))
            .and_then(|h| model.hazard_perspective(h));
        let Some(perspective) = perspective else {
            continue;
        };
        for (component_id, _) in tree.root.basic_events() {
            let Some(component) = model.components.get(&component_id) else {
                continue;
            };
            let item_kind = model.items.get(&component.item).map(|i| i.kind);
            let allowed = match perspective {
                Perspective::Vehicular => item_kind == Some(ItemKind::VehicleType),
                Perspective::Cooperative => {
                    item_kind == Some(ItemKind::VehicleType) || component.external
                }
            };
            if !allowed {
                diags.push(
                    Diagnostic::error(
                        DiagnosticCode::PerspectiveMismatch,
                        format!(
                            "tree `{}` ({perspective} goal `{goal_id}`) references component `{component_id}` outside the goal's item scope",
                            tree.id
                        ),
                        tree.span.clone(),
                    )
                    .with_entity(tree.id.clone()),
                );
            }
        }
    }

    // conflicts_with targets must be annotated pairs
    for annotation in model.annotations.values() {
        for (component, failure_mode) in &annotation.conflicts_with {
            if !model
                .annotations
                .contains_key(&(component.clone(), failure_mode.clone()))
            {
                diags.push(
                    Diagnostic::error(
                        DiagnosticCode::UnknownRef,
                        format!(
                            "conflicts_with target `{component}`/`{failure_mode}` has no fsr_annotation"
                        ),
                        annotation.span.clone(),
                    )
                    .with_entity(annotation.component.clone()),
                );
            }
        }
        if annotation.requirement.alternatives.is_empty()
            || annotation
                .requirement
                .alternatives
                .iter()
                .any(|alt| alt.is_empty())
        {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::MissingField,
                    format!(
                        "requirement of `{}`/`{}` must have at least one non-empty alternative",
                        annotation.component, annotation.failure_mode
                    ),
                    annotation.span.clone(),
                )
                .with_entity(annotation.component.clone()),
            );
        }
    }

    diags
}

/// Every feasible triple needs a rating; anchored at the `feasible` line that
/// admitted the triple, or at the hazard declaration under a feasible default.
fn check_rating_completeness(model: &Model, diags: &mut Vec<Diagnostic>) {
    for perspective in Perspective::ALL {
        let policy = model.feasibility_policy(perspective);
        for decl in model.hazard_decls_for(perspective) {
            for mode in model.modes_for(perspective) {
                for situation in model.situations_for(perspective) {
                    let key = EventKey {
                        hazard: decl.id.clone(),
                        mode: mode.id.clone(),
                        situation: situation.id.clone(),
                    };
                    if policy.admits(&key) && !model.ratings.contains_key(&key) {
                        let span = model
                            .feasibility
                            .feasible
                            .get(&key)
                            .cloned()
                            .unwrap_or_else(|| decl.span.clone());
                        diags.push(
                            Diagnostic::error(
                                DiagnosticCode::MissingRating,
                                format!("feasible triple {key} has no event_rating"),
                                span,
                            )
                            .with_entity(decl.id.clone()),
                        );
                    }
                }
            }
        }
    }
}
