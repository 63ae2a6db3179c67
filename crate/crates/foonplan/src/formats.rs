//! JSON scene, library and plan files, PDDL plan text, and execution
//! reports.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use foonplan_core::context::{
    generalize, ActionContext, CategoryMap, ContextLibrary, GeneralizedContext, GroundStep, MotionPayload,
};
use foonplan_core::predicate::{Predicate, Relation};
use foonplan_core::sim::{
    ExecutionReport, ObjectKind, Orientation, Outcome, RecipePlan, Scene, SceneObject, Segment, SizeClass, TableCell,
};
use foonplan_core::Symbol;

pub const SCENE_VERSION: u32 = 1;
pub const LIBRARY_VERSION: u32 = 1;
pub const PLAN_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported {what} version {found} (expected {expected})")]
    Version { what: &'static str, found: u32, expected: u32 },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

fn sym(raw: &str) -> Result<Symbol, FormatError> {
    Symbol::new(raw).map_err(|e| invalid(format!("`{raw}`: {e}")))
}

fn check_version(what: &'static str, found: u32, expected: u32) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::Version { what, found, expected })
    }
}

// ---- scenes ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    version: u32,
    cells: Vec<CellDoc>,
    objects: Vec<ObjectDoc>,
    gripper: Option<String>,
    stacks: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    id: String,
    size: String,
    occupant: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    label: String,
    size: String,
    kind: String,
    contents: Vec<String>,
    orientation: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    mixed: bool,
}

pub fn scene_to_json(scene: &Scene) -> String {
    let doc = SceneDoc {
        version: SCENE_VERSION,
        cells: scene
            .cells
            .iter()
            .map(|c| CellDoc {
                id: c.id.to_string(),
                size: c.size.as_str().into(),
                occupant: c.occupant.as_ref().map(Symbol::to_string),
            })
            .collect(),
        objects: scene
            .objects
            .iter()
            .map(|o| ObjectDoc {
                label: o.label.to_string(),
                size: o.size.as_str().into(),
                kind: o.kind.as_str().into(),
                contents: o.contents.iter().map(Symbol::to_string).collect(),
                orientation: o.orientation.as_str().into(),
                mixed: o.mixed,
            })
            .collect(),
        gripper: scene.gripper.as_ref().map(Symbol::to_string),
        stacks: scene.stacks.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("scene serializes") + "\n"
}

/// Parses a scene and checks its invariants.
pub fn scene_from_json(text: &str) -> Result<Scene, FormatError> {
    let doc: SceneDoc = serde_json::from_str(text)?;
    check_version("scene", doc.version, SCENE_VERSION)?;
    let size = |s: &str| SizeClass::parse(s).ok_or_else(|| invalid(format!("unknown size class `{s}`")));
    let cells = doc
        .cells
        .iter()
        .map(|c| {
            Ok(TableCell {
                id: sym(&c.id)?,
                size: size(&c.size)?,
                occupant: c.occupant.as_deref().map(sym).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let objects = doc
        .objects
        .iter()
        .map(|o| {
            let kind = ObjectKind::parse(&o.kind).ok_or_else(|| invalid(format!("unknown object kind `{}`", o.kind)))?;
            let orientation = Orientation::parse(&o.orientation)
                .ok_or_else(|| invalid(format!("unknown orientation `{}`", o.orientation)))?;
            Ok(SceneObject {
                label: sym(&o.label)?,
                size: size(&o.size)?,
                kind,
                contents: o.contents.iter().map(|c| sym(c)).collect::<Result<_, _>>()?,
                orientation,
                mixed: o.mixed,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let stacks = doc.stacks.iter().map(|(a, b)| Ok((sym(a)?, sym(b)?))).collect::<Result<_, FormatError>>()?;
    let scene = Scene { cells, objects, gripper: doc.gripper.as_deref().map(sym).transpose()?, stacks };
    let violations = scene.violations();
    if let Some(v) = violations.first() {
        return Err(invalid(format!("scene invariant violated: {}", v.0)));
    }
    Ok(scene)
}

// ---- steps and atoms ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    name: String,
    args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell: Option<[i32; 2]>,
}

impl StepDoc {
    fn from_step(s: &GroundStep) -> Self {
        StepDoc {
            name: s.name.to_string(),
            args: s.args.iter().map(Symbol::to_string).collect(),
            cell: s.target_cell.map(|(c, r)| [c, r]),
        }
    }

    fn to_step(&self) -> Result<GroundStep, FormatError> {
        Ok(GroundStep::new(
            sym(&self.name)?,
            self.args.iter().map(|a| sym(a)).collect::<Result<_, _>>()?,
            self.cell.map(|[c, r]| (c, r)),
        ))
    }
}

/// Parses one atom such as `(in glass vodka)` or `(is-mixed glass)`.
pub fn parse_atom(text: &str) -> Result<Predicate, FormatError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| invalid(format!("atom `{text}` is not parenthesized")))?;
    let words: Vec<&str> = inner.split_whitespace().collect();
    match words.as_slice() {
        [name, a, b] => {
            let rel = Relation::parse(name).ok_or_else(|| invalid(format!("unknown relation `{name}`")))?;
            Predicate::relation(rel, sym(a)?, sym(b)?).map_err(|e| invalid(e.to_string()))
        }
        [name, a] => Ok(Predicate::attribute(sym(name)?, sym(a)?)),
        _ => Err(invalid(format!("atom `{text}` has the wrong arity"))),
    }
}

/// Reads a plan file: one `(action arg ...)` per line, `;` comments.
pub fn parse_pddl_plan(text: &str) -> Result<Vec<(Symbol, Vec<Symbol>)>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split(';').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let inner = line
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| invalid(format!("plan line {}: expected `(action args...)`", i + 1)))?;
        let lower = inner.to_lowercase();
        let mut words = lower.split_whitespace();
        let name = words.next().ok_or_else(|| invalid(format!("plan line {}: empty action", i + 1)))?;
        out.push((sym(name)?, words.map(sym).collect::<Result<_, _>>()?));
    }
    Ok(out)
}

// ---- libraries ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryDoc {
    version: u32,
    categories: BTreeMap<String, String>,
    contexts: Vec<ContextDoc>,
    /// Generalized entries that replaying `contexts` would not recreate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    generalized: Vec<GeneralizedDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextDoc {
    prev: Option<StepDoc>,
    now: StepDoc,
    next: Option<StepDoc>,
    rel_prev: [i32; 2],
    rel_next: [i32; 2],
    motion_id: String,
    dmp_params_b64: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralizedDoc {
    action_triple: [String; 3],
    arg_categories: [Vec<String>; 3],
    rel_prev: [i32; 2],
    rel_next: [i32; 2],
    motion_id: String,
    dmp_params_b64: String,
}

fn payload(motion_id: &str, b64: &str) -> Result<MotionPayload, FormatError> {
    if motion_id.is_empty() {
        return Err(invalid("empty motion_id"));
    }
    let dmp_params = B64.decode(b64).map_err(|e| invalid(format!("dmp_params_b64: {e}")))?;
    Ok(MotionPayload { motion_id: motion_id.into(), dmp_params })
}

pub fn library_to_json(library: &ContextLibrary, categories: &CategoryMap) -> String {
    let mut contexts = Vec::new();
    let mut replay = ContextLibrary::new();
    for ac in library.contexts() {
        let key = generalize(&ac, categories).expect("stored contexts carry target cells");
        contexts.push(ContextDoc {
            prev: ac.prev.as_ref().map(StepDoc::from_step),
            now: StepDoc::from_step(&ac.now),
            next: ac.next.as_ref().map(StepDoc::from_step),
            rel_prev: [key.rel_prev.0, key.rel_prev.1],
            rel_next: [key.rel_next.0, key.rel_next.1],
            motion_id: ac.motion.motion_id.clone(),
            dmp_params_b64: B64.encode(&ac.motion.dmp_params),
        });
        replay.insert(ac, categories).expect("checked above");
    }
    let implied: BTreeMap<&GeneralizedContext, &MotionPayload> = replay.generalized().collect();
    let generalized = library
        .generalized()
        .filter(|(k, m)| implied.get(k) != Some(m))
        .map(|(k, m)| GeneralizedDoc {
            action_triple: k.action_triple.clone(),
            arg_categories: k.arg_categories.clone(),
            rel_prev: [k.rel_prev.0, k.rel_prev.1],
            rel_next: [k.rel_next.0, k.rel_next.1],
            motion_id: m.motion_id.clone(),
            dmp_params_b64: B64.encode(&m.dmp_params),
        })
        .collect();
    let doc = LibraryDoc {
        version: LIBRARY_VERSION,
        categories: categories.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        contexts,
        generalized,
    };
    serde_json::to_string_pretty(&doc).expect("library serializes") + "\n"
}

/// Loads a library and its category map. Stored offsets must agree with
/// the step cells.
pub fn library_from_json(text: &str) -> Result<(ContextLibrary, CategoryMap), FormatError> {
    let doc: LibraryDoc = serde_json::from_str(text)?;
    check_version("library", doc.version, LIBRARY_VERSION)?;
    let categories: CategoryMap =
        doc.categories.iter().map(|(k, v)| Ok((sym(k)?, v.clone()))).collect::<Result<_, FormatError>>()?;
    let mut library = ContextLibrary::new();
    for (i, c) in doc.contexts.iter().enumerate() {
        let ac = ActionContext {
            prev: c.prev.as_ref().map(StepDoc::to_step).transpose()?,
            now: c.now.to_step()?,
            next: c.next.as_ref().map(StepDoc::to_step).transpose()?,
            motion: payload(&c.motion_id, &c.dmp_params_b64)?,
        };
        let key = generalize(&ac, &categories).map_err(|e| invalid(format!("context {i}: {e}")))?;
        if [key.rel_prev.0, key.rel_prev.1] != c.rel_prev || [key.rel_next.0, key.rel_next.1] != c.rel_next {
            return Err(invalid(format!("context {i}: offsets disagree with the step cells")));
        }
        library.insert(ac, &categories).map_err(|e| invalid(e.to_string()))?;
    }
    for g in &doc.generalized {
        let key = GeneralizedContext {
            action_triple: g.action_triple.clone(),
            arg_categories: g.arg_categories.clone(),
            rel_prev: (g.rel_prev[0], g.rel_prev[1]),
            rel_next: (g.rel_next[0], g.rel_next[1]),
        };
        library.insert_generalized(key, payload(&g.motion_id, &g.dmp_params_b64)?);
    }
    Ok((library, categories))
}

/// Parses a `{label: category}` JSON object.
pub fn categories_from_json(text: &str) -> Result<CategoryMap, FormatError> {
    let raw: BTreeMap<String, String> = serde_json::from_str(text)?;
    raw.iter().map(|(k, v)| Ok((sym(k)?, v.clone()))).collect()
}

// ---- plans ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    version: u32,
    steps: usize,
    final_goal: Vec<String>,
    segments: Vec<SegmentDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    #[serde(rename = "macro")]
    macro_name: String,
    goal: Vec<String>,
    steps: Vec<StepDoc>,
}

fn atoms(facts: &BTreeSet<Predicate>) -> Vec<String> {
    facts.iter().map(Predicate::to_string).collect()
}

fn parse_atoms(raw: &[String]) -> Result<BTreeSet<Predicate>, FormatError> {
    raw.iter().map(|a| parse_atom(a)).collect()
}

pub fn plan_to_json(plan: &RecipePlan) -> String {
    let doc = PlanDoc {
        version: PLAN_VERSION,
        steps: plan.len(),
        final_goal: atoms(&plan.final_goal),
        segments: plan
            .segments
            .iter()
            .map(|s| SegmentDoc {
                macro_name: s.macro_name.to_string(),
                goal: atoms(&s.goal),
                steps: s.steps.iter().map(StepDoc::from_step).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plan serializes") + "\n"
}

pub fn plan_from_json(text: &str) -> Result<RecipePlan, FormatError> {
    let doc: PlanDoc = serde_json::from_str(text)?;
    check_version("plan", doc.version, PLAN_VERSION)?;
    let segments = doc
        .segments
        .iter()
        .map(|s| {
            Ok(Segment {
                macro_name: sym(&s.macro_name)?,
                goal: parse_atoms(&s.goal)?,
                steps: s.steps.iter().map(StepDoc::to_step).collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let plan = RecipePlan { segments, final_goal: parse_atoms(&doc.final_goal)? };
    if plan.len() != doc.steps {
        return Err(invalid(format!("plan declares {} steps but lists {}", doc.steps, plan.len())));
    }
    Ok(plan)
}

/// Plan grouped by macro operator, one step per line.
pub fn plan_table(plan: &RecipePlan) -> String {
    let mut out = String::new();
    let mut k = 0;
    for seg in &plan.segments {
        let _ = writeln!(out, "{} ({} steps)", seg.macro_name, seg.steps.len());
        for s in &seg.steps {
            k += 1;
            let _ = writeln!(out, "  {k:>3}. {s}");
        }
    }
    let _ = writeln!(out, "total: {} steps", plan.len());
    out
}

// ---- reports ----

#[derive(Debug, Serialize)]
struct ReportDoc<'a> {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    steps_attempted: usize,
    steps_succeeded: usize,
    macro_results: Vec<MacroDoc>,
    gaps: Vec<GapDoc>,
    motions: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
struct MacroDoc {
    name: String,
    achieved: bool,
    violated_facts: Vec<String>,
}

#[derive(Debug, Serialize)]
struct GapDoc {
    #[serde(rename = "macro")]
    macro_name: String,
    step: usize,
    key: String,
}

pub fn report_to_json(report: &ExecutionReport) -> String {
    let (outcome, stage, reason) = match &report.outcome {
        Outcome::Success => ("success", None, None),
        Outcome::Failure(f) => ("failure", Some(f.stage.as_str()), Some(f.reason.as_str())),
    };
    let doc = ReportDoc {
        outcome,
        stage,
        reason,
        steps_attempted: report.steps_attempted,
        steps_succeeded: report.steps_succeeded,
        macro_results: report
            .macro_results
            .iter()
            .map(|m| MacroDoc {
                name: m.name.to_string(),
                achieved: m.achieved,
                violated_facts: m.violated_facts.iter().map(Predicate::to_string).collect(),
            })
            .collect(),
        gaps: report
            .gaps
            .iter()
            .map(|(m, g)| GapDoc { macro_name: m.to_string(), step: g.step, key: g.key.to_string() })
            .collect(),
        motions: report.payloads.iter().map(|p| p.motion_id.as_str()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

pub fn report_table(report: &ExecutionReport) -> String {
    let mut out = String::new();
    let width = report.macro_results.iter().map(|m| m.name.as_str().len()).max().unwrap_or(5).max(5);
    if !report.macro_results.is_empty() {
        let _ = writeln!(out, "{:<width$}  achieved  violated", "macro");
        for m in &report.macro_results {
            let violated: Vec<String> = m.violated_facts.iter().map(Predicate::to_string).collect();
            let shown = if violated.is_empty() { "-".to_string() } else { violated.join(" ") };
            let _ = writeln!(out, "{:<width$}  {:<8}  {shown}", m.name.as_str(), if m.achieved { "yes" } else { "no" });
        }
    }
    for (m, g) in &report.gaps {
        let _ = writeln!(out, "missing demonstration: {m} step {}: {}", g.step, g.key);
    }
    let _ = writeln!(out, "steps: {}/{}", report.steps_succeeded, report.steps_attempted);
    match &report.outcome {
        Outcome::Success => out.push_str("outcome: success\n"),
        Outcome::Failure(f) => {
            let _ = writeln!(out, "outcome: failure at {}: {}", f.stage.as_str(), f.reason);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use foonplan_core::recipes;
    use foonplan_core::sim::{random_scene, standard_scene, TrialConfig, TrialMode};

    #[test]
    fn scene_roundtrip() {
        for scene in [standard_scene(), random_scene(3), random_scene(11)] {
            let text = scene_to_json(&scene);
            assert_eq!(scene_from_json(&text).unwrap(), scene);
        }
    }

    #[test]
    fn scene_rejects_bad_input() {
        let text = scene_to_json(&standard_scene());
        let wrong_version = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(scene_from_json(&wrong_version), Err(FormatError::Version { found: 2, .. })));
        let broken = text.replacen("\"gripper\": null", "\"gripper\": \"bottle\"", 1);
        assert!(matches!(scene_from_json(&broken), Err(FormatError::Invalid(_))));
        let extra = text.replacen("\"version\": 1", "\"version\": 1, \"extra\": 0", 1);
        assert!(matches!(scene_from_json(&extra), Err(FormatError::Json(_))));
    }

    #[test]
    fn atoms_roundtrip() {
        for a in ["(in drinking_glass vodka)", "(is-mixed drinking_glass)", "(on cell_3 air)"] {
            assert_eq!(parse_atom(a).unwrap().to_string(), a);
        }
        assert!(parse_atom("(in a a)").is_err());
        assert!(parse_atom("in a b").is_err());
        assert!(parse_atom("(near a b)").is_err());
    }

    #[test]
    fn pddl_plan_reader() {
        let text = "(PICK bottle cell_9)\n; cost = 1 (unit cost)\n\n(place-small bottle cell_9)\n";
        let steps = parse_pddl_plan(text).unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].0.as_str(), "pick");
        assert!(parse_pddl_plan("pick bottle").is_err());
    }

    fn demo_plan() -> (RecipePlan, Scene) {
        let scene = standard_scene();
        let foon = recipes::bloody_mary_graph();
        let goal = recipes::bloody_mary_goal();
        let (ops, g) = foonplan_core::sim::prepare(&foon, &goal, &scene, TrialMode::Whole).unwrap();
        (foonplan_core::sim::plan_recipe(&ops[..2], &g, &scene, &TrialConfig::default()).unwrap(), scene)
    }

    #[test]
    fn plan_roundtrip() {
        let (plan, _) = demo_plan();
        let text = plan_to_json(&plan);
        assert_eq!(plan_from_json(&text).unwrap(), plan);
        assert!(plan_table(&plan).contains("total: 6 steps"));
    }

    #[test]
    fn library_roundtrip() {
        let (plan, _) = demo_plan();
        let cats = recipes::default_categories();
        let mut lib = ContextLibrary::new();
        for seg in &plan.segments {
            lib.record_demonstrations(&seg.steps, &cats).unwrap();
        }
        let extra_key = GeneralizedContext {
            action_triple: ["none".into(), "flip".into(), "none".into()],
            arg_categories: [vec!["none".into()], vec!["glass".into()], vec!["none".into()]],
            rel_prev: (0, 0),
            rel_next: (0, 0),
        };
        lib.insert_generalized(extra_key, MotionPayload { motion_id: "flip".into(), dmp_params: vec![7] });
        let text = library_to_json(&lib, &cats);
        let (back, back_cats) = library_from_json(&text).unwrap();
        assert_eq!(back, lib);
        assert_eq!(back_cats, cats);
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["contexts"][0]["rel_next"] = serde_json::json!([9, 9]);
        assert!(library_from_json(&v.to_string()).is_err());
        v["version"] = serde_json::json!(7);
        assert!(matches!(library_from_json(&v.to_string()), Err(FormatError::Version { .. })));
    }

    #[test]
    fn report_renderings() {
        let r = ExecutionReport::failed(foonplan_core::sim::Stage::Context, "2 missing".into());
        assert!(report_table(&r).contains("failure at context"));
        let v: serde_json::Value = serde_json::from_str(&report_to_json(&r)).unwrap();
        assert_eq!(v["outcome"], "failure");
        assert_eq!(v["stage"], "context");
    }
}
