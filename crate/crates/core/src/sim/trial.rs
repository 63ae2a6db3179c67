use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compiler::{compile_task_tree, PlanningOperator};
use crate::context::{resolve_steps, CategoryMap, ContextLibrary, Gap, GroundStep, MotionPayload};
use crate::graph::{retrieve_task_tree, FoonGraph, ObjectNode, TaskTree};
use crate::micro::{build_micro_problem, micro_domain, unsatisfied_preconditions, MicroProblem, TypedSymbol};
use crate::planner::{astar_with_clock, ground, Clock, GroundedTask, Heuristic, NoClock, Plan, SearchConfig};
use crate::predicate::{object_node_to_predicates, Predicate, State};
use crate::Symbol;

use super::exec::{annotate_targets, apply_action};
use super::scene::{scene_to_state, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialMode {
    Whole,
    /// Drop a seeded random non-empty proper subset of the ingredient
    /// transfer units.
    Partial(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub heuristic: Heuristic,
    pub search: SearchConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { heuristic: Heuristic::HMax, search: SearchConfig::default() }
    }
}

/// Pipeline stage at which a trial stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Retrieval,
    Compile,
    MicroProblem,
    Planning,
    Context,
    Execution,
    Goal,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Retrieval => "retrieval",
            Stage::Compile => "compile",
            Stage::MicroProblem => "micro-problem",
            Stage::Planning => "planning",
            Stage::Context => "context",
            Stage::Execution => "execution",
            Stage::Goal => "goal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub stage: Stage,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure(Failure),
}

/// Micro plan for one macro operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub macro_name: Symbol,
    pub goal: BTreeSet<Predicate>,
    pub steps: Vec<GroundStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecipePlan {
    pub segments: Vec<Segment>,
    /// Facts the final scene must satisfy (the goal node, table facts
    /// excluded).
    pub final_goal: BTreeSet<Predicate>,
}

impl RecipePlan {
    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.steps.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> impl Iterator<Item = &GroundStep> {
        self.segments.iter().flat_map(|s| s.steps.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroResult {
    pub name: Symbol,
    pub achieved: bool,
    pub violated_facts: Vec<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionReport {
    pub steps_attempted: usize,
    pub steps_succeeded: usize,
    pub macro_results: Vec<MacroResult>,
    pub gaps: Vec<(Symbol, Gap)>,
    pub payloads: Vec<MotionPayload>,
    pub outcome: Outcome,
}

impl ExecutionReport {
    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// A report for a run that stopped before executing any step.
    pub fn failed(stage: Stage, reason: String) -> Self {
        ExecutionReport {
            steps_attempted: 0,
            steps_succeeded: 0,
            macro_results: Vec::new(),
            gaps: Vec::new(),
            payloads: Vec::new(),
            outcome: Outcome::Failure(Failure { stage, reason }),
        }
    }
}

/// Goal-node facts that the scene can be checked against; placement on the
/// table is left out.
pub fn checkable_goal(goal: &ObjectNode) -> Result<BTreeSet<Predicate>, Failure> {
    let facts = object_node_to_predicates(goal)
        .map_err(|e| Failure { stage: Stage::Compile, reason: format!("{e}") })?;
    Ok(facts.into_iter().filter(|f| !f.mentions(&Symbol::table())).collect())
}

fn is_transfer(motion: &str) -> bool {
    matches!(motion, "pour" | "sprinkle")
}

/// Removes the units at `drop` (positions in the tree) and strips the
/// ingredients they would have added from every later node of the same
/// receiving object. Nodes left without ingredients become `empty`.
pub fn remove_units(tree: &TaskTree, drop: &BTreeSet<usize>) -> TaskTree {
    let mut tree = tree.clone();
    let mut removed: Vec<(Symbol, BTreeSet<Symbol>)> = Vec::new();
    for &pos in drop.iter().rev() {
        let unit = tree.remove(pos);
        for out in unit.outputs() {
            let before = unit.inputs().iter().find(|i| i.label() == out.label());
            let gained: BTreeSet<Symbol> = out
                .ingredients()
                .iter()
                .filter(|i| before.is_none_or(|b| !b.ingredients().contains(*i)))
                .cloned()
                .collect();
            if !gained.is_empty() && before.is_some() {
                removed.push((out.label().clone(), gained));
            }
        }
    }
    for unit in tree.units_mut() {
        for (label, gained) in &removed {
            unit.inputs_mut().iter_mut().for_each(|n| strip(n, label, gained));
            unit.outputs_mut().iter_mut().for_each(|n| strip(n, label, gained));
        }
    }
    tree
}

fn strip(node: &mut ObjectNode, label: &Symbol, gained: &BTreeSet<Symbol>) {
    if node.label() == label && node.ingredients().iter().any(|i| gained.contains(i)) {
        let rest: BTreeSet<Symbol> = node.ingredients().difference(gained).cloned().collect();
        let now_empty = rest.is_empty();
        node.set_ingredients(rest);
        if now_empty && !node.has_physical("empty") {
            *node = node.clone().with_physical("empty");
        }
    }
}

/// Positions of a seeded random non-empty proper subset of the transfer
/// units.
pub fn partial_selection(tree: &TaskTree, seed: u64) -> BTreeSet<usize> {
    let transfers: Vec<usize> = tree
        .units()
        .iter()
        .enumerate()
        .filter(|(_, u)| is_transfer(u.motion().label().as_str()))
        .map(|(i, _)| i)
        .collect();
    if transfers.len() < 2 {
        return BTreeSet::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..transfers.len());
    transfers.choose_multiple(&mut rng, k).copied().collect()
}

/// Strips dropped ingredients from the goal node as well.
fn partial_goal(goal: &ObjectNode, full: &TaskTree, drop: &BTreeSet<usize>) -> ObjectNode {
    let mut goal = goal.clone();
    for &pos in drop {
        let unit = &full.units()[pos];
        let label = goal.label().clone();
        for out in unit.outputs().iter().filter(|o| *o.label() == label) {
            let before = unit.inputs().iter().find(|i| i.label() == out.label());
            let rest: BTreeSet<Symbol> = goal
                .ingredients()
                .iter()
                .filter(|i| !(out.ingredients().contains(*i) && before.is_some_and(|b| !b.ingredients().contains(*i))))
                .cloned()
                .collect();
            goal.set_ingredients(rest);
        }
    }
    goal
}

/// Retrieves and compiles the task tree for `goal` from the objects in
/// `scene`, applying the trial mode.
pub fn prepare(
    foon: &FoonGraph,
    goal: &ObjectNode,
    scene: &Scene,
    mode: TrialMode,
) -> Result<(Vec<PlanningOperator>, ObjectNode), Failure> {
    prepare_from(foon, goal, &scene.kitchen(), mode)
}

/// [`prepare`] against an explicit kitchen.
pub fn prepare_from(
    foon: &FoonGraph,
    goal: &ObjectNode,
    kitchen: &[ObjectNode],
    mode: TrialMode,
) -> Result<(Vec<PlanningOperator>, ObjectNode), Failure> {
    let tree = retrieve_task_tree(foon, goal, kitchen)
        .map_err(|e| Failure { stage: Stage::Retrieval, reason: format!("{e}") })?;
    let (tree, goal) = match mode {
        TrialMode::Whole => (tree, goal.clone()),
        TrialMode::Partial(seed) => {
            let drop = partial_selection(&tree, seed);
            (remove_units(&tree, &drop), partial_goal(goal, &tree, &drop))
        }
    };
    let ops = compile_task_tree(&tree).map_err(|e| Failure { stage: Stage::Compile, reason: format!("{e}") })?;
    Ok((ops, goal))
}

/// Solves a grounded micro task; errors become the failure reason.
pub type Solver<'a> = dyn FnMut(&GroundedTask, &MicroProblem, &[TypedSymbol]) -> Result<Plan, String> + 'a;

/// Plans one macro operator against the live scene.
pub fn plan_macro(
    op: &PlanningOperator,
    scene: &Scene,
    config: &TrialConfig,
    clock: &dyn Clock,
) -> Result<(Plan, Segment), Failure> {
    plan_macro_with(op, scene, &mut |task, _, _| {
        astar_with_clock(task, config.heuristic, &config.search, clock).map_err(|e| format!("{e}"))
    })
}

/// [`plan_macro`] with a caller-supplied solver.
pub fn plan_macro_with(op: &PlanningOperator, scene: &Scene, solve: &mut Solver<'_>) -> Result<(Plan, Segment), Failure> {
    let state = scene_to_state(scene);
    let problem = build_micro_problem(op, &state)
        .map_err(|e| Failure { stage: Stage::MicroProblem, reason: format!("{e}") })?;
    let objects = scene.typed_symbols();
    let task = ground(&micro_domain(), &objects, &problem.init, &problem.goal)
        .map_err(|e| Failure { stage: Stage::Planning, reason: format!("{}: {e}", op.name()) })?;
    let plan = solve(&task, &problem, &objects).map_err(|e| Failure { stage: Stage::Planning, reason: format!("{}: {e}", op.name()) })?;
    let steps: Vec<GroundStep> =
        plan.steps.iter().map(|s| GroundStep::new(s.name.clone(), s.args.clone(), None)).collect();
    let (steps, _) = annotate_targets(scene, &steps)
        .map_err(|e| Failure { stage: Stage::Execution, reason: format!("{}: {e}", op.name()) })?;
    Ok((plan, Segment { macro_name: op.name().clone(), goal: problem.goal, steps }))
}

/// Plans every macro operator in turn, reading the scene produced by the
/// previous segment.
pub fn plan_recipe(
    ops: &[PlanningOperator],
    goal: &ObjectNode,
    scene: &Scene,
    config: &TrialConfig,
) -> Result<RecipePlan, Failure> {
    plan_recipe_with(ops, goal, scene, &mut |task, _, _| {
        astar_with_clock(task, config.heuristic, &config.search, &NoClock).map_err(|e| format!("{e}"))
    })
}

/// [`plan_recipe`] with a caller-supplied solver.
pub fn plan_recipe_with(
    ops: &[PlanningOperator],
    goal: &ObjectNode,
    scene: &Scene,
    solve: &mut Solver<'_>,
) -> Result<RecipePlan, Failure> {
    let mut cur = scene.clone();
    let mut segments = Vec::with_capacity(ops.len());
    for op in ops {
        let (_, segment) = plan_macro_with(op, &cur, solve)?;
        for step in &segment.steps {
            cur = apply_action(&cur, step)
                .map_err(|e| Failure { stage: Stage::Execution, reason: format!("{}: {e}", op.name()) })?;
        }
        segments.push(segment);
    }
    Ok(RecipePlan { segments, final_goal: checkable_goal(goal)? })
}

/// Resolves contexts for every segment and runs the plan symbolically.
/// Missing demonstrations fail the run before any step executes.
pub fn execute_plan(
    scene: &Scene,
    plan: &RecipePlan,
    library: &ContextLibrary,
    categories: &CategoryMap,
) -> ExecutionReport {
    let mut report = ExecutionReport::failed(Stage::Context, String::new());
    let mut cur = scene.clone();
    // target cells depend on the scene, so refresh them segment by segment
    let mut annotated: Vec<Vec<GroundStep>> = Vec::with_capacity(plan.segments.len());
    for seg in &plan.segments {
        match annotate_targets(&cur, &seg.steps) {
            Ok((steps, next)) => {
                annotated.push(steps);
                cur = next;
            }
            Err(_) => {
                // leave unresolvable steps to the execution pass below
                annotated.push(seg.steps.clone());
            }
        }
    }
    for (seg, steps) in plan.segments.iter().zip(&annotated) {
        match resolve_steps(library, steps, categories) {
            Ok(Ok(payloads)) => report.payloads.extend(payloads),
            Ok(Err(gaps)) => report.gaps.extend(gaps.into_iter().map(|g| (seg.macro_name.clone(), g))),
            Err(e) => {
                report.outcome = Outcome::Failure(Failure { stage: Stage::Context, reason: format!("{e}") });
                return report;
            }
        }
    }
    if !report.gaps.is_empty() {
        report.payloads.clear();
        report.outcome = Outcome::Failure(Failure {
            stage: Stage::Context,
            reason: format!("{} action context(s) missing a demonstration", report.gaps.len()),
        });
        return report;
    }

    let mut cur = scene.clone();
    for (seg, steps) in plan.segments.iter().zip(&annotated) {
        for step in steps {
            report.steps_attempted += 1;
            match apply_action(&cur, step) {
                Ok(next) => {
                    cur = next;
                    report.steps_succeeded += 1;
                }
                Err(e) => {
                    report.outcome =
                        Outcome::Failure(Failure { stage: Stage::Execution, reason: format!("{}: {e}", seg.macro_name) });
                    return report;
                }
            }
        }
        let state = scene_to_state(&cur);
        let violated: Vec<Predicate> = seg.goal.iter().filter(|g| !state.contains(g)).cloned().collect();
        report.macro_results.push(MacroResult {
            name: seg.macro_name.clone(),
            achieved: violated.is_empty(),
            violated_facts: violated.clone(),
        });
        if !violated.is_empty() {
            report.outcome = Outcome::Failure(Failure {
                stage: Stage::Execution,
                reason: format!("{} left {} goal fact(s) unmet", seg.macro_name, violated.len()),
            });
            return report;
        }
    }
    let state = scene_to_state(&cur);
    let missing: Vec<&Predicate> = plan.final_goal.iter().filter(|g| !state.contains(g)).collect();
    report.outcome = if missing.is_empty() {
        Outcome::Success
    } else {
        Outcome::Failure(Failure { stage: Stage::Goal, reason: format!("goal facts missing: {}", missing.len()) })
    };
    report
}

/// Full pipeline for one scene: retrieval, compilation, micro planning per
/// macro operator, context resolution and symbolic execution.
pub fn run_trial(
    foon: &FoonGraph,
    goal: &ObjectNode,
    scene: &Scene,
    mode: TrialMode,
    library: &ContextLibrary,
    categories: &CategoryMap,
    config: &TrialConfig,
) -> ExecutionReport {
    let plan = match prepare(foon, goal, scene, mode).and_then(|(ops, g)| plan_recipe(&ops, &g, scene, config)) {
        Ok(p) => p,
        Err(f) => return ExecutionReport::failed(f.stage, f.reason),
    };
    execute_plan(scene, &plan, library, categories)
}

/// Plans the recipe for `scene` and records a synthetic demonstration for
/// every action context the plan needs.
pub fn demonstrate(
    foon: &FoonGraph,
    goal: &ObjectNode,
    scene: &Scene,
    mode: TrialMode,
    library: &mut ContextLibrary,
    categories: &CategoryMap,
    config: &TrialConfig,
) -> Result<usize, Failure> {
    let (ops, g) = prepare(foon, goal, scene, mode)?;
    let plan = plan_recipe(&ops, &g, scene, config)?;
    let mut added = 0;
    for seg in &plan.segments {
        added += library
            .record_demonstrations(&seg.steps, categories)
            .map_err(|e| Failure { stage: Stage::Context, reason: format!("{e}") })?;
    }
    Ok(added)
}

/// Macro preconditions a scene fails, keyed by operator, for diagnostics.
pub fn precondition_report(ops: &[PlanningOperator], state: &State) -> BTreeMap<Symbol, Vec<Predicate>> {
    ops.iter()
        .map(|op| (op.name().clone(), unsatisfied_preconditions(op, state)))
        .filter(|(_, v)| !v.is_empty())
        .collect()
}
