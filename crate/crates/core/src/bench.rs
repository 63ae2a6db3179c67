//! Hierarchical versus monolithic micro planning over the first `n` macro
//! operators of a task tree.
//!
//! Hierarchical mode solves one micro problem per macro operator, executing
//! each plan on the scene before the next; monolithic mode solves a single
//! problem whose goal accumulates the first `n` micro goals.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::time::Duration;

use crate::compiler::PlanningOperator;
use crate::context::GroundStep;
use crate::micro::{accumulated_goal, build_micro_problem, micro_domain};
use crate::planner::{astar_with_clock, ground, validate, Clock, Heuristic, PlanError, SearchConfig};
use crate::predicate::Predicate;
use crate::sim::{apply_action, scene_to_state, Scene};
use crate::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Hierarchical,
    Monolithic,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Hierarchical, Mode::Monolithic];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Hierarchical => "hierarchical",
            Mode::Monolithic => "monolithic",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellOutcome {
    Solved,
    ResourceLimit,
    /// Search finished without a plan, or a micro problem could not be
    /// built.
    Failed,
}

impl CellOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            CellOutcome::Solved => "solved",
            CellOutcome::ResourceLimit => "resource_limit",
            CellOutcome::Failed => "failed",
        }
    }
}

/// One run of one grid cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRun {
    pub expanded: u64,
    pub generated: u64,
    pub wall_time: Duration,
    pub outcome: CellOutcome,
    /// The concatenated plan when solved.
    pub steps: Vec<GroundStep>,
    /// Accumulated goal of the first `n` units.
    pub goal: BTreeSet<Predicate>,
    /// True when the plan(s) validated against their tasks.
    pub valid: bool,
}

fn to_steps(plan: &crate::planner::Plan) -> Vec<GroundStep> {
    plan.steps.iter().map(|s| GroundStep::new(s.name.clone(), s.args.clone(), None)).collect()
}

pub fn run_cell(
    ops: &[PlanningOperator],
    scene: &Scene,
    n: usize,
    mode: Mode,
    heuristic: Heuristic,
    search: &SearchConfig,
    clock: &dyn Clock,
) -> CellRun {
    let ops = &ops[..n.min(ops.len())];
    let goal = accumulated_goal(ops);
    let mut run = CellRun {
        expanded: 0,
        generated: 0,
        wall_time: Duration::ZERO,
        outcome: CellOutcome::Solved,
        steps: Vec::new(),
        goal,
        valid: true,
    };
    let domain = micro_domain();
    let objects = scene.typed_symbols();
    let record = |run: &mut CellRun, result: Result<crate::planner::Plan, PlanError>| -> Option<crate::planner::Plan> {
        match result {
            Ok(plan) => {
                run.expanded += plan.stats.expanded;
                run.generated += plan.stats.generated;
                run.wall_time += plan.stats.wall_time;
                Some(plan)
            }
            Err(e) => {
                if let Some(s) = e.stats() {
                    run.expanded += s.expanded;
                    run.generated += s.generated;
                    run.wall_time += s.wall_time;
                }
                run.outcome = match e {
                    PlanError::ResourceLimit(_) => CellOutcome::ResourceLimit,
                    _ => CellOutcome::Failed,
                };
                None
            }
        }
    };
    match mode {
        Mode::Hierarchical => {
            let mut cur = scene.clone();
            for op in ops {
                let state = scene_to_state(&cur);
                let Ok(problem) = build_micro_problem(op, &state) else {
                    run.outcome = CellOutcome::Failed;
                    return run;
                };
                let Ok(task) = ground(&domain, &objects, &problem.init, &problem.goal) else {
                    run.outcome = CellOutcome::Failed;
                    return run;
                };
                let Some(plan) = record(&mut run, astar_with_clock(&task, heuristic, search, clock)) else {
                    return run;
                };
                run.valid &= validate(&plan, &task);
                for s in to_steps(&plan) {
                    match apply_action(&cur, &s) {
                        Ok(next) => cur = next,
                        Err(_) => {
                            run.valid = false;
                            run.outcome = CellOutcome::Failed;
                            return run;
                        }
                    }
                    run.steps.push(s);
                }
            }
        }
        Mode::Monolithic => {
            let init = scene_to_state(scene);
            let Ok(task) = ground(&domain, &objects, &init, &run.goal) else {
                run.outcome = CellOutcome::Failed;
                return run;
            };
            if let Some(plan) = record(&mut run, astar_with_clock(&task, heuristic, search, clock)) {
                run.valid &= validate(&plan, &task);
                run.steps = to_steps(&plan);
            }
        }
    }
    run
}

/// An ordering the recipe structure forbids: `later` acted on `container`
/// before `earlier` did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingFlag {
    pub container: Symbol,
    pub first: usize,
    pub then: usize,
    pub description: &'static str,
}

fn receiver(step: &GroundStep) -> Option<&Symbol> {
    match step.name.as_str() {
        "pour-all" | "pour-some" | "sprinkle" => step.args.get(2),
        "mix" | "insert" => step.args.get(1),
        _ => None,
    }
}

/// Flags `mix` steps that precede a pour or sprinkle into the same
/// container, and `insert` steps that precede a mix or pour into it.
pub fn ordering_flags(steps: &[GroundStep]) -> Vec<OrderingFlag> {
    let mut flags = Vec::new();
    for (i, a) in steps.iter().enumerate() {
        let Some(c) = receiver(a) else { continue };
        for (j, b) in steps.iter().enumerate().skip(i + 1) {
            if receiver(b) != Some(c) {
                continue;
            }
            let (an, bn) = (a.name.as_str(), b.name.as_str());
            let transfer = matches!(bn, "pour-all" | "pour-some" | "sprinkle");
            let description = match an {
                "mix" if transfer => "mix before adding an ingredient",
                "insert" if transfer || bn == "mix" => "garnish before the drink is finished",
                _ => continue,
            };
            flags.push(OrderingFlag { container: c.clone(), first: i, then: j, description });
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_task_tree;
    use crate::planner::NoClock;
    use crate::recipes;
    use crate::sim::standard_scene;
    use alloc::vec;

    fn s(name: &str, args: &[&str]) -> GroundStep {
        GroundStep::new(Symbol::new(name).unwrap(), args.iter().map(|a| Symbol::new(a).unwrap()).collect(), None)
    }

    #[test]
    fn single_unit_modes_agree() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let scene = standard_scene();
        let cfg = SearchConfig::default();
        let h = run_cell(&ops, &scene, 1, Mode::Hierarchical, Heuristic::HMax, &cfg, &NoClock);
        let m = run_cell(&ops, &scene, 1, Mode::Monolithic, Heuristic::HMax, &cfg, &NoClock);
        assert_eq!(h.outcome, CellOutcome::Solved);
        assert_eq!(h.expanded, m.expanded);
        assert_eq!(h.steps.len(), m.steps.len());
        assert!(h.valid && m.valid);
    }

    #[test]
    fn both_modes_reach_accumulated_goal() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let scene = standard_scene();
        let cfg = SearchConfig::default();
        for mode in Mode::ALL {
            let run = run_cell(&ops, &scene, 2, mode, Heuristic::HFf, &cfg, &NoClock);
            assert_eq!(run.outcome, CellOutcome::Solved);
            let mut cur = scene.clone();
            for st in &run.steps {
                cur = apply_action(&cur, st).unwrap();
            }
            assert!(scene_to_state(&cur).satisfies(&run.goal), "{mode:?}");
        }
    }

    #[test]
    fn flags_mix_first() {
        let steps = vec![
            s("pick", &["spoon", "cell_12"]),
            s("mix", &["spoon", "drinking_glass"]),
            s("place-large", &["spoon", "cell_12"]),
            s("pick", &["bottle", "cell_9"]),
            s("pour-some", &["vodka", "bottle", "drinking_glass"]),
        ];
        let flags = ordering_flags(&steps);
        assert_eq!(flags.len(), 1);
        assert_eq!((flags[0].first, flags[0].then), (1, 4));
        let ordered = vec![steps[3].clone(), steps[4].clone(), steps[0].clone(), steps[1].clone()];
        assert!(ordering_flags(&ordered).is_empty());
        let garnish_first = vec![s("insert", &["celery", "drinking_glass"]), s("mix", &["spoon", "drinking_glass"])];
        assert_eq!(ordering_flags(&garnish_first).len(), 1);
    }

    #[test]
    fn budget_exhaustion_is_recorded() {
        let ops = compile_task_tree(&recipes::bloody_mary_tree()).unwrap();
        let run = run_cell(&ops, &standard_scene(), 2, Mode::Monolithic, Heuristic::Blind, &SearchConfig { node_budget: 10 }, &NoClock);
        assert_eq!(run.outcome, CellOutcome::ResourceLimit);
        assert_eq!(run.expanded, 10);
    }
}
