//! Grounded STRIPS planning: grounding of typed operators, A* search with
//! delete-relaxation heuristics, and sequential plan validation.

mod fact_set;
mod heuristic;
mod search;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use thiserror::Error;

use crate::compiler::PlanningOperator;
use crate::micro::TypedSymbol;
use crate::predicate::{Predicate, State};
use crate::Symbol;

pub use fact_set::FactSet;
pub use heuristic::{h_ff, h_max, HeuristicEvaluator};
pub use search::{astar, astar_with_clock, Clock, NoClock};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("symbol {0} is not declared")]
    UndeclaredSymbol(Symbol),
    #[error("goal unreachable ({} nodes expanded)", .0.expanded)]
    NoPlan(SearchStats),
    #[error("node budget exhausted after {} expansions", .0.expanded)]
    ResourceLimit(SearchStats),
}

impl PlanError {
    pub fn stats(&self) -> Option<&SearchStats> {
        match self {
            PlanError::NoPlan(s) | PlanError::ResourceLimit(s) => Some(s),
            PlanError::UndeclaredSymbol(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    HMax,
    HFf,
    Blind,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::HMax, Heuristic::HFf, Heuristic::Blind];

    pub fn as_str(self) -> &'static str {
        match self {
            Heuristic::HMax => "hmax",
            Heuristic::HFf => "hff",
            Heuristic::Blind => "blind",
        }
    }

    pub fn parse(s: &str) -> Option<Heuristic> {
        Heuristic::ALL.into_iter().find(|h| h.as_str() == s)
    }

    pub fn is_admissible(self) -> bool {
        !matches!(self, Heuristic::HFf)
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of expanded nodes.
    pub node_budget: usize,
}

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub wall_time: Duration,
}

/// A ground action over fact indices. `del` never intersects `add`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: Symbol,
    pub args: Vec<Symbol>,
    pub pre: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

impl GroundAction {
    pub fn is_applicable(&self, state: &FactSet) -> bool {
        self.pre.iter().all(|&f| state.contains(f))
    }

    pub fn apply_in_place(&self, state: &mut FactSet) {
        for &f in &self.del {
            state.remove(f);
        }
        for &f in &self.add {
            state.insert(f);
        }
    }
}

/// A propositional planning task. Fact indices follow predicate order and
/// are stable for a given input.
#[derive(Debug, Clone)]
pub struct GroundedTask {
    facts: Vec<Predicate>,
    index: BTreeMap<Predicate, u32>,
    actions: Vec<GroundAction>,
    init: FactSet,
    goal: Vec<u32>,
}

impl GroundedTask {
    pub fn facts(&self) -> &[Predicate] {
        &self.facts
    }

    pub fn fact_index(&self, fact: &Predicate) -> Option<u32> {
        self.index.get(fact).copied()
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn init(&self) -> &FactSet {
        &self.init
    }

    pub fn goal(&self) -> &[u32] {
        &self.goal
    }

    pub fn is_goal(&self, state: &FactSet) -> bool {
        self.goal.iter().all(|&g| state.contains(g))
    }

    /// Facts of an index set, in index order.
    pub fn decode(&self, state: &FactSet) -> State {
        state.iter().map(|i| self.facts[i as usize].clone()).collect()
    }

    /// Index set of `state`; facts outside the universe are dropped.
    pub fn encode(&self, state: &State) -> FactSet {
        let mut set = FactSet::new(self.facts.len());
        for f in state {
            if let Some(i) = self.fact_index(f) {
                set.insert(i);
            }
        }
        set
    }

    pub fn find_action(&self, name: &str, args: &[Symbol]) -> Option<usize> {
        self.actions.iter().position(|a| a.name.as_str() == name && a.args == args)
    }

    /// Builds a task directly from propositional parts. Facts are renumbered
    /// in predicate order.
    pub fn from_parts(
        facts: impl IntoIterator<Item = Predicate>,
        actions: impl IntoIterator<Item = (Symbol, Vec<Symbol>, Vec<Predicate>, Vec<Predicate>, Vec<Predicate>)>,
        init: &State,
        goal: &BTreeSet<Predicate>,
    ) -> Self {
        let actions: Vec<_> = actions.into_iter().collect();
        let mut universe: BTreeSet<Predicate> = facts.into_iter().collect();
        universe.extend(init.iter().cloned());
        universe.extend(goal.iter().cloned());
        for (_, _, pre, add, del) in &actions {
            universe.extend(pre.iter().chain(add).chain(del).cloned());
        }
        let facts: Vec<Predicate> = universe.into_iter().collect();
        let index: BTreeMap<Predicate, u32> = facts.iter().cloned().enumerate().map(|(i, f)| (f, i as u32)).collect();
        let ids = |v: &[Predicate]| -> Vec<u32> {
            let mut out: Vec<u32> = v.iter().map(|f| index[f]).collect();
            out.sort_unstable();
            out.dedup();
            out
        };
        let actions = actions
            .iter()
            .map(|(name, args, pre, add, del)| {
                let add = ids(add);
                let mut del = ids(del);
                del.retain(|d| !add.contains(d));
                GroundAction { name: name.clone(), args: args.clone(), pre: ids(pre), add, del }
            })
            .collect();
        let mut init_set = FactSet::new(facts.len());
        for f in init {
            init_set.insert(index[f]);
        }
        let goal = ids(&goal.iter().cloned().collect::<Vec<_>>());
        GroundedTask { facts, index, actions, init: init_set, goal }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    /// Index into [`GroundedTask::actions`].
    pub action: usize,
    pub name: Symbol,
    pub args: Vec<Symbol>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cost: u32,
    pub stats: SearchStats,
}

impl Plan {
    pub fn from_steps(steps: Vec<PlanStep>, stats: SearchStats) -> Self {
        Plan { cost: steps.len() as u32, steps, stats }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn declared_check(
    facts: impl IntoIterator<Item = impl core::borrow::Borrow<Predicate>>,
    declared: &BTreeSet<&Symbol>,
) -> Result<(), PlanError> {
    for f in facts {
        for a in f.borrow().args() {
            if !a.is_reserved() && !declared.contains(a) {
                return Err(PlanError::UndeclaredSymbol(a.clone()));
            }
        }
    }
    Ok(())
}

/// Instantiates `domain` over `objects`.
///
/// Parameters bind injectively to declared objects whose type is a subtype
/// of the parameter type (`hand` and `air` are constants and never bound).
/// Bindings that would relate an object to itself are skipped. Actions whose
/// preconditions are not reachable under the delete relaxation from `init`
/// are pruned, and delete effects on facts that can never hold are dropped.
pub fn ground(
    domain: &[PlanningOperator],
    objects: &[TypedSymbol],
    init: &State,
    goal: &BTreeSet<Predicate>,
) -> Result<GroundedTask, PlanError> {
    let declared: BTreeSet<&Symbol> = objects.iter().map(|o| &o.name).collect();
    declared_check(goal, &declared)?;
    declared_check(init, &declared)?;
    let bindable: Vec<&TypedSymbol> = objects.iter().filter(|o| !o.name.is_reserved()).collect();

    struct Candidate {
        name: Symbol,
        args: Vec<Symbol>,
        pre: Vec<Predicate>,
        add: Vec<Predicate>,
        del: Vec<Predicate>,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for op in domain {
        let domains: Vec<Vec<&Symbol>> = op
            .parameters()
            .iter()
            .map(|p| bindable.iter().filter(|o| o.ty.is_a(p.ty)).map(|o| &o.name).collect())
            .collect();
        let mut chosen: Vec<&Symbol> = Vec::with_capacity(domains.len());
        enumerate_bindings(&domains, &mut chosen, &mut |args| {
            let binding: BTreeMap<&Symbol, &Symbol> =
                op.parameters().iter().map(|p| &p.name).zip(args.iter().copied()).collect();
            let inst = |set: &BTreeSet<Predicate>| -> Option<Vec<Predicate>> {
                set.iter().map(|p| p.substitute(&binding)).collect()
            };
            if let (Some(pre), Some(add), Some(del)) =
                (inst(op.preconditions()), inst(op.add_effects()), inst(op.delete_effects()))
            {
                candidates.push(Candidate {
                    name: op.name().clone(),
                    args: args.iter().map(|s| (*s).clone()).collect(),
                    pre,
                    add,
                    del,
                });
            }
        });
    }

    // relaxed reachability fixpoint
    let mut reachable: BTreeSet<Predicate> = init.iter().cloned().collect();
    let mut live = alloc::vec![false; candidates.len()];
    loop {
        let mut changed = false;
        for (i, c) in candidates.iter().enumerate() {
            if !live[i] && c.pre.iter().all(|p| reachable.contains(p)) {
                live[i] = true;
                changed = true;
                reachable.extend(c.add.iter().cloned());
            }
        }
        if !changed {
            break;
        }
    }

    let actions = candidates.into_iter().zip(live).filter(|(_, l)| *l).map(|(mut c, _)| {
        c.del.retain(|d| reachable.contains(d));
        (c.name, c.args, c.pre, c.add, c.del)
    });
    Ok(GroundedTask::from_parts(reachable.iter().cloned(), actions, init, goal))
}

fn enumerate_bindings<'a>(
    domains: &[Vec<&'a Symbol>],
    chosen: &mut Vec<&'a Symbol>,
    emit: &mut impl FnMut(&[&'a Symbol]),
) {
    if chosen.len() == domains.len() {
        emit(chosen);
        return;
    }
    for &s in &domains[chosen.len()] {
        if chosen.contains(&s) {
            continue;
        }
        chosen.push(s);
        enumerate_bindings(domains, chosen, emit);
        chosen.pop();
    }
}

/// Applies `plan` step by step from the initial state. True iff every step
/// is applicable when reached and the final state satisfies the goal.
pub fn validate(plan: &Plan, task: &GroundedTask) -> bool {
    let mut state = task.init.clone();
    for step in &plan.steps {
        let Some(action) = task.actions.get(step.action) else { return false };
        if action.name != step.name || action.args != step.args || !action.is_applicable(&state) {
            return false;
        }
        action.apply_in_place(&mut state);
    }
    task.is_goal(&state)
}

/// Resolves named steps against a task, e.g. a plan read from an external
/// planner.
pub fn resolve_steps(task: &GroundedTask, steps: &[(Symbol, Vec<Symbol>)]) -> Option<Vec<PlanStep>> {
    steps
        .iter()
        .map(|(name, args)| {
            task.find_action(name.as_str(), args).map(|action| PlanStep {
                action,
                name: name.clone(),
                args: args.clone(),
            })
        })
        .collect()
}
