//! Macro-level compilation: every functional unit becomes one ground
//! planning operator whose preconditions are the facts of its input nodes
//! and whose effects are the set difference against its output nodes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{FunctionalUnit, ObjectNode, TaskTree};
use crate::micro::SymbolType;
use crate::pddl::{self, PddlDocument, PddlKind};
use crate::predicate::{object_node_to_predicates, Predicate, PredicateError, State, Violation};
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error("two functional units compile to the operator name {0}")]
    NameCollision(Symbol),
    #[error("operator {0}: add and delete effects overlap")]
    OverlappingEffects(Symbol),
    #[error("initial state is inconsistent: {}", describe(.0))]
    InconsistentInit(Vec<Violation>),
}

fn describe(violations: &[Violation]) -> String {
    let mut out = String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(v.rule);
        for f in &v.facts {
            out.push_str(&format!(" {f}"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter {
    pub name: Symbol,
    pub ty: SymbolType,
}

/// A STRIPS operator with positive preconditions. Macro operators are ground
/// (no parameters); micro operators are lifted over `?`-prefixed variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanningOperator {
    name: Symbol,
    parameters: Vec<Parameter>,
    preconditions: BTreeSet<Predicate>,
    add_effects: BTreeSet<Predicate>,
    delete_effects: BTreeSet<Predicate>,
}

impl PlanningOperator {
    pub fn new(
        name: Symbol,
        parameters: Vec<Parameter>,
        preconditions: BTreeSet<Predicate>,
        add_effects: BTreeSet<Predicate>,
        delete_effects: BTreeSet<Predicate>,
    ) -> Result<Self, CompileError> {
        if !add_effects.is_disjoint(&delete_effects) {
            return Err(CompileError::OverlappingEffects(name));
        }
        Ok(PlanningOperator { name, parameters, preconditions, add_effects, delete_effects })
    }

    pub fn name(&self) -> &Symbol {
        &self.name
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn preconditions(&self) -> &BTreeSet<Predicate> {
        &self.preconditions
    }

    pub fn add_effects(&self) -> &BTreeSet<Predicate> {
        &self.add_effects
    }

    pub fn delete_effects(&self) -> &BTreeSet<Predicate> {
        &self.delete_effects
    }

    pub fn is_ground(&self) -> bool {
        self.parameters.is_empty()
    }

    /// STRIPS successor: `(state - delete) + add`.
    pub fn apply(&self, state: &State) -> State {
        let mut next = state.clone();
        for f in &self.delete_effects {
            next.remove(f);
        }
        next.extend(self.add_effects.iter().cloned());
        next
    }

    /// Every symbol mentioned by a ground operator.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.preconditions
            .iter()
            .chain(&self.add_effects)
            .chain(&self.delete_effects)
            .flat_map(|p| p.args().into_iter().cloned())
            .filter(|s| !s.is_variable())
            .collect()
    }
}

fn node_facts<'a>(nodes: impl IntoIterator<Item = &'a ObjectNode>) -> Result<BTreeSet<Predicate>, PredicateError> {
    let mut facts = BTreeSet::new();
    for node in nodes {
        facts.extend(object_node_to_predicates(node)?);
    }
    Ok(facts)
}

/// The object an operator is named after: the first ingredient gained by a
/// changed output node, else the first changed output node, else the first
/// output.
fn primary_object(unit: &FunctionalUnit) -> &Symbol {
    let changed: Vec<(&ObjectNode, Option<&ObjectNode>)> = unit
        .outputs()
        .iter()
        .map(|out| (out, unit.inputs().iter().find(|i| i.label() == out.label())))
        .filter(|(out, input)| input.map_or(true, |i| i != *out))
        .collect();
    for (out, input) in &changed {
        let gained = out
            .ingredients()
            .iter()
            .find(|ing| input.map_or(true, |i| !i.ingredients().contains(*ing)));
        if let Some(ing) = gained {
            return ing;
        }
    }
    changed.first().map_or(unit.outputs()[0].label(), |(out, _)| out.label())
}

/// Compiles one functional unit into `<motion>_<object>_<index>`.
pub fn compile_macro_po(unit: &FunctionalUnit, index: usize) -> Result<PlanningOperator, CompileError> {
    let name = Symbol::new(&format!("{}_{}_{}", unit.motion().label(), primary_object(unit), index))
        .expect("operator names are built from valid symbols");
    let pre = node_facts(unit.inputs())?;
    let post = node_facts(unit.outputs())?;
    let add = post.difference(&pre).cloned().collect();
    let del = pre.difference(&post).cloned().collect();
    PlanningOperator::new(name, Vec::new(), pre, add, del)
}

/// Compiles a task tree in execution order, naming each operator after the
/// unit's index in the source graph.
pub fn compile_task_tree(tree: &TaskTree) -> Result<Vec<PlanningOperator>, CompileError> {
    let mut ops: Vec<PlanningOperator> = Vec::with_capacity(tree.len());
    for (index, unit) in tree.iter() {
        let op = compile_macro_po(unit, index)?;
        if ops.iter().any(|o| o.name == op.name) {
            return Err(CompileError::NameCollision(op.name));
        }
        ops.push(op);
    }
    Ok(ops)
}

/// Initial state and goal of the macro-level problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroProblem {
    pub init: State,
    pub goal: BTreeSet<Predicate>,
}

impl MacroProblem {
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.init
            .iter()
            .chain(self.goal.iter())
            .flat_map(|p| p.args().into_iter().cloned())
            .collect()
    }
}

pub fn macro_problem<'a>(
    kitchen: impl IntoIterator<Item = &'a ObjectNode>,
    goal: &ObjectNode,
) -> Result<MacroProblem, CompileError> {
    let init: State = node_facts(kitchen)?.into_iter().collect();
    let violations = init.violations();
    if !violations.is_empty() {
        return Err(CompileError::InconsistentInit(violations));
    }
    Ok(MacroProblem { init, goal: object_node_to_predicates(goal)? })
}

pub const MACRO_DOMAIN: &str = "foon-macro";
pub const MACRO_PROBLEM: &str = "foon-macro-task";

/// Renders the macro domain. Operator names must be unique.
pub fn emit_macro_domain(ops: &[PlanningOperator], objects: &BTreeSet<Symbol>) -> PddlDocument {
    let mut constants: BTreeSet<Symbol> = objects.clone();
    for op in ops {
        constants.extend(op.symbols());
    }
    let attributes: BTreeSet<Symbol> = ops
        .iter()
        .flat_map(|o| o.preconditions.iter().chain(&o.add_effects).chain(&o.delete_effects))
        .filter_map(|p| match p {
            Predicate::Attribute { label, .. } => Some(label.clone()),
            _ => None,
        })
        .collect();
    let text = pddl::render_domain(&pddl::DomainSpec {
        name: MACRO_DOMAIN,
        types: &[("item", "object")],
        constants: constants.iter().map(|c| (c, "item")).collect(),
        attributes: attributes.iter().collect(),
        argument_type: "item",
        operators: ops,
    });
    PddlDocument { kind: PddlKind::Domain, name: Symbol::new(MACRO_DOMAIN).unwrap(), text }
}

pub fn emit_macro_problem<'a>(
    kitchen: impl IntoIterator<Item = &'a ObjectNode>,
    goal: &ObjectNode,
) -> Result<PddlDocument, CompileError> {
    let problem = macro_problem(kitchen, goal)?;
    let text = pddl::render_problem(&pddl::ProblemSpec {
        name: MACRO_PROBLEM,
        domain: MACRO_DOMAIN,
        objects: Vec::new(),
        init: problem.init.facts(),
        goal: &problem.goal,
    });
    Ok(PddlDocument { kind: PddlKind::Problem, name: Symbol::new(MACRO_PROBLEM).unwrap(), text })
}
