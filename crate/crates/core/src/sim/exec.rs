use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::compiler::PlanningOperator;
use crate::context::{Cell as Coord, GroundStep};
use crate::micro::{binding, micro_domain};
use crate::predicate::Predicate;
use crate::Symbol;

use super::scene::{scene_to_state, Location, Orientation, Scene};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown micro action {0}")]
    UnknownAction(Symbol),
    #[error("{action} takes {expected} arguments, got {got}")]
    Arity { action: Symbol, expected: usize, got: usize },
    #[error("argument {arg} of {action} has the wrong type")]
    ArgumentType { action: Symbol, arg: Symbol },
    #[error("preconditions of {} violated: {}", .step, list(.facts))]
    PreconditionViolated { step: String, facts: Vec<Predicate> },
}

fn list(facts: &[Predicate]) -> String {
    let mut s = String::new();
    for (i, f) in facts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&alloc::format!("{f}"));
    }
    s
}

fn catalog_op(name: &Symbol) -> Result<PlanningOperator, SimError> {
    micro_domain().into_iter().find(|o| o.name() == name).ok_or_else(|| SimError::UnknownAction(name.clone()))
}

/// Checks arity, argument types and preconditions of `step` in `scene`.
fn check(scene: &Scene, step: &GroundStep) -> Result<(), SimError> {
    let op = catalog_op(&step.name)?;
    if op.parameters().len() != step.args.len() {
        return Err(SimError::Arity { action: step.name.clone(), expected: op.parameters().len(), got: step.args.len() });
    }
    let types: BTreeMap<Symbol, _> = scene.typed_symbols().into_iter().map(|t| (t.name, t.ty)).collect();
    for (p, a) in op.parameters().iter().zip(&step.args) {
        if !types.get(a).is_some_and(|t| t.is_a(p.ty)) {
            return Err(SimError::ArgumentType { action: step.name.clone(), arg: a.clone() });
        }
    }
    let state = scene_to_state(scene);
    let b = binding(&op, &step.args);
    let mut missing = Vec::new();
    for pre in op.preconditions() {
        match pre.substitute(&b) {
            Some(f) if state.contains(&f) => {}
            Some(f) => missing.push(f),
            None => missing.push(pre.clone()),
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(SimError::PreconditionViolated { step: alloc::format!("{step}"), facts: missing })
    }
}

fn take_from_support(scene: &mut Scene, obj: &Symbol) {
    if let Some(c) = scene.cell_of_occupant(obj) {
        scene.cells[c].occupant = None;
    }
    scene.stacks.remove(obj);
}

/// Executes one micro action on the scene.
pub fn apply_action(scene: &Scene, step: &GroundStep) -> Result<Scene, SimError> {
    check(scene, step)?;
    let mut next = scene.clone();
    let a = &step.args;
    match step.name.as_str() {
        "pick" => {
            take_from_support(&mut next, &a[0]);
            next.gripper = Some(a[0].clone());
        }
        "place-small" | "place-large" => {
            let c = next.cell_index(&a[1]).expect("surface argument is a cell");
            next.cells[c].occupant = Some(a[0].clone());
            next.gripper = None;
        }
        "pour-all" => {
            next.object_mut(&a[1]).expect("source").contents.remove(&a[0]);
            next.object_mut(&a[2]).expect("target").contents.insert(a[0].clone());
        }
        "pour-some" | "sprinkle" => {
            next.object_mut(&a[2]).expect("target").contents.insert(a[0].clone());
        }
        "mix" => next.object_mut(&a[1]).expect("container").mixed = true,
        "insert" => {
            next.gripper = None;
            next.object_mut(&a[1]).expect("target").contents.insert(a[0].clone());
        }
        "flip" => next.object_mut(&a[0]).expect("container").orientation = Orientation::Upright,
        _ => return Err(SimError::UnknownAction(step.name.clone())),
    }
    Ok(next)
}

/// Cell where `step` acts: the pick origin for `pick` and `flip`, the
/// destination for `place-*`, the receiving object otherwise. `pick_origin`
/// is the origin of the last pick.
pub fn target_cell(scene: &Scene, step: &GroundStep, pick_origin: Option<Coord>) -> Option<Coord> {
    let a = &step.args;
    match step.name.as_str() {
        "pick" => scene.coord_of(&a[0]),
        "place-small" | "place-large" => scene.coord_of(&a[1]),
        "flip" => pick_origin,
        "pour-all" | "pour-some" | "sprinkle" => scene.coord_of(&a[2]),
        "mix" | "insert" => scene.coord_of(&a[1]),
        _ => None,
    }
}

/// Runs `steps` from `scene`, filling in target cells. Returns the annotated
/// steps and the final scene.
pub fn annotate_targets(scene: &Scene, steps: &[GroundStep]) -> Result<(Vec<GroundStep>, Scene), SimError> {
    let mut cur = scene.clone();
    let mut out = Vec::with_capacity(steps.len());
    let mut origin = None;
    for step in steps {
        let cell = target_cell(&cur, step, origin);
        if step.name.as_str() == "pick" {
            origin = cell;
        }
        let mut s = step.clone();
        s.target_cell = cell;
        cur = apply_action(&cur, &s)?;
        out.push(s);
    }
    Ok((out, cur))
}

/// True iff `label` rests on a cell or on another object.
pub fn is_supported(scene: &Scene, label: &Symbol) -> bool {
    matches!(scene.location(label), Location::Cell(_) | Location::StackedOn(_))
}
