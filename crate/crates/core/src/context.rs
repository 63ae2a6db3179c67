//! Action contexts: a micro-plan step together with its neighbours, bound to
//! a motion payload, and their generalization to object categories and
//! relative cell offsets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::Symbol;

pub type Cell = (i32, i32);

/// Label to category map. Labels missing from the map are their own
/// category; `cell_*` symbols fall into `cell`.
pub type CategoryMap = BTreeMap<Symbol, String>;

pub const NONE: &str = "none";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("step {0} has no target cell")]
    MissingTargetCell(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundStep {
    pub name: Symbol,
    pub args: Vec<Symbol>,
    pub target_cell: Option<Cell>,
}

impl GroundStep {
    pub fn new(name: Symbol, args: Vec<Symbol>, target_cell: Option<Cell>) -> Self {
        GroundStep { name, args, target_cell }
    }
}

impl fmt::Display for GroundStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Opaque motion parameters. Only `motion_id` is interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MotionPayload {
    pub motion_id: String,
    pub dmp_params: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionContext {
    pub prev: Option<GroundStep>,
    pub now: GroundStep,
    pub next: Option<GroundStep>,
    pub motion: MotionPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneralizedContext {
    /// Action names of (prev, now, next); `none` at plan boundaries.
    pub action_triple: [String; 3],
    pub arg_categories: [Vec<String>; 3],
    pub rel_prev: Cell,
    pub rel_next: Cell,
}

impl fmt::Display for GeneralizedContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{}", self.action_triple[i])?;
            for c in &self.arg_categories[i] {
                write!(f, " {c}")?;
            }
        }
        write!(
            f,
            " @ prev({},{}) next({},{})",
            self.rel_prev.0, self.rel_prev.1, self.rel_next.0, self.rel_next.1
        )
    }
}

pub fn category_of(label: &Symbol, categories: &CategoryMap) -> String {
    if let Some(c) = categories.get(label) {
        return c.clone();
    }
    if label.as_str().starts_with("cell_") {
        return String::from("cell");
    }
    label.as_str().to_string()
}

fn sub(a: Cell, b: Cell) -> Cell {
    (a.0 - b.0, a.1 - b.1)
}

/// Key of a (prev, now, next) window with `now`'s target as origin.
pub fn generalize_window(
    prev: Option<&GroundStep>,
    now: &GroundStep,
    next: Option<&GroundStep>,
    categories: &CategoryMap,
) -> Result<GeneralizedContext, ContextError> {
    let origin = now.target_cell.ok_or_else(|| ContextError::MissingTargetCell(now.to_string()))?;
    let offset = |s: Option<&GroundStep>| -> Result<Cell, ContextError> {
        match s {
            None => Ok((0, 0)),
            Some(s) => s
                .target_cell
                .map(|c| sub(c, origin))
                .ok_or_else(|| ContextError::MissingTargetCell(s.to_string())),
        }
    };
    let name = |s: Option<&GroundStep>| s.map_or_else(|| String::from(NONE), |s| s.name.as_str().to_string());
    let cats = |s: Option<&GroundStep>| -> Vec<String> {
        match s {
            None => alloc::vec![String::from(NONE)],
            Some(s) => s.args.iter().map(|a| category_of(a, categories)).collect(),
        }
    };
    Ok(GeneralizedContext {
        action_triple: [name(prev), name(Some(now)), name(next)],
        arg_categories: [cats(prev), cats(Some(now)), cats(next)],
        rel_prev: offset(prev)?,
        rel_next: offset(next)?,
    })
}

pub fn generalize(ac: &ActionContext, categories: &CategoryMap) -> Result<GeneralizedContext, ContextError> {
    generalize_window(ac.prev.as_ref(), &ac.now, ac.next.as_ref(), categories)
}

type ExactKey = (Option<GroundStep>, GroundStep, Option<GroundStep>);

/// Stored action contexts, looked up exactly first and by generalized key
/// second.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextLibrary {
    exact: BTreeMap<ExactKey, MotionPayload>,
    generalized: BTreeMap<GeneralizedContext, MotionPayload>,
}

/// Outcome of a lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Retrieved<'a> {
    Exact(&'a MotionPayload),
    Generalized(&'a MotionPayload),
    /// Nothing stored; a demonstration would be requested for this key.
    MissingDemonstration(GeneralizedContext),
}

impl<'a> Retrieved<'a> {
    pub fn payload(&self) -> Option<&'a MotionPayload> {
        match self {
            Retrieved::Exact(p) | Retrieved::Generalized(p) => Some(p),
            Retrieved::MissingDemonstration(_) => None,
        }
    }
}

impl ContextLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty() && self.generalized.is_empty()
    }

    /// Stores a context and, unless already present, its generalized key.
    pub fn insert(&mut self, ac: ActionContext, categories: &CategoryMap) -> Result<(), ContextError> {
        let key = generalize(&ac, categories)?;
        self.generalized.entry(key).or_insert_with(|| ac.motion.clone());
        self.exact.insert((ac.prev, ac.now, ac.next), ac.motion);
        Ok(())
    }

    /// Stores a payload under a generalized key only.
    pub fn insert_generalized(&mut self, key: GeneralizedContext, motion: MotionPayload) {
        self.generalized.insert(key, motion);
    }

    pub fn contexts(&self) -> impl Iterator<Item = ActionContext> + '_ {
        self.exact.iter().map(|((prev, now, next), m)| ActionContext {
            prev: prev.clone(),
            now: now.clone(),
            next: next.clone(),
            motion: m.clone(),
        })
    }

    pub fn generalized(&self) -> impl Iterator<Item = (&GeneralizedContext, &MotionPayload)> {
        self.generalized.iter()
    }

    pub fn retrieve(
        &self,
        prev: Option<&GroundStep>,
        now: &GroundStep,
        next: Option<&GroundStep>,
        categories: &CategoryMap,
    ) -> Result<Retrieved<'_>, ContextError> {
        let exact_key = (prev.cloned(), now.clone(), next.cloned());
        if let Some(m) = self.exact.get(&exact_key) {
            return Ok(Retrieved::Exact(m));
        }
        let key = generalize_window(prev, now, next, categories)?;
        Ok(match self.generalized.get(&key) {
            Some(m) => Retrieved::Generalized(m),
            None => Retrieved::MissingDemonstration(key),
        })
    }

    /// Records a synthetic demonstration for every window of `steps` that
    /// has no match yet. Returns how many contexts were added.
    pub fn record_demonstrations(&mut self, steps: &[GroundStep], categories: &CategoryMap) -> Result<usize, ContextError> {
        let mut added = 0;
        for (prev, now, next) in windows(steps) {
            if let Retrieved::MissingDemonstration(key) = self.retrieve(prev, now, next, categories)? {
                let motion = synthetic_payload(&key);
                self.insert(
                    ActionContext { prev: prev.cloned(), now: now.clone(), next: next.cloned(), motion },
                    categories,
                )?;
                added += 1;
            }
        }
        Ok(added)
    }
}

/// Sliding (prev, now, next) windows over a micro plan.
pub fn windows(steps: &[GroundStep]) -> impl Iterator<Item = (Option<&GroundStep>, &GroundStep, Option<&GroundStep>)> {
    (0..steps.len()).map(move |i| (i.checked_sub(1).map(|j| &steps[j]), &steps[i], steps.get(i + 1)))
}

/// Payload standing in for a recorded trajectory: an id derived from the
/// generalized key and the offsets as little-endian bytes.
pub fn synthetic_payload(key: &GeneralizedContext) -> MotionPayload {
    let mut dmp_params = Vec::with_capacity(16);
    for v in [key.rel_prev.0, key.rel_prev.1, key.rel_next.0, key.rel_next.1] {
        dmp_params.extend_from_slice(&v.to_le_bytes());
    }
    MotionPayload { motion_id: format!("{}:{}", key.action_triple[1], key), dmp_params }
}

/// A window without any stored motion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub step: usize,
    pub key: GeneralizedContext,
}

/// Retrieves a payload for every window of `steps`; all or nothing.
pub fn resolve_steps(
    library: &ContextLibrary,
    steps: &[GroundStep],
    categories: &CategoryMap,
) -> Result<Result<Vec<MotionPayload>, Vec<Gap>>, ContextError> {
    let mut payloads = Vec::with_capacity(steps.len());
    let mut gaps = Vec::new();
    for (i, (prev, now, next)) in windows(steps).enumerate() {
        match library.retrieve(prev, now, next, categories)? {
            Retrieved::Exact(m) | Retrieved::Generalized(m) => payloads.push(m.clone()),
            Retrieved::MissingDemonstration(key) => gaps.push(Gap { step: i, key }),
        }
    }
    Ok(if gaps.is_empty() { Ok(payloads) } else { Err(gaps) })
}
