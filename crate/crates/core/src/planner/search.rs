//! A* with lazy duplicate detection.
//!
//! Open entries only record the parent and the action; the child state is
//! rebuilt when the entry is popped. Only expanded states are stored, in one
//! flat word arena indexed by a hash table. Ties on `f` go to the lower `h`,
//! then to the earlier insertion.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::hash::BuildHasher;
use core::time::Duration;

use hashbrown::{DefaultHashBuilder, HashTable};

use super::heuristic::HeuristicEvaluator;
use super::{FactSet, GroundedTask, Heuristic, Plan, PlanError, PlanStep, SearchConfig, SearchStats};

/// Wall-clock source for [`SearchStats::wall_time`].
pub trait Clock {
    /// Time since the clock was created.
    fn elapsed(&self) -> Duration;
}

/// Reports zero elapsed time. Used where no system clock exists.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

const ROOT: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
struct OpenEntry {
    // f << 48 | h << 32 | seq
    key: u64,
    parent: u32,
    action: u32,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Expanded states: word arena plus back pointers.
struct Closed {
    words: usize,
    arena: Vec<u64>,
    hashes: Vec<u64>,
    parent: Vec<u32>,
    action: Vec<u32>,
    g: Vec<u32>,
    table: HashTable<u32>,
    hasher: DefaultHashBuilder,
}

impl Closed {
    fn new(words: usize) -> Self {
        Closed {
            words,
            arena: Vec::new(),
            hashes: Vec::new(),
            parent: Vec::new(),
            action: Vec::new(),
            g: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
        }
    }

    fn state(&self, id: u32) -> &[u64] {
        let s = id as usize * self.words;
        &self.arena[s..s + self.words]
    }

    fn hash(&self, words: &[u64]) -> u64 {
        self.hasher.hash_one(words)
    }

    fn contains(&self, hash: u64, words: &[u64]) -> bool {
        self.table.find(hash, |&id| self.state(id) == words).is_some()
    }

    fn insert(&mut self, hash: u64, words: &[u64], parent: u32, action: u32, g: u32) -> u32 {
        let id = self.parent.len() as u32;
        self.arena.extend_from_slice(words);
        self.hashes.push(hash);
        self.parent.push(parent);
        self.action.push(action);
        self.g.push(g);
        let hashes = &self.hashes;
        self.table.insert_unique(hash, id, |&i| hashes[i as usize]);
        id
    }
}

/// Orders actions by one of their preconditions so that only actions keyed
/// on a true fact are tested.
struct Successors {
    by_key: Vec<Vec<u32>>,
    unconditional: Vec<u32>,
}

impl Successors {
    fn new(task: &GroundedTask) -> Self {
        let nf = task.facts().len();
        let mut uses = alloc::vec![0usize; nf];
        for a in task.actions() {
            for &p in &a.pre {
                uses[p as usize] += 1;
            }
        }
        let mut by_key = alloc::vec![Vec::new(); nf];
        let mut unconditional = Vec::new();
        for (ai, a) in task.actions().iter().enumerate() {
            match a.pre.iter().min_by_key(|&&p| (uses[p as usize], p)) {
                Some(&p) => by_key[p as usize].push(ai as u32),
                None => unconditional.push(ai as u32),
            }
        }
        Successors { by_key, unconditional }
    }

    fn applicable(&self, task: &GroundedTask, state: &FactSet, out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self.unconditional);
        for f in state.iter() {
            for &a in &self.by_key[f as usize] {
                if task.actions()[a as usize].is_applicable(state) {
                    out.push(a);
                }
            }
        }
        out.sort_unstable();
    }
}

fn pack(f: u32, h: u32, seq: u32) -> u64 {
    (u64::from(f.min(0xffff)) << 48) | (u64::from(h.min(0xffff)) << 32) | u64::from(seq)
}

pub fn astar(task: &GroundedTask, heuristic: Heuristic, config: &SearchConfig) -> Result<Plan, PlanError> {
    astar_with_clock(task, heuristic, config, &NoClock)
}

/// A* from the task's initial state. With `hmax` or `blind` the returned
/// plan is cost-optimal.
pub fn astar_with_clock(
    task: &GroundedTask,
    heuristic: Heuristic,
    config: &SearchConfig,
    clock: &dyn Clock,
) -> Result<Plan, PlanError> {
    let started = clock.elapsed();
    let mut stats = SearchStats::default();
    let mut eval = HeuristicEvaluator::new(task);
    let successors = Successors::new(task);
    let words = task.init().words().len();
    let mut closed = Closed::new(words);
    let mut open: BinaryHeap<OpenEntry> = BinaryHeap::new();
    let mut seq: u32 = 0;

    let Some(h0) = eval.evaluate(heuristic, task.init()) else {
        stats.wall_time = clock.elapsed() - started;
        return Err(PlanError::NoPlan(stats));
    };
    open.push(OpenEntry { key: pack(h0, h0, seq), parent: ROOT, action: ROOT });
    stats.generated = 1;

    let mut state = task.init().clone();
    let mut child = task.init().clone();
    let mut applicable = Vec::new();

    while let Some(entry) = open.pop() {
        let g = if entry.parent == ROOT {
            state.words_mut().copy_from_slice(task.init().words());
            0
        } else {
            state.words_mut().copy_from_slice(closed.state(entry.parent));
            task.actions()[entry.action as usize].apply_in_place(&mut state);
            closed.g[entry.parent as usize] + 1
        };
        let hash = closed.hash(state.words());
        if closed.contains(hash, state.words()) {
            continue;
        }
        if stats.expanded as usize >= config.node_budget {
            stats.wall_time = clock.elapsed() - started;
            return Err(PlanError::ResourceLimit(stats));
        }
        let id = closed.insert(hash, state.words(), entry.parent, entry.action, g);
        stats.expanded += 1;

        if task.is_goal(&state) {
            let mut steps = Vec::new();
            let mut cur = id;
            while closed.parent[cur as usize] != ROOT {
                let a = closed.action[cur as usize] as usize;
                let action = &task.actions()[a];
                steps.push(PlanStep { action: a, name: action.name.clone(), args: action.args.clone() });
                cur = closed.parent[cur as usize];
            }
            steps.reverse();
            stats.wall_time = clock.elapsed() - started;
            return Ok(Plan::from_steps(steps, stats));
        }

        successors.applicable(task, &state, &mut applicable);
        for &a in &applicable {
            child.words_mut().copy_from_slice(state.words());
            task.actions()[a as usize].apply_in_place(&mut child);
            let child_hash = closed.hash(child.words());
            if closed.contains(child_hash, child.words()) {
                continue;
            }
            let Some(h) = eval.evaluate(heuristic, &child) else { continue };
            seq = seq.wrapping_add(1);
            stats.generated += 1;
            open.push(OpenEntry { key: pack(g + 1 + h, h, seq), parent: id, action: a });
        }
    }
    stats.wall_time = clock.elapsed() - started;
    Err(PlanError::NoPlan(stats))
}
