//! Delete-relaxation heuristics with unit action costs.

use alloc::vec::Vec;

use super::{FactSet, GroundedTask, Heuristic};

const UNSET: u32 = u32::MAX;

/// Reusable scratch space for evaluating h-max and h-FF on one task.
///
/// Costs are computed layer by layer: a fact first reached in layer `k`
/// costs `k`, and an action fires once its last precondition is popped.
pub struct HeuristicEvaluator<'t> {
    task: &'t GroundedTask,
    // actions listing fact f as a precondition: pre_of[pre_start[f]..pre_start[f+1]]
    pre_start: Vec<u32>,
    pre_of: Vec<u32>,
    no_pre: Vec<u32>,
    is_goal: Vec<bool>,
    epoch: u32,
    cost: Vec<u32>,
    cost_epoch: Vec<u32>,
    supporter: Vec<u32>,
    remaining: Vec<u32>,
    remaining_epoch: Vec<u32>,
    layer: Vec<u32>,
    next: Vec<u32>,
    marked_fact: Vec<u32>,
    marked_action: Vec<u32>,
    stack: Vec<u32>,
}

impl<'t> HeuristicEvaluator<'t> {
    pub fn new(task: &'t GroundedTask) -> Self {
        let nf = task.facts().len();
        let na = task.actions().len();
        let mut counts = alloc::vec![0u32; nf + 1];
        for a in task.actions() {
            for &p in &a.pre {
                counts[p as usize + 1] += 1;
            }
        }
        for i in 0..nf {
            counts[i + 1] += counts[i];
        }
        let pre_start = counts.clone();
        let mut fill = counts;
        let mut pre_of = alloc::vec![0u32; pre_start[nf] as usize];
        let mut no_pre = Vec::new();
        for (ai, a) in task.actions().iter().enumerate() {
            if a.pre.is_empty() {
                no_pre.push(ai as u32);
            }
            for &p in &a.pre {
                pre_of[fill[p as usize] as usize] = ai as u32;
                fill[p as usize] += 1;
            }
        }
        let mut is_goal = alloc::vec![false; nf];
        for &g in task.goal() {
            is_goal[g as usize] = true;
        }
        HeuristicEvaluator {
            task,
            pre_start,
            pre_of,
            no_pre,
            is_goal,
            epoch: 0,
            cost: alloc::vec![0; nf],
            cost_epoch: alloc::vec![0; nf],
            supporter: alloc::vec![UNSET; nf],
            remaining: alloc::vec![0; na],
            remaining_epoch: alloc::vec![0; na],
            layer: Vec::new(),
            next: Vec::new(),
            marked_fact: alloc::vec![0; nf],
            marked_action: alloc::vec![0; na],
            stack: Vec::new(),
        }
    }

    pub fn evaluate(&mut self, heuristic: Heuristic, state: &FactSet) -> Option<u32> {
        match heuristic {
            Heuristic::HMax => self.h_max(state),
            Heuristic::HFf => self.h_ff(state),
            Heuristic::Blind => {
                if self.task.is_goal(state) {
                    Some(0)
                } else {
                    Some(1)
                }
            }
        }
    }

    #[inline]
    fn cost_of(&self, f: u32) -> u32 {
        if self.cost_epoch[f as usize] == self.epoch {
            self.cost[f as usize]
        } else {
            UNSET
        }
    }

    #[inline]
    fn reach(&mut self, f: u32, cost: u32, supporter: u32, unreached_goals: &mut usize) {
        if self.cost_of(f) == UNSET {
            self.cost_epoch[f as usize] = self.epoch;
            self.cost[f as usize] = cost;
            self.supporter[f as usize] = supporter;
            self.next.push(f);
            if self.is_goal[f as usize] {
                *unreached_goals -= 1;
            }
        }
    }

    /// Fills costs and best supporters until every goal is reached or the
    /// relaxed graph levels off. Returns whether all goals were reached.
    fn explore(&mut self, state: &FactSet) -> bool {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.cost_epoch.fill(0);
            self.remaining_epoch.fill(0);
            self.marked_fact.fill(0);
            self.marked_action.fill(0);
            self.epoch = 1;
        }
        let task = self.task;
        let mut unreached = task.goal().len();
        self.next.clear();
        for f in state.iter() {
            self.reach(f, 0, UNSET, &mut unreached);
        }
        let mut level = 0u32;
        self.layer.clear();
        core::mem::swap(&mut self.layer, &mut self.next);
        // precondition-free actions fire in layer 0
        for i in 0..self.no_pre.len() {
            let a = self.no_pre[i];
            for &q in &task.actions()[a as usize].add {
                self.reach(q, 1, a, &mut unreached);
            }
        }
        while unreached > 0 && !(self.layer.is_empty() && self.next.is_empty()) {
            let layer = core::mem::take(&mut self.layer);
            for &f in &layer {
                let (s, e) = (self.pre_start[f as usize] as usize, self.pre_start[f as usize + 1] as usize);
                for k in s..e {
                    let a = self.pre_of[k];
                    let ai = a as usize;
                    if self.remaining_epoch[ai] != self.epoch {
                        self.remaining_epoch[ai] = self.epoch;
                        self.remaining[ai] = task.actions()[ai].pre.len() as u32;
                    }
                    self.remaining[ai] -= 1;
                    if self.remaining[ai] == 0 {
                        for &q in &task.actions()[ai].add {
                            self.reach(q, level + 1, a, &mut unreached);
                        }
                    }
                }
            }
            self.layer = layer;
            self.layer.clear();
            core::mem::swap(&mut self.layer, &mut self.next);
            level += 1;
        }
        self.layer.clear();
        self.next.clear();
        unreached == 0
    }

    /// Maximum over goal facts of their relaxed first-achievement cost;
    /// `None` when some goal is relaxed-unreachable.
    pub fn h_max(&mut self, state: &FactSet) -> Option<u32> {
        if !self.explore(state) {
            return None;
        }
        Some(self.task.goal().iter().map(|&g| self.cost_of(g)).max().unwrap_or(0))
    }

    /// Number of distinct actions in a relaxed plan built from h-max best
    /// supporters; `None` when some goal is relaxed-unreachable.
    pub fn h_ff(&mut self, state: &FactSet) -> Option<u32> {
        if !self.explore(state) {
            return None;
        }
        let task = self.task;
        let mut count = 0;
        self.stack.clear();
        self.stack.extend_from_slice(task.goal());
        while let Some(f) = self.stack.pop() {
            let fi = f as usize;
            if self.marked_fact[fi] == self.epoch || self.cost_of(f) == 0 {
                continue;
            }
            self.marked_fact[fi] = self.epoch;
            let a = self.supporter[fi] as usize;
            if self.marked_action[a] != self.epoch {
                self.marked_action[a] = self.epoch;
                count += 1;
                self.stack.extend_from_slice(&task.actions()[a].pre);
            }
        }
        Some(count)
    }

    /// The relaxed plan behind the last [`HeuristicEvaluator::h_ff`] call,
    /// ordered by supporter cost so that it can be replayed.
    pub fn relaxed_plan(&mut self, state: &FactSet) -> Option<Vec<usize>> {
        self.h_ff(state)?;
        let mut plan: Vec<(u32, usize)> = (0..self.task.actions().len())
            .filter(|&a| self.marked_action[a] == self.epoch)
            .map(|a| {
                let c = self.task.actions()[a].pre.iter().map(|&p| self.cost_of(p)).max().unwrap_or(0);
                (c, a)
            })
            .collect();
        plan.sort_unstable();
        Some(plan.into_iter().map(|(_, a)| a).collect())
    }
}

pub fn h_max(state: &FactSet, task: &GroundedTask) -> Option<u32> {
    HeuristicEvaluator::new(task).h_max(state)
}

pub fn h_ff(state: &FactSet, task: &GroundedTask) -> Option<u32> {
    HeuristicEvaluator::new(task).h_ff(state)
}
