//! Delegating micro problems to an external PDDL planner.
//!
//! The command template is split on whitespace; `{domain}`, `{problem}` and
//! `{plan_out}` are replaced by paths in a fresh temporary directory.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use thiserror::Error;

use foonplan_core::micro::{emit_micro_domain, MicroProblem, TypedSymbol};
use foonplan_core::planner::{resolve_steps, validate, GroundedTask, Plan, SearchStats};

use crate::formats::{parse_pddl_plan, FormatError};

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("external planner command is empty")]
    EmptyCommand,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("external planner failed ({status}): {stderr}")]
    ExternalPlannerFailed { status: String, stderr: String },
    #[error("plan file: {0}")]
    PlanFile(#[from] FormatError),
    #[error("plan names an action that is not in the grounded task")]
    UnknownAction,
    #[error("plan does not validate against the task")]
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalPlanner {
    pub command: String,
}

impl ExternalPlanner {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalPlanner { command: command.into() }
    }

    fn argv(&self, domain: &Path, problem: &Path, plan_out: &Path) -> Vec<String> {
        self.command
            .split_whitespace()
            .map(|w| {
                w.replace("{domain}", &domain.to_string_lossy())
                    .replace("{problem}", &problem.to_string_lossy())
                    .replace("{plan_out}", &plan_out.to_string_lossy())
            })
            .collect()
    }

    /// Writes the files, runs the command and validates the plan it writes.
    pub fn solve_text(&self, task: &GroundedTask, domain: &str, problem: &str) -> Result<Plan, ExternalError> {
        let dir = tempfile::tempdir()?;
        let (d, p, out) = (dir.path().join("domain.pddl"), dir.path().join("problem.pddl"), dir.path().join("plan.txt"));
        std::fs::write(&d, domain)?;
        std::fs::write(&p, problem)?;
        let argv = self.argv(&d, &p, &out);
        let (prog, args) = argv.split_first().ok_or(ExternalError::EmptyCommand)?;
        let start = Instant::now();
        let output = Command::new(prog).args(args).current_dir(dir.path()).output()?;
        if !output.status.success() {
            return Err(ExternalError::ExternalPlannerFailed {
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            });
        }
        let named = parse_pddl_plan(&std::fs::read_to_string(&out)?)?;
        let steps = resolve_steps(task, &named).ok_or(ExternalError::UnknownAction)?;
        let plan = Plan::from_steps(steps, SearchStats { wall_time: start.elapsed(), ..Default::default() });
        if !validate(&plan, task) {
            return Err(ExternalError::Invalid);
        }
        Ok(plan)
    }

    pub fn solve(&self, task: &GroundedTask, problem: &MicroProblem, objects: &[TypedSymbol]) -> Result<Plan, ExternalError> {
        self.solve_text(task, &emit_micro_domain().text, &problem.to_pddl(objects).text)
    }
}
