//! The hierarchical versus monolithic timing grid, run on a worker pool,
//! and its CSV and gnuplot output.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use foonplan_core::bench::{ordering_flags, run_cell, CellOutcome, Mode};
use foonplan_core::compiler::PlanningOperator;
use foonplan_core::graph::{FoonGraph, ObjectNode};
use foonplan_core::planner::{Clock, Heuristic, SearchConfig};
use foonplan_core::sim::{prepare, Failure, Scene, TrialMode};

/// Wall clock started when a grid cell begins.
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub n_range: RangeInclusive<usize>,
    pub heuristics: Vec<Heuristic>,
    pub trials: usize,
    pub search: SearchConfig,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_range: 1..=usize::MAX,
            heuristics: vec![Heuristic::HMax, Heuristic::HFf],
            trials: 1,
            search: SearchConfig::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {}", .0.stage.as_str(), .0.reason)]
    Pipeline(Failure),
    #[error("n_range {first}..={last} outside the task tree's 1..={len} units")]
    Range { first: usize, last: usize, len: usize },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub mode: Mode,
    pub heuristic: Heuristic,
    /// None when the cell was skipped after a smaller `n` ran out of budget.
    pub mean_time: Option<Duration>,
    pub mean_expanded: Option<f64>,
    pub mean_generated: Option<f64>,
    pub outcome: CellOutcome,
    pub valid: bool,
    /// Ordering flags raised on the (first trial's) plan.
    pub flags: usize,
}

impl Row {
    pub fn measured(&self) -> bool {
        self.mean_expanded.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<Row>,
    pub trials: usize,
}

impl TimingReport {
    pub fn row(&self, n: usize, mode: Mode, heuristic: Heuristic) -> Option<&Row> {
        self.rows.iter().find(|r| r.n == n && r.mode == mode && r.heuristic == heuristic)
    }
}

fn run_series(ops: &[PlanningOperator], scene: &Scene, mode: Mode, h: Heuristic, cfg: &BenchConfig) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut exhausted = false;
    for n in cfg.n_range.clone() {
        if exhausted {
            // a larger problem cannot fit a budget a smaller one exhausted
            rows.push(Row {
                n,
                mode,
                heuristic: h,
                mean_time: None,
                mean_expanded: None,
                mean_generated: None,
                outcome: CellOutcome::ResourceLimit,
                valid: true,
                flags: 0,
            });
            continue;
        }
        let mut time = Duration::ZERO;
        let (mut expanded, mut generated) = (0u64, 0u64);
        let mut outcome = CellOutcome::Solved;
        let mut valid = true;
        let mut flags = 0;
        for t in 0..cfg.trials {
            let run = run_cell(ops, scene, n, mode, h, &cfg.search, &StdClock::start());
            time += run.wall_time;
            expanded += run.expanded;
            generated += run.generated;
            valid &= run.valid;
            if run.outcome != CellOutcome::Solved {
                outcome = run.outcome;
            }
            if t == 0 {
                flags = ordering_flags(&run.steps).len();
            }
        }
        let k = cfg.trials as f64;
        exhausted = outcome == CellOutcome::ResourceLimit;
        rows.push(Row {
            n,
            mode,
            heuristic: h,
            mean_time: Some(time / cfg.trials as u32),
            mean_expanded: Some(expanded as f64 / k),
            mean_generated: Some(generated as f64 / k),
            outcome,
            valid,
            flags,
        });
    }
    rows
}

/// Runs every (n, mode, heuristic) cell over the compiled operators. Each
/// (mode, heuristic) series runs in increasing `n` on one worker.
pub fn run_grid(ops: &[PlanningOperator], scene: &Scene, cfg: &BenchConfig) -> Result<TimingReport, BenchError> {
    let (first, last) = (*cfg.n_range.start(), *cfg.n_range.end());
    if first == 0 || last > ops.len() || first > last {
        return Err(BenchError::Range { first, last, len: ops.len() });
    }
    let series: Vec<(Mode, Heuristic)> =
        Mode::ALL.iter().flat_map(|&m| cfg.heuristics.iter().map(move |&h| (m, h))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let mut rows: Vec<Row> = pool.install(|| {
        series.par_iter().flat_map_iter(|&(m, h)| run_series(ops, scene, m, h, cfg)).collect()
    });
    let order = |h: Heuristic| cfg.heuristics.iter().position(|&x| x == h);
    rows.sort_by_key(|r| (r.n, r.mode, order(r.heuristic)));
    Ok(TimingReport { rows, trials: cfg.trials })
}

/// Retrieves the task tree for `goal` from the scene's objects and runs
/// the grid over it. An unbounded `n_range` end is clipped to the tree.
pub fn run_comparison(
    foon: &FoonGraph,
    goal: &ObjectNode,
    scene: &Scene,
    cfg: &BenchConfig,
) -> Result<TimingReport, BenchError> {
    let (ops, _) = prepare(foon, goal, scene, TrialMode::Whole).map_err(BenchError::Pipeline)?;
    let mut cfg = cfg.clone();
    if *cfg.n_range.end() == usize::MAX {
        cfg.n_range = *cfg.n_range.start()..=ops.len();
    }
    run_grid(&ops, scene, &cfg)
}

pub const CSV_HEADER: &str = "n,mode,heuristic,mean_time,mean_expanded,outcome";

/// CSV rows in grid order. Skipped cells leave the measurement columns
/// empty.
pub fn emit_csv(report: &TimingReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# hierarchical vs monolithic micro planning, {} trial(s) per cell", report.trials);
    out.push_str("# mean_time in seconds; plot mean_time and mean_expanded on a log scale\n");
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in &report.rows {
        let time = r.mean_time.map(|t| format!("{:.6}", t.as_secs_f64())).unwrap_or_default();
        let expanded = r.mean_expanded.map(|e| format!("{e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{time},{expanded},{}",
            r.n,
            r.mode.as_str(),
            r.heuristic.as_str(),
            r.outcome.as_str()
        );
    }
    out
}

/// gnuplot script plotting `csv` with one line per (mode, heuristic).
pub fn gnuplot_script(csv: &str, heuristics: &[Heuristic]) -> String {
    let mut out = String::new();
    out.push_str("set datafile separator ','\nset logscale y\nset key left top\n");
    out.push_str("set xlabel 'functional units'\nset ylabel 'mean expanded nodes'\n");
    let mut plots = Vec::new();
    for m in Mode::ALL {
        for h in heuristics {
            plots.push(format!(
                "'{csv}' using 1:(strcol(2) eq '{m}' && strcol(3) eq '{h}' ? $5 : 1/0) with linespoints title '{m} {h}'",
                m = m.as_str(),
                h = h.as_str()
            ));
        }
    }
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use foonplan_core::recipes;
    use foonplan_core::sim::standard_scene;

    fn small() -> BenchConfig {
        BenchConfig { n_range: 1..=2, heuristics: vec![Heuristic::HMax], ..Default::default() }
    }

    #[test]
    fn grid_cardinality_and_order() {
        let scene = standard_scene();
        let report = run_comparison(&recipes::bloody_mary_graph(), &recipes::bloody_mary_goal(), &scene, &small()).unwrap();
        assert_eq!(report.rows.len(), 2 * 2);
        let keys: Vec<(usize, Mode)> = report.rows.iter().map(|r| (r.n, r.mode)).collect();
        assert_eq!(keys, [(1, Mode::Hierarchical), (1, Mode::Monolithic), (2, Mode::Hierarchical), (2, Mode::Monolithic)]);
        assert!(report.rows.iter().all(|r| r.outcome == CellOutcome::Solved && r.valid));
        let csv = emit_csv(&report);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
    }

    #[test]
    fn csv_counts_are_deterministic() {
        let scene = standard_scene();
        let strip = |csv: String| -> Vec<String> {
            csv.lines()
                .map(|l| {
                    let mut f: Vec<&str> = l.split(',').collect();
                    if f.len() == 6 {
                        f[3] = "";
                    }
                    f.join(",")
                })
                .collect()
        };
        let mut cfg = small();
        cfg.workers = 2;
        let run = || emit_csv(&run_comparison(&recipes::bloody_mary_graph(), &recipes::bloody_mary_goal(), &scene, &cfg).unwrap());
        assert_eq!(strip(run()), strip(run()));
    }

    #[test]
    fn skip_after_resource_limit() {
        let scene = standard_scene();
        let mut cfg = small();
        cfg.n_range = 1..=3;
        cfg.search.node_budget = 10;
        let report = run_comparison(&recipes::bloody_mary_graph(), &recipes::bloody_mary_goal(), &scene, &cfg).unwrap();
        let mono: Vec<&Row> = report.rows.iter().filter(|r| r.mode == Mode::Monolithic).collect();
        assert_eq!(mono[1].outcome, CellOutcome::ResourceLimit);
        assert!(mono[1].measured());
        assert!(!mono[2].measured());
        assert!(emit_csv(&report).contains("3,monolithic,hmax,,,resource_limit"));
    }

    #[test]
    fn range_beyond_tree_rejected() {
        let scene = standard_scene();
        let mut cfg = small();
        cfg.n_range = 1..=40;
        assert!(matches!(
            run_comparison(&recipes::bloody_mary_graph(), &recipes::bloody_mary_goal(), &scene, &cfg),
            Err(BenchError::Range { .. })
        ));
    }

    #[test]
    fn plot_stub_has_log_scale() {
        let s = gnuplot_script("bench.csv", &[Heuristic::HMax, Heuristic::HFf]);
        assert!(s.contains("set logscale y"));
        assert_eq!(s.matches("with linespoints").count(), 4);
    }
}
