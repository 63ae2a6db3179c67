//! `foonc`: validate, merge and retrieve FOON subgraphs, compile them to
//! PDDL, plan and execute micro plans, and run the planning benchmark.
//!
//! Exit codes: 0 ok, 1 parse or input error, 2 retrieval or compilation,
//! 3 planning, 4 execution.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};

use foonplan::bench::{emit_csv, gnuplot_script, run_comparison, BenchConfig};
use foonplan::config::{check_paths, parse_heuristic, Config, CONFIG_ENV};
use foonplan::external::ExternalPlanner;
use foonplan::foon::{parse_kitchen, parse_subgraph, serialize_subgraph, Diagnostic, Severity};
use foonplan::formats::{
    categories_from_json, library_from_json, library_to_json, plan_from_json, plan_table, plan_to_json, report_table,
    report_to_json, scene_from_json,
};
use foonplan_core::compiler::{compile_task_tree, emit_macro_domain, emit_macro_problem, macro_problem};
use foonplan_core::context::{CategoryMap, ContextLibrary};
use foonplan_core::graph::{merge_subgraphs, retrieve_task_tree, FoonGraph, ObjectNode};
use foonplan_core::micro::emit_micro_domain;
use foonplan_core::planner::{astar, Heuristic, SearchConfig, DEFAULT_NODE_BUDGET};
use foonplan_core::recipes::default_categories;
use foonplan_core::sim::{
    execute_plan, plan_recipe_with, prepare_from, random_scene_with, standard_scene, Failure, RandomSceneConfig, Scene,
    Stage, TrialMode,
};

#[derive(Parser)]
#[command(name = "foonc", version, about = "FOON to PDDL compiler, planner and symbolic executor")]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default, Clone)]
struct Common {
    /// FOON subgraph files, merged in order.
    #[arg(long, num_args = 1..)]
    foon: Vec<PathBuf>,
    #[arg(long)]
    kitchen: Option<PathBuf>,
    /// Goal object label.
    #[arg(long)]
    goal: Option<String>,
    /// Scene JSON; defaults to a random scene for --seed, else the standard layout.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    heuristic: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long)]
    external_planner: Option<String>,
    /// Expanded-node budget per search.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse subgraph and kitchen files and report diagnostics.
    Validate {
        files: Vec<PathBuf>,
        #[arg(long)]
        kitchen: Vec<PathBuf>,
    },
    /// Merge subgraphs into one graph.
    Merge(Common),
    /// Retrieve the task tree for a goal.
    Retrieve(Common),
    /// Write macro domain, macro problem and micro domain PDDL.
    Compile(Common),
    /// Plan every macro operator at the micro level.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Drop a seeded subset of ingredient transfers.
        #[arg(long)]
        partial: Option<u64>,
        /// Also write a library demonstrating every step of the plan.
        #[arg(long)]
        emit_library: bool,
    },
    /// Resolve action contexts and run a plan symbolically.
    Execute {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Time hierarchical against monolithic planning.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated heuristics.
        #[arg(long, value_delimiter = ',')]
        heuristics: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

struct Fail {
    code: u8,
    err: anyhow::Error,
}

type Res<T> = Result<T, Fail>;

trait ExitWith<T> {
    fn exit(self, code: u8) -> Res<T>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit(self, code: u8) -> Res<T> {
        self.map_err(|e| Fail { code, err: e.into() })
    }
}

fn fail<T>(code: u8, msg: impl Into<String>) -> Res<T> {
    Err(Fail { code, err: anyhow!(msg.into()) })
}

fn stage_code(stage: Stage) -> u8 {
    match stage {
        Stage::Retrieval | Stage::Compile => 2,
        Stage::MicroProblem | Stage::Planning => 3,
        Stage::Context | Stage::Execution | Stage::Goal => 4,
    }
}

fn from_failure<T>(f: Failure) -> Res<T> {
    fail(stage_code(f.stage), format!("{}: {}", f.stage.as_str(), f.reason))
}

/// Config values with flags applied.
struct Settings {
    cfg: Config,
    foon: Vec<PathBuf>,
    kitchen: Option<PathBuf>,
    goal: Option<String>,
    scene: Option<PathBuf>,
    library: Option<PathBuf>,
    out: Option<PathBuf>,
    heuristic: Heuristic,
    search: SearchConfig,
    seed: Option<u64>,
    external: Option<ExternalPlanner>,
}

fn settings(config: Option<&Path>, c: &Common) -> Res<Settings> {
    let cfg = match config {
        Some(p) => Config::load(p).exit(1)?,
        None => Config::default(),
    };
    let heuristic = match c.heuristic.as_ref().or(cfg.heuristic.as_ref()) {
        Some(h) => parse_heuristic(h).exit(1)?,
        None => Heuristic::HMax,
    };
    let node_budget = c.budget.or(cfg.node_budget).unwrap_or(DEFAULT_NODE_BUDGET);
    if node_budget == 0 {
        return fail(1, "budget must be at least 1");
    }
    let s = Settings {
        foon: if c.foon.is_empty() { cfg.foon.clone() } else { c.foon.clone() },
        kitchen: c.kitchen.clone().or_else(|| cfg.kitchen.clone()),
        goal: c.goal.clone().or_else(|| cfg.goal.clone()),
        scene: c.scene.clone().or_else(|| cfg.scene.clone()),
        library: c.library.clone().or_else(|| cfg.library.clone()),
        out: c.out.clone().or_else(|| cfg.out.clone()),
        heuristic,
        search: SearchConfig { node_budget },
        seed: c.seed.or(cfg.seed),
        external: c.external_planner.clone().or_else(|| cfg.external_planner_cmd.clone()).map(ExternalPlanner::new),
        cfg,
    };
    let inputs = s.foon.iter().chain(&s.kitchen).chain(&s.scene).chain(&s.library).chain(&s.cfg.categories);
    check_paths(inputs.map(PathBuf::as_path)).exit(1)?;
    Ok(s)
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).exit(1)
}

fn print_diags(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{}: {}: {}", path.display(), d.line, d.severity, d.message);
    }
}

fn load_graph(paths: &[PathBuf]) -> Res<FoonGraph> {
    if paths.is_empty() {
        return fail(1, "no FOON files given (--foon)");
    }
    let mut graphs = Vec::new();
    for p in paths {
        match parse_subgraph(&read(p)?) {
            Ok(parsed) => {
                print_diags(p, &parsed.warnings);
                graphs.push(parsed.value);
            }
            Err(diags) => {
                print_diags(p, &diags);
                return fail(1, format!("{} does not parse", p.display()));
            }
        }
    }
    Ok(merge_subgraphs(&graphs))
}

fn load_kitchen(path: &Path) -> Res<Vec<ObjectNode>> {
    match parse_kitchen(&read(path)?) {
        Ok(parsed) => {
            print_diags(path, &parsed.warnings);
            Ok(parsed.value)
        }
        Err(diags) => {
            print_diags(path, &diags);
            fail(1, format!("{} does not parse", path.display()))
        }
    }
}

fn load_scene(s: &Settings) -> Res<Scene> {
    if let Some(p) = &s.scene {
        return scene_from_json(&read(p)?).with_context(|| format!("scene {}", p.display())).exit(1);
    }
    Ok(match s.seed {
        Some(seed) => {
            let d = RandomSceneConfig::default();
            let probs = RandomSceneConfig {
                upside_down: s.cfg.upside_down_probability.unwrap_or(d.upside_down),
                stack: s.cfg.stack_probability.unwrap_or(d.stack),
            };
            random_scene_with(seed, &probs)
        }
        None => standard_scene(),
    })
}

fn load_categories(s: &Settings) -> Res<CategoryMap> {
    match &s.cfg.categories {
        Some(p) => categories_from_json(&read(p)?).with_context(|| format!("categories {}", p.display())).exit(1),
        None => Ok(default_categories()),
    }
}

/// The goal node: a marked candidate or output of the graph, else a kitchen
/// object with that label.
fn resolve_goal(graph: &FoonGraph, kitchen: &[ObjectNode], label: Option<&str>) -> Res<ObjectNode> {
    let Some(label) = label else {
        return fail(1, "no goal given (--goal)");
    };
    graph
        .find_goal(label)
        .or_else(|| kitchen.iter().find(|n| n.label().as_str() == label))
        .cloned()
        .ok_or_else(|| Fail { code: 2, err: anyhow!("goal {label} does not appear in the graph or the kitchen") })
}

fn require_kitchen(s: &Settings) -> Res<Vec<ObjectNode>> {
    match &s.kitchen {
        Some(p) => load_kitchen(p),
        None => fail(1, "no kitchen given (--kitchen)"),
    }
}

fn write_out(dir: &Path, name: &str, text: &str) -> Res<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).exit(1)?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display())).exit(1)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(files: &[PathBuf], kitchens: &[PathBuf]) -> Res<()> {
    check_paths(files.iter().chain(kitchens).map(PathBuf::as_path)).exit(1)?;
    let mut errors = 0;
    let mut report = |path: &Path, diags: &[Diagnostic], summary: String| {
        print_diags(path, diags);
        errors += diags.iter().filter(|d| d.severity == Severity::Error).count();
        if !diags.iter().any(|d| d.severity == Severity::Error) {
            println!("{}: ok, {summary}", path.display());
        }
    };
    for p in files {
        match parse_subgraph(&read(p)?) {
            Ok(g) => report(p, &g.warnings, format!("{} units", g.value.len())),
            Err(d) => report(p, &d, String::new()),
        }
    }
    for p in kitchens {
        match parse_kitchen(&read(p)?) {
            Ok(k) => report(p, &k.warnings, format!("{} objects", k.value.len())),
            Err(d) => report(p, &d, String::new()),
        }
    }
    if errors > 0 {
        return fail(1, format!("{errors} error(s)"));
    }
    Ok(())
}

fn cmd_merge(s: &Settings) -> Res<()> {
    let merged = load_graph(&s.foon)?;
    let text = serialize_subgraph(&merged);
    eprintln!("merged {} files into {} units", s.foon.len(), merged.len());
    match &s.out {
        Some(dir) => write_out(dir, "merged.foon", &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_retrieve(s: &Settings) -> Res<()> {
    let graph = load_graph(&s.foon)?;
    let kitchen = require_kitchen(s)?;
    let goal = resolve_goal(&graph, &kitchen, s.goal.as_deref())?;
    let tree = retrieve_task_tree(&graph, &goal, &kitchen).exit(2)?;
    let mut sub = FoonGraph::new();
    for u in tree.units() {
        sub.push_unit(u.clone());
    }
    if !tree.is_empty() {
        sub.mark_goal(goal);
    }
    let provenance: Vec<String> = tree.provenance().iter().map(usize::to_string).collect();
    let text = format!("# source units: {}\n{}", provenance.join(" "), serialize_subgraph(&sub));
    match &s.out {
        Some(dir) => write_out(dir, "task_tree.foon", &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_compile(s: &Settings) -> Res<()> {
    let Some(out) = &s.out else {
        return fail(1, "compile needs an output directory (--out)");
    };
    let graph = load_graph(&s.foon)?;
    let kitchen = require_kitchen(s)?;
    let goal = resolve_goal(&graph, &kitchen, s.goal.as_deref())?;
    let tree = retrieve_task_tree(&graph, &goal, &kitchen).exit(2)?;
    let ops = compile_task_tree(&tree).exit(2)?;
    let objects = macro_problem(&kitchen, &goal).exit(2)?.symbols();
    let domain = emit_macro_domain(&ops, &objects);
    let problem = emit_macro_problem(&kitchen, &goal).exit(2)?;
    write_out(out, "macro_domain.pddl", &domain.text)?;
    write_out(out, "macro_problem.pddl", &problem.text)?;
    write_out(out, "micro_domain.pddl", &emit_micro_domain().text)?;
    println!("{} macro operators", ops.len());
    Ok(())
}

fn cmd_plan(s: &Settings, partial: Option<u64>, emit_library: bool) -> Res<()> {
    if emit_library && s.out.is_none() {
        return fail(1, "--emit-library needs an output directory (--out)");
    }
    let graph = load_graph(&s.foon)?;
    let scene = load_scene(s)?;
    let kitchen = match &s.kitchen {
        Some(p) => load_kitchen(p)?,
        None => scene.kitchen(),
    };
    let goal = resolve_goal(&graph, &kitchen, s.goal.as_deref())?;
    let mode = partial.map_or(TrialMode::Whole, TrialMode::Partial);
    let (ops, goal) = prepare_from(&graph, &goal, &kitchen, mode).or_else(from_failure)?;
    let plan = plan_recipe_with(&ops, &goal, &scene, &mut |task, problem, objects| match &s.external {
        Some(ext) => ext.solve(task, problem, objects).map_err(|e| e.to_string()),
        None => astar(task, s.heuristic, &s.search).map_err(|e| e.to_string()),
    })
    .or_else(from_failure)?;
    print!("{}", plan_table(&plan));
    if let Some(dir) = &s.out {
        write_out(dir, "plan.json", &plan_to_json(&plan))?;
        if emit_library {
            let categories = load_categories(s)?;
            let mut library = ContextLibrary::new();
            for seg in &plan.segments {
                library.record_demonstrations(&seg.steps, &categories).exit(4)?;
            }
            write_out(dir, "library.json", &library_to_json(&library, &categories))?;
        }
    }
    Ok(())
}

fn cmd_execute(s: &Settings, plan_path: &Path) -> Res<()> {
    check_paths([plan_path]).exit(1)?;
    let plan = plan_from_json(&read(plan_path)?).with_context(|| format!("plan {}", plan_path.display())).exit(1)?;
    let scene = load_scene(s)?;
    let (library, categories) = match &s.library {
        Some(p) => library_from_json(&read(p)?).with_context(|| format!("library {}", p.display())).exit(1)?,
        None => (ContextLibrary::new(), load_categories(s)?),
    };
    let report = execute_plan(&scene, &plan, &library, &categories);
    print!("{}", report_table(&report));
    if let Some(dir) = &s.out {
        write_out(dir, "report.json", &report_to_json(&report))?;
    }
    if !report.is_success() {
        return fail(4, "execution failed");
    }
    Ok(())
}

fn cmd_bench(s: &Settings, heuristics: &[String], trials: Option<usize>, workers: Option<usize>) -> Res<()> {
    let graph = load_graph(&s.foon)?;
    let scene = load_scene(s)?;
    let goal = resolve_goal(&graph, &scene.kitchen(), s.goal.as_deref())?;
    let names: Vec<String> = if !heuristics.is_empty() {
        heuristics.to_vec()
    } else {
        s.cfg.heuristics.clone().unwrap_or_else(|| vec!["hmax".into(), "hff".into()])
    };
    let heuristics = names.iter().map(|h| parse_heuristic(h)).collect::<Result<Vec<_>, _>>().exit(1)?;
    let n_range = match s.cfg.n_range {
        Some([a, b]) => a..=b,
        None => 1..=usize::MAX,
    };
    let cfg = BenchConfig {
        n_range,
        heuristics: heuristics.clone(),
        trials: trials.or(s.cfg.trials).unwrap_or(1).max(1),
        search: s.search,
        workers: workers.or(s.cfg.workers).unwrap_or(1).max(1),
    };
    let report = run_comparison(&graph, &goal, &scene, &cfg).exit(2)?;
    let csv = emit_csv(&report);
    match &s.out {
        Some(dir) => {
            write_out(dir, "bench.csv", &csv)?;
            write_out(dir, "bench.gp", &gnuplot_script("bench.csv", &heuristics))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let config = cli.config.as_deref();
    match &cli.cmd {
        Cmd::Validate { files, kitchen } => cmd_validate(files, kitchen),
        Cmd::Merge(c) => cmd_merge(&settings(config, c)?),
        Cmd::Retrieve(c) => cmd_retrieve(&settings(config, c)?),
        Cmd::Compile(c) => cmd_compile(&settings(config, c)?),
        Cmd::Plan { common, partial, emit_library } => cmd_plan(&settings(config, common)?, *partial, *emit_library),
        Cmd::Execute { common, plan } => cmd_execute(&settings(config, common)?, plan),
        Cmd::Bench { common, heuristics, trials, workers } => {
            cmd_bench(&settings(config, common)?, heuristics, *trials, *workers)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
