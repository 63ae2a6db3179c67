//! TOML configuration shared by the `foonc` subcommands.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use foonplan_core::planner::Heuristic;

pub const CONFIG_ENV: &str = "FOONC_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

/// Every key is optional; command-line flags override file values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub foon: Vec<PathBuf>,
    pub kitchen: Option<PathBuf>,
    pub goal: Option<String>,
    pub scene: Option<PathBuf>,
    pub library: Option<PathBuf>,
    /// JSON `{label: category}` map for generalizing action contexts.
    pub categories: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub heuristic: Option<String>,
    pub node_budget: Option<usize>,
    pub external_planner_cmd: Option<String>,
    pub seed: Option<u64>,
    pub upside_down_probability: Option<f64>,
    pub stack_probability: Option<f64>,
    pub workers: Option<usize>,
    /// Inclusive `[first, last]` unit counts for the benchmark grid.
    pub n_range: Option<[usize; 2]>,
    pub trials: Option<usize>,
    pub heuristics: Option<Vec<String>>,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Config, ConfigError> {
        let mut cfg: Config =
            toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        // relative paths are relative to the config file
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Config::parse(&text, path)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.foon.iter_mut().for_each(fix);
        for p in [&mut self.kitchen, &mut self.scene, &mut self.library, &mut self.categories, &mut self.out] {
            if let Some(p) = p {
                fix(p);
            }
        }
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(h) = &self.heuristic {
            parse_heuristic(h)?;
        }
        for h in self.heuristics.iter().flatten() {
            parse_heuristic(h)?;
        }
        for (name, p) in [("upside_down_probability", self.upside_down_probability), ("stack_probability", self.stack_probability)] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("{name} must lie in [0, 1], got {p}"));
                }
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if self.trials == Some(0) {
            return bad("trials must be at least 1".into());
        }
        if self.node_budget == Some(0) {
            return bad("node_budget must be at least 1".into());
        }
        if let Some([a, b]) = self.n_range {
            if a == 0 || a > b {
                return bad(format!("n_range [{a}, {b}] must satisfy 1 <= first <= last"));
            }
        }
        Ok(())
    }
}

pub fn parse_heuristic(s: &str) -> Result<Heuristic, ConfigError> {
    Heuristic::parse(s).ok_or_else(|| ConfigError::Invalid(format!("unknown heuristic `{s}` (hmax, hff, blind)")))
}

/// Fails on the first path that does not exist.
pub fn check_paths<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<(), ConfigError> {
    for p in paths {
        if !p.exists() {
            return Err(ConfigError::Invalid(format!("{} does not exist", p.display())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config() {
        let text = r#"
foon = ["recipes/bloody_mary.foon"]
goal = "drinking_glass"
heuristic = "hff"
node_budget = 5000
seed = 4
workers = 2
n_range = [1, 4]
trials = 3
heuristics = ["hmax", "hff"]
"#;
        let cfg = Config::parse(text, Path::new("/etc/foon/run.toml")).unwrap();
        assert_eq!(cfg.foon, [PathBuf::from("/etc/foon/recipes/bloody_mary.foon")]);
        assert_eq!(cfg.n_range, Some([1, 4]));
        assert_eq!(cfg.node_budget, Some(5000));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(Config::parse("colour = 1\n", Path::new("c.toml")), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn invalid_values_rejected() {
        for text in ["heuristic = \"lmcut\"", "stack_probability = 1.5", "workers = 0", "n_range = [3, 2]"] {
            assert!(matches!(Config::parse(text, Path::new("c.toml")), Err(ConfigError::Invalid(_))), "{text}");
        }
    }

    #[test]
    fn missing_paths_reported() {
        let err = check_paths([Path::new("/definitely/not/here.foon")]).unwrap_err();
        assert!(err.to_string().contains("does not exist"));
    }
}
