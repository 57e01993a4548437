//! Experiment configuration: plain `key = value` lines, `#` comments,
//! comma-separated lists. Example:
//!
//! ```text
//! # headline experiment
//! nu = 3.0
//! sigma0 = 1.0
//! n_grid = 256,1024,4096
//! replicates = 200000
//! master_seed = 42
//! confidence_delta = 0.01
//! quad_tol = 1e-9
//! output_path = out/rate
//! ```

use std::collections::HashSet;
use std::path::Path;

use uvlab_core::{ConstructionParams, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub sigma0: f64,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub confidence_delta: f64,
    pub quad_tol: f64,
    pub output_path: String,
    /// Node budget for the reference-CDF quadrature ladder.
    pub max_quad_nodes: usize,
    /// Base node count the ladder starts from.
    pub quad_base_nodes: usize,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::parse(&text).map_err(ConfigError::Invalid)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut nu = None;
        let mut sigma0 = None;
        let mut n_grid: Option<Vec<usize>> = None;
        let mut replicates = None;
        let mut master_seed = None;
        let mut confidence_delta = 0.01f64;
        let mut quad_tol = 1e-9f64;
        let mut output_path = String::from("out");
        let mut max_quad_nodes = uvlab_core::refdist::DEFAULT_MAX_NODES;
        let mut quad_base_nodes = uvlab_core::refdist::DEFAULT_BASE_NODES;
        let mut seen = HashSet::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidParameter(format!("config: duplicate key `{key}`")));
            }
            match key {
                "nu" => nu = Some(parse_f64(key, value)?),
                "sigma0" => sigma0 = Some(parse_f64(key, value)?),
                "n_grid" => n_grid = Some(parse_usize_list(key, value)?),
                "replicates" => replicates = Some(parse_usize(key, value)?),
                "master_seed" => master_seed = Some(parse_u64(key, value)?),
                "confidence_delta" => confidence_delta = parse_f64(key, value)?,
                "quad_tol" => quad_tol = parse_f64(key, value)?,
                "output_path" => output_path = value.to_string(),
                "max_quad_nodes" => max_quad_nodes = parse_usize(key, value)?,
                "quad_base_nodes" => quad_base_nodes = parse_usize(key, value)?,
                other => {
                    return Err(Error::InvalidParameter(format!("config: unknown key `{other}`")))
                }
            }
        }

        let config = Self {
            nu: require(nu, "nu")?,
            sigma0: require(sigma0, "sigma0")?,
            n_grid: require(n_grid, "n_grid")?,
            replicates: require(replicates, "replicates")?,
            master_seed: require(master_seed, "master_seed")?,
            confidence_delta,
            quad_tol,
            output_path,
            max_quad_nodes,
            quad_base_nodes,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("n_grid must be nonempty".into()));
        }
        for &n in &self.n_grid {
            // checks 2 < nu <= 3, sigma0 > 0, n >= 2
            ConstructionParams::new(self.nu, self.sigma0, n)?;
        }
        if !(self.confidence_delta > 0.0 && self.confidence_delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence_delta = {} must lie in (0, 1)",
                self.confidence_delta
            )));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidParameter("quad_tol must be positive".into()));
        }
        if self.replicates < 2 {
            return Err(Error::InvalidParameter(format!(
                "replicates = {} must be at least 2",
                self.replicates
            )));
        }
        if self.quad_base_nodes == 0 || self.max_quad_nodes < self.quad_base_nodes {
            return Err(Error::InvalidParameter(
                "quadrature node counts must satisfy 0 < quad_base_nodes <= max_quad_nodes".into(),
            ));
        }
        Ok(())
    }

    /// Construction parameters at one grid size.
    pub fn params_at(&self, n: usize) -> Result<ConstructionParams> {
        ConstructionParams::new(self.nu, self.sigma0, n)
    }
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("config: missing required key `{key}`")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("config: `{key}` = `{value}` is not a number")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.parse().map_err(|_| {
        Error::InvalidParameter(format!("config: `{key}` = `{value}` is not an unsigned integer"))
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::InvalidParameter(format!("config: `{key}` = `{value}` is not an unsigned integer"))
    })
}

fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|item| parse_usize(key, item.trim())).collect()
}

/// Config loading failure: I/O or content.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Invalid(Error),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# comment
nu = 3.0
sigma0 = 1.0   # trailing comment
n_grid = 256, 1024
replicates = 2000
master_seed = 42
";

    #[test]
    fn parses_a_minimal_config_with_defaults() {
        let c = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(c.nu, 3.0);
        assert_eq!(c.n_grid, vec![256, 1024]);
        assert_eq!(c.confidence_delta, 0.01);
        assert_eq!(c.quad_tol, 1e-9);
        assert_eq!(c.output_path, "out");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("nu = 2.0\nsigma0 = 1\nn_grid = 8\nreplicates = 10\nmaster_seed = 0\n")
            .unwrap_err()
            .to_string()
            .contains("2 < nu"));
        assert!(ExperimentConfig::parse(&format!("{GOOD}unknown_key = 3\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{GOOD}nu = 2.5\n")).is_err()); // duplicate
        assert!(ExperimentConfig::parse("nu = 3.0\n").is_err()); // missing keys
        assert!(ExperimentConfig::parse(&GOOD.replace("n_grid = 256, 1024", "n_grid = 1"))
            .is_err());
        assert!(ExperimentConfig::parse(&format!("{GOOD}confidence_delta = 1.5\n")).is_err());
    }
}
