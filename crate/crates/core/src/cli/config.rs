//! Run description files.
//!
//! ```toml
//! schema_version = 1
//! u_max = 15
//! t_values = [1, 5, 10]   # optional
//! eps_tail = 1e-14        # optional
//! root_tol = 1e-10        # optional
//! cluster_tol = 1e-6      # optional
//!
//! [[claims]]
//! kind = "poisson"
//! lambda = 0.3
//!
//! [[claims]]
//! kind = "table"
//! weights = [0.8, 0.2]
//!
//! [outputs]
//! table_path = "survival.csv"   # relative to the config file
//! report_path = "report.json"
//!
//! [oracle]                      # optional
//! mc_paths = 100000
//! seed = 7
//! enum_cap = 1000000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SeasonalModel;
use crate::pmf::{IntegerPmf, DEFAULT_EPS_TAIL};
use crate::roots::RootConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClaimSpec {
    Table { weights: Vec<f64> },
    Poisson { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub table_path: PathBuf,
    pub report_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub mc_paths: u64,
    pub seed: u64,
    pub enum_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub claims: Vec<ClaimSpec>,
    pub u_max: usize,
    #[serde(default)]
    pub t_values: Vec<usize>,
    #[serde(default = "default_eps_tail")]
    pub eps_tail: f64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
    #[serde(default = "default_max_poly_degree")]
    pub max_poly_degree: usize,
    pub outputs: Outputs,
    pub oracle: Option<OracleSpec>,
}

fn default_eps_tail() -> f64 {
    DEFAULT_EPS_TAIL
}

fn default_root_tol() -> f64 {
    RootConfig::default().tol_root
}

fn default_cluster_tol() -> f64 {
    RootConfig::default().tol_cluster
}

fn default_max_poly_degree() -> usize {
    RootConfig::default().max_poly_degree
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigError(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads a config file; relative output paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.outputs.table_path, &mut cfg.outputs.report_path] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::ConfigError(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.claims.is_empty() {
            return fail("claims must not be empty".into());
        }
        for (name, v) in [
            ("eps_tail", self.eps_tail),
            ("root_tol", self.root_tol),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return fail(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if self.t_values.contains(&0) {
            return fail("t_values must be positive".into());
        }
        if self.max_poly_degree == 0 {
            return fail("max_poly_degree must be positive".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SeasonalModel> {
        let claims = self
            .claims
            .iter()
            .map(|c| match c {
                ClaimSpec::Table { weights } => IntegerPmf::from_table(weights),
                ClaimSpec::Poisson { lambda } => IntegerPmf::poisson(*lambda, self.eps_tail),
            })
            .collect::<Result<Vec<_>>>()?;
        SeasonalModel::new(claims)
    }

    pub fn root_config(&self) -> RootConfig {
        RootConfig {
            tol_root: self.root_tol,
            tol_cluster: self.cluster_tol,
            max_poly_degree: self.max_poly_degree,
            ..RootConfig::default()
        }
    }

    pub fn t_max(&self) -> Option<usize> {
        self.t_values.iter().copied().max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
schema_version = 1
u_max = 4
t_values = [1, 3]

[[claims]]
kind = "poisson"
lambda = 0.3

[[claims]]
kind = "table"
weights = [0.8, 0.2]

[outputs]
table_path = "t.csv"
report_path = "r.json"
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = RunConfig::parse(EXAMPLE).unwrap();
        assert_eq!(cfg.claims.len(), 2);
        assert_eq!(cfg.claims[0], ClaimSpec::Poisson { lambda: 0.3 });
        assert_eq!(cfg.eps_tail, DEFAULT_EPS_TAIL);
        assert_eq!(cfg.t_max(), Some(3));
        assert!(cfg.oracle.is_none());
        assert_eq!(cfg.model().unwrap().n_seasons(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            EXAMPLE.replace("schema_version = 1", "schema_version = 2"),
            EXAMPLE.replace("u_max = 4", "u_max = 4\nroot_tol = 2.0"),
            EXAMPLE.replace("[1, 3]", "[0, 3]"),
            EXAMPLE.replace("lambda = 0.3", "rate = 0.3"),
            EXAMPLE.replace("u_max = 4", "u_max = -1"),
            EXAMPLE.replace("kind = \"table\"", "kind = \"geometric\""),
        ];
        for text in cases {
            let err = RunConfig::parse(&text).unwrap_err();
            assert_eq!(err.name(), "ConfigError", "{text}");
        }
    }

    #[test]
    fn relative_outputs_follow_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, EXAMPLE).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.outputs.table_path, dir.path().join("t.csv"));
    }
}
