//! Batch front end: config file in, survival table and JSON report out.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelClass, SeasonalModel};
use crate::oracle::{self, MonteCarloEstimate};
use crate::roots::RootSet;
use crate::survival::{self, ConsistencyReport, SolverConfig, SurvivalTable};

pub use config::{ClaimSpec, OracleSpec, Outputs, RunConfig, SCHEMA_VERSION};

/// Command-line values that replace fields of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub u_max: Option<usize>,
    pub t_values: Option<Vec<usize>>,
    pub mc_paths: Option<u64>,
    pub seed: Option<u64>,
    pub table_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub root_tol: Option<f64>,
    pub cluster_tol: Option<f64>,
    pub max_poly_degree: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(u) = self.u_max {
            cfg.u_max = u;
        }
        if let Some(t) = &self.t_values {
            cfg.t_values = t.clone();
        }
        if let Some(p) = &self.table_path {
            cfg.outputs.table_path = p.clone();
        }
        if let Some(p) = &self.report_path {
            cfg.outputs.report_path = p.clone();
        }
        if let Some(v) = self.root_tol {
            cfg.root_tol = v;
        }
        if let Some(v) = self.cluster_tol {
            cfg.cluster_tol = v;
        }
        if let Some(v) = self.max_poly_degree {
            cfg.max_poly_degree = v;
        }
        if self.mc_paths.is_some() || self.seed.is_some() {
            let o = cfg.oracle.get_or_insert(OracleSpec {
                mc_paths: 100_000,
                seed: 0,
                enum_cap: oracle::DEFAULT_ENUM_CAP,
            });
            if let Some(n) = self.mc_paths {
                o.mc_paths = n;
            }
            if let Some(s) = self.seed {
                o.seed = s;
            }
        }
        cfg.check()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationDelta {
    pub u: usize,
    pub t: usize,
    pub exact: f64,
    pub dp: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloDelta {
    pub u: usize,
    pub t: usize,
    pub estimate: MonteCarloEstimate,
    pub dp: f64,
    pub delta: f64,
    pub covered_95: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub enumeration: Vec<EnumerationDelta>,
    /// `(u, t)` cells whose path count exceeded `enum_cap`.
    pub enumeration_skipped: usize,
    pub monte_carlo: Vec<MonteCarloDelta>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub classification: ModelClass,
    pub n_seasons: usize,
    pub mean_s_n: f64,
    pub tail_mass: f64,
    pub roots: Option<RootSet>,
    pub m0: Option<Vec<f64>>,
    pub initial_residual: Option<f64>,
    pub mass_identity_defect: Option<f64>,
    pub condition_number: Option<f64>,
    /// Last `n` of `m_n` from the forward recursion.
    pub forward_up_to: Option<usize>,
    pub forward_stationary_gap: Option<f64>,
    pub consistency: ConsistencyReport,
    pub phi: Vec<f64>,
    pub t_values: Vec<usize>,
    pub oracle: Option<OracleReport>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: SurvivalTable,
    pub t_values: Vec<usize>,
    pub report: Report,
}

/// Runs the whole pipeline without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let model = cfg.model()?;
    let solver = SolverConfig {
        roots: cfg.root_config(),
        ..SolverConfig::default()
    };
    let sol = survival::solve_ultimate(&model, cfg.u_max, &solver)?;
    let mut table = sol.table;
    if let Some(t_max) = cfg.t_max() {
        table.finite = Some(survival::survival_finite(&model, cfg.u_max, t_max)?);
    }
    table.validate()?;
    let consistency = survival::consistency_check(&model, &table)?;

    let oracle = cfg
        .oracle
        .as_ref()
        .map(|spec| oracle_report(&model, &table, &cfg.t_values, spec))
        .transpose()?;

    let mut t_values = cfg.t_values.clone();
    t_values.sort_unstable();
    t_values.dedup();

    let report = Report {
        schema_version: SCHEMA_VERSION,
        classification: sol.class,
        n_seasons: model.n_seasons(),
        mean_s_n: model.mean_s_n(),
        tail_mass: model.tail_mass(),
        roots: sol.roots,
        m0: sol.initial.as_ref().map(|v| v.m0.clone()),
        initial_residual: sol.initial.as_ref().map(|v| v.residual),
        mass_identity_defect: sol.initial.as_ref().map(|v| v.mass_identity_defect(&model)),
        condition_number: sol.initial.as_ref().map(|v| v.condition),
        forward_up_to: sol.forward_up_to,
        forward_stationary_gap: sol.forward_stationary_gap,
        consistency,
        phi: table.phi.clone(),
        t_values: t_values.clone(),
        oracle,
    };
    Ok(RunOutput {
        table,
        t_values,
        report,
    })
}

fn oracle_report(
    model: &SeasonalModel,
    table: &SurvivalTable,
    t_values: &[usize],
    spec: &OracleSpec,
) -> Result<OracleReport> {
    let Some(grid) = &table.finite else {
        return Ok(OracleReport {
            enumeration: Vec::new(),
            enumeration_skipped: 0,
            monte_carlo: Vec::new(),
        });
    };
    let mut enumeration = Vec::new();
    let mut enumeration_skipped = 0;
    for &t in t_values {
        for u in 0..=table.u_max {
            match oracle::enum_survival_exact(model, u, t, spec.enum_cap) {
                Ok(exact) => enumeration.push(EnumerationDelta {
                    u,
                    t,
                    exact,
                    dp: grid.at(u, t),
                    delta: (exact - grid.at(u, t)).abs(),
                }),
                Err(Error::OracleTooLarge { .. }) => enumeration_skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let monte_carlo = t_values
        .iter()
        .map(|&t| {
            let estimate = oracle::mc_survival(model, 0, t, spec.mc_paths, spec.seed)?;
            let dp = grid.at(0, t);
            Ok(MonteCarloDelta {
                u: 0,
                t,
                dp,
                delta: (estimate.point - dp).abs(),
                covered_95: estimate.covers(dp, 1.0),
                estimate,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        enumeration,
        enumeration_skipped,
        monte_carlo,
    })
}

/// `v` with 10 significant digits.
pub fn format_sig10(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..10).contains(&exp) {
        return format!("{v:.9e}");
    }
    let decimals = (9 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Three decimals, written as `1` when that rounding gives one.
pub fn format_pretty(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "1.000" {
        "1".to_string()
    } else {
        s
    }
}

fn render(out: &RunOutput, cell: fn(f64) -> String, sep: &str) -> String {
    let mut s = String::from("u");
    s.push_str(sep);
    s.push_str("phi_inf");
    for t in &out.t_values {
        write!(s, "{sep}phi_T{t}").unwrap();
    }
    s.push('\n');
    for (u, &p) in out.table.phi.iter().enumerate() {
        write!(s, "{u}{sep}{}", cell(p)).unwrap();
        if let Some(grid) = &out.table.finite {
            for &t in &out.t_values {
                write!(s, "{sep}{}", cell(grid.at(u, t))).unwrap();
            }
        }
        s.push('\n');
    }
    s
}

pub fn to_csv(out: &RunOutput) -> String {
    render(out, format_sig10, ",")
}

/// Whitespace-aligned table using the three-decimal rounding.
pub fn to_pretty(out: &RunOutput) -> String {
    let raw = render(out, format_pretty, "\t");
    let rows: Vec<Vec<&str>> = raw.lines().map(|l| l.split('\t').collect()).collect();
    let mut s = String::new();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i == 0 {
                write!(s, "{cell:>4}").unwrap();
            } else {
                write!(s, "{cell:>10}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}

pub fn to_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvariantViolation(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::ConfigError(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))
}

/// Loads `config_path`, applies `overrides`, runs, and writes both outputs.
pub fn run(config_path: &Path, overrides: &Overrides) -> Result<RunOutput> {
    let mut cfg = RunConfig::load(config_path)?;
    overrides.apply(&mut cfg)?;
    let out = execute(&cfg)?;
    write_file(&cfg.outputs.table_path, &to_csv(&out))?;
    write_file(&cfg.outputs.report_path, &to_json(&out.report)?)?;
    Ok(out)
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigError(_) => 2,
        _ => 3,
    }
}
