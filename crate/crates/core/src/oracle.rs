//! Independent routes to survival probabilities, used to validate the
//! generating-function pipeline.
//!
//! * classical recursions for the homogeneous (one-season) model;
//! * exhaustive enumeration of claim paths over a finite horizon;
//! * Monte Carlo simulation with a counter-based generator, so that path `i`
//!   always sees the same random stream whatever the thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SeasonalModel;
use crate::pmf::IntegerPmf;

/// Default cap on the number of enumerated claim paths.
pub const DEFAULT_ENUM_CAP: u64 = 50_000_000;

/// `P(Z > j)` on the truncated table for `j = 0..=D`.
fn exceedance(pmf: &IntegerPmf) -> Vec<f64> {
    let p = pmf.probs();
    let mut out = vec![0.0; p.len()];
    let mut acc = 0.0;
    for j in (0..p.len()).rev() {
        out[j] = acc;
        acc += p[j];
    }
    out
}

/// Finite-time ruin probability `ψ(u, t)` of the one-season model.
///
/// One step from surplus `v` either ruins (`Z > v`) or moves to `v + 1 - k`
/// for a claim `k ≤ v`, giving
/// `ψ(v, s) = P(Z > v) + Σ_{k=0}^{v} ψ(v + 1 - k, s - 1) P(Z = k)`.
pub fn homogeneous_finite_ruin(pmf: &IntegerPmf, u: usize, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let width = u + t + 1;
    // Tail mass counts as a claim beyond the table, i.e. as ruin.
    let ruin_now: Vec<f64> = (0..width)
        .map(|v| 1.0 - (0..=v).map(|k| pmf.prob(k)).sum::<f64>())
        .collect();
    let mut psi = ruin_now.clone();
    for _ in 1..t {
        let prev = psi.clone();
        for v in 0..width - 1 {
            let carried: f64 = (0..=v.min(pmf.degree()))
                .map(|k| prev[v + 1 - k] * pmf.prob(k))
                .sum();
            psi[v] = ruin_now[v] + carried;
        }
    }
    Ok(psi[u])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousRuin {
    /// `ψ(u)` for `u = 0..=u_max`.
    pub psi: Vec<f64>,
    /// Tail mass discarded by the truncated law; bounds the neglected part of
    /// the exceedance sums.
    pub truncation_bound: f64,
}

/// Ultimate ruin probability `ψ(u)` of the one-season model with `E Z < 1`.
///
/// Uses the ladder-height renewal equation
/// `ψ(u) = Σ_{j=0}^{u-1} P(Z > j) ψ(u - j) + Σ_{j ≥ u} P(Z > j)` with
/// `ψ(0) = E Z`; the `j = 0` term is moved to the left-hand side.
pub fn homogeneous_ultimate_ruin(pmf: &IntegerPmf, u_max: usize) -> Result<HomogeneousRuin> {
    if pmf.mean() >= 1.0 {
        return Err(Error::NetProfitViolation {
            mean: pmf.mean(),
            limit: 1.0,
        });
    }
    let t = exceedance(pmf);
    let tail_from = |u: usize| -> f64 { t.iter().skip(u).sum() };
    let mut psi = vec![0.0; u_max + 1];
    psi[0] = pmf.mean();
    let scale = 1.0 - t[0];
    for u in 1..=u_max {
        let renewal: f64 = (1..u)
            .filter(|&j| j < t.len())
            .map(|j| t[j] * psi[u - j])
            .sum();
        psi[u] = (renewal + tail_from(u)) / scale;
    }
    Ok(HomogeneousRuin {
        psi,
        truncation_bound: pmf.tail_mass(),
    })
}

/// Exact finite-horizon survival by walking every claim path.
///
/// A path is abandoned as soon as the surplus reaches zero, which is where
/// the nested constraints `k_1 ≤ u`, `k_1 + k_2 ≤ u + 1`, ... cut it off.
pub fn enum_survival_exact(model: &SeasonalModel, u: usize, t: usize, cap: u64) -> Result<f64> {
    let n = model.n_seasons();
    let supports: Vec<Vec<(usize, f64)>> = model
        .claims()
        .iter()
        .map(|z| {
            z.probs()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| (k, p))
                .collect()
        })
        .collect();
    let paths: f64 = (0..t).map(|i| supports[i % n].len() as f64).product();
    if paths > cap as f64 {
        return Err(Error::OracleTooLarge { paths, cap });
    }

    fn walk(supports: &[Vec<(usize, f64)>], step: usize, t: usize, surplus: i64) -> f64 {
        if step == t {
            return 1.0;
        }
        supports[step % supports.len()]
            .iter()
            .filter(|(k, _)| surplus + 1 - *k as i64 > 0)
            .map(|&(k, p)| p * walk(supports, step + 1, t, surplus + 1 - k as i64))
            .sum()
    }
    Ok(walk(&supports, 0, t, u as i64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub point: f64,
    pub half_width_95: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn covers(&self, value: f64, widths: f64) -> bool {
        (self.point - value).abs() <= widths * self.half_width_95
    }
}

/// Fraction of simulated paths whose surplus stays positive through step `t`.
pub fn mc_survival(
    model: &SeasonalModel,
    u: usize,
    t: usize,
    n_paths: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument(
            "at least one path is required".into(),
        ));
    }
    let cdfs: Vec<Vec<f64>> = model
        .claims()
        .iter()
        .map(|z| {
            z.probs()
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let n = cdfs.len();

    let survivors: u64 = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = base.clone();
            rng.set_stream(path);
            let mut surplus = u as i64;
            for step in 0..t {
                let x: f64 = rng.gen();
                let cdf = &cdfs[step % n];
                // Draws beyond the table land on the truncated tail.
                let claim = cdf.partition_point(|&c| c <= x);
                surplus += 1 - claim as i64;
                if surplus <= 0 {
                    return 0;
                }
            }
            1
        })
        .sum();

    let point = survivors as f64 / n_paths as f64;
    Ok(MonteCarloEstimate {
        point,
        half_width_95: 1.96 * (point * (1.0 - point) / n_paths as f64).sqrt(),
        n_paths,
        seed,
    })
}
