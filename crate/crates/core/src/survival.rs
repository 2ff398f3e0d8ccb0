//! Ultimate- and finite-time survival probabilities.
//!
//! For a model under the net-profit condition with `N ≥ 2` seasons:
//!
//! 1. the initial values `m_0^(k)` come from [`crate::initvals`];
//! 2. the tables `m_n^(k) = P(M_k = n)` are propagated season by season,
//!    using that `M_k` has the law of `(M_{k+1} + Z_k - 1)^+`; the forward
//!    recursion amplifies rounding like `|α|^{-n}`, so past a step budget the
//!    terms come from the stationary law of the period map instead;
//! 3. `φ(u) = Σ_{j<u} m_j^(1)` for `u ≥ 1`, and `φ(0)` is read off the
//!    one-period recursion `φ(u) = E[φ(W_u(N)); no ruin before N]` at `u = 0`.
//!
//! The one-period recursion is also evaluated for every `u` as a consistency
//! check. Finite-time probabilities are exact forward dynamic programming over
//! the surplus distribution.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::initvals::{self, InitialSystem, InitialVector};
use crate::linalg;
use crate::model::{ModelClass, SeasonalModel};
use crate::oracle;
use crate::roots::{self, RootConfig, RootSet};

/// Slack allowed outside `[0, 1]` for propagated probabilities.
pub const TOL_SEQ: f64 = 1e-9;

/// Default bound on the one-period recursion defect.
pub const TOL_CONSISTENCY: f64 = 1e-8;

/// Default cap on `u_max + t_max` for the finite-time grid.
pub const DEFAULT_FINITE_CAP: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct MSequence {
    /// `m[k - 1][n] = P(M_k = n)` for `n = 0..=n_max`.
    pub m: Vec<Vec<f64>>,
}

impl MSequence {
    pub fn n_max(&self) -> usize {
        self.m[0].len() - 1
    }

    /// `1 - Σ_{j ≤ n_max} m_j^(k)` for every season.
    pub fn tail_deficits(&self) -> Vec<f64> {
        self.m
            .iter()
            .map(|row| 1.0 - row.iter().sum::<f64>())
            .collect()
    }
}

/// Propagates `m_n^(k)` for `n = 1..=n_max` from the initial vector.
///
/// At each step the `N` relations are
/// `z_0^(k) m_n^(k+1) = m_{n-1}^(k) - Σ_{j<n} z_{n-j}^(k) m_j^(k+1) - 1{n=1} z_0^(k) m_0^(k+1)`
/// (season indices cyclic). A season with `z_0^(k) = 0` gives no equation for
/// `m_n^(k+1)`; its relation one step ahead,
/// `m_n^(k) - z_1^(k) m_n^(k+1) = Σ_{j<n} z_{n+1-j}^(k) m_j^(k+1)`, is used
/// instead and the step is solved as a small linear system.
pub fn compute_m_sequence(
    model: &SeasonalModel,
    m0: &InitialVector,
    n_max: usize,
) -> Result<MSequence> {
    let n = model.n_seasons();
    if m0.m0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial vector has {} entries for {n} seasons",
            m0.m0.len()
        )));
    }
    let mut m: Vec<Vec<f64>> = m0.m0.iter().map(|&x| vec![x]).collect();
    let all_positive = (1..=n).all(|k| model.claim(k).z0() > 0.0);

    for step in 1..=n_max {
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for k in 1..=n {
            let z = model.claim(k);
            let target = k % n; // row index of season k + 1
            let next = &m[target];
            if z.z0() > 0.0 {
                let mut rhs = m[k - 1][step - 1];
                for (j, &mj) in next.iter().enumerate().take(step) {
                    rhs -= z.prob(step - j) * mj;
                }
                if step == 1 {
                    rhs -= z.z0() * next[0];
                }
                a[(k - 1, target)] = z.z0();
                b[k - 1] = rhs;
            } else {
                let mut rhs = 0.0;
                for (j, &mj) in next.iter().enumerate().take(step) {
                    rhs += z.prob(step + 1 - j) * mj;
                }
                a[(k - 1, k - 1)] += 1.0;
                a[(k - 1, target)] -= z.prob(1);
                b[k - 1] = rhs;
            }
        }

        let x: Vec<f64> = if all_positive {
            (0..n)
                .map(|r| {
                    let target = (r + 1) % n;
                    (target, b[r] / a[(r, target)])
                })
                .fold(vec![0.0; n], |mut acc, (t, v)| {
                    acc[t] = v;
                    acc
                })
        } else {
            linalg::solve_refined(&a, &b)
                .ok_or(Error::DegenerateRecursionFailure { step })?
                .x
                .iter()
                .copied()
                .collect()
        };
        for (k, &v) in x.iter().enumerate() {
            if !(-TOL_SEQ..=1.0 + TOL_SEQ).contains(&v) {
                return Err(Error::NonProbabilisticSequence {
                    step,
                    season: k + 1,
                    value: v,
                });
            }
            m[k].push(v);
        }
    }
    Ok(MSequence { m })
}

/// Distribution of the surplus after `steps` periods started from `u`, on
/// paths that have not been ruined; `p[w]` for `w = 0..=u + steps`.
fn surviving_surplus(model: &SeasonalModel, u: usize, steps: usize) -> Vec<f64> {
    let width = u + steps + 1;
    let mut p = vec![0.0; width];
    p[u] = 1.0;
    let mut next = vec![0.0; width];
    for step in 0..steps {
        let probs = model.claim(step + 1).probs();
        next.iter_mut().for_each(|x| *x = 0.0);
        for (w, &pw) in p.iter().enumerate() {
            if pw == 0.0 {
                continue;
            }
            // Claim c keeps the surplus positive iff c ≤ w.
            for (c, &pc) in probs.iter().enumerate().take(w + 1) {
                next[w + 1 - c] += pw * pc;
            }
        }
        std::mem::swap(&mut p, &mut next);
    }
    p
}

/// Right-hand side of the one-period recursion at `u`:
/// `Σ P(claims keep the surplus positive for N steps, W_u(N) = w) φ(w)`.
fn one_period_value(model: &SeasonalModel, u: usize, phi: &[f64]) -> f64 {
    surviving_surplus(model, u, model.n_seasons())
        .iter()
        .enumerate()
        .skip(1)
        .map(|(w, &p)| p * phi[w])
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteGrid {
    /// `phi[u][t]` for `u = 0..=u_max`, `t = 0..=t_max`; `phi[u][0] = 1`.
    pub phi: Vec<Vec<f64>>,
}

impl FiniteGrid {
    pub fn at(&self, u: usize, t: usize) -> f64 {
        self.phi[u][t]
    }

    pub fn t_max(&self) -> usize {
        self.phi[0].len() - 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalTable {
    pub u_max: usize,
    /// Ultimate-time `φ(u)`, `u = 0..=u_max`.
    pub phi: Vec<f64>,
    pub finite: Option<FiniteGrid>,
}

impl SurvivalTable {
    /// Checks range and monotonicity of every stored value, up to `1e-10`.
    pub fn validate(&self) -> Result<()> {
        const SLACK: f64 = 1e-10;
        let bad = |what: String| Err(Error::InvariantViolation(what));
        for (u, &p) in self.phi.iter().enumerate() {
            if !(-SLACK..=1.0 + SLACK).contains(&p) {
                return bad(format!("phi({u}) = {p} outside [0, 1]"));
            }
            if u > 0 && p < self.phi[u - 1] - SLACK {
                return bad(format!("phi decreases at u = {u}"));
            }
        }
        if let Some(grid) = &self.finite {
            for (u, row) in grid.phi.iter().enumerate() {
                for t in 1..row.len() {
                    if row[t] > row[t - 1] + SLACK {
                        return bad(format!("phi({u}, {t}) increases in T"));
                    }
                    if u > 0 && row[t] < grid.phi[u - 1][t] - SLACK {
                        return bad(format!("phi({u}, {t}) decreases in u"));
                    }
                }
                if let Some(&ult) = self.phi.get(u) {
                    if row[row.len() - 1] < ult - SLACK {
                        return bad(format!("phi({u}, T) below ultimate phi({u})"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub roots: RootConfig,
    /// Extend the m-sequence until its mass deficit drops below `1e-6`.
    pub tail_diagnostics: bool,
    pub n_max_cap: usize,
    /// Forward steps are trusted while `ε |α_min|^{-n}` stays below this.
    pub forward_error_budget: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            roots: RootConfig::default(),
            tail_diagnostics: false,
            n_max_cap: 1000,
            forward_error_budget: 1e-10,
        }
    }
}

/// Everything produced on the way to `φ(u)`.
#[derive(Debug, Clone)]
pub struct UltimateSolution {
    pub class: ModelClass,
    pub roots: Option<RootSet>,
    pub system: Option<InitialSystem>,
    pub initial: Option<InitialVector>,
    pub m_sequence: Option<MSequence>,
    /// Last index `n` of `m_n^(k)` taken from the forward recursion; later
    /// entries come from [`stationary_m_sequence`].
    pub forward_up_to: Option<usize>,
    /// Largest `|forward - stationary|` over the forward part.
    pub forward_stationary_gap: Option<f64>,
    pub table: SurvivalTable,
}

pub fn survival_ultimate(model: &SeasonalModel, u_max: usize) -> Result<SurvivalTable> {
    Ok(solve_ultimate(model, u_max, &SolverConfig::default())?.table)
}

pub fn solve_ultimate(
    model: &SeasonalModel,
    u_max: usize,
    cfg: &SolverConfig,
) -> Result<UltimateSolution> {
    let class = model.classify();
    let trivial = |phi: Vec<f64>| UltimateSolution {
        class,
        roots: None,
        system: None,
        initial: None,
        m_sequence: None,
        forward_up_to: None,
        forward_stationary_gap: None,
        table: SurvivalTable {
            u_max,
            phi,
            finite: None,
        },
    };
    match class {
        ModelClass::Supercritical | ModelClass::CriticalNondegenerate => {
            return Ok(trivial(vec![0.0; u_max + 1]));
        }
        ModelClass::CriticalDegenerate { .. } => {
            let phi = (0..=u_max)
                .map(|u| class.degenerate_survival(u as u64))
                .collect::<Result<_>>()?;
            return Ok(trivial(phi));
        }
        ModelClass::NetProfit => {}
    }

    let n = model.n_seasons();
    if n == 1 {
        let ruin = oracle::homogeneous_ultimate_ruin(&model.claims()[0], u_max)?;
        return Ok(trivial(ruin.psi.iter().map(|p| 1.0 - p).collect()));
    }

    let roots = roots::find_unit_disk_roots(model, &cfg.roots)?;
    let system = initvals::build_initial_system(model, &roots)?;
    let initial = initvals::solve_initial_values(&system)?;

    let reach = u_max.max(n);
    let forward_limit = forward_reliable_steps(&roots, cfg.forward_error_budget);
    let mut hybrid = hybrid_m_sequence(model, &initial, reach - 1, forward_limit)?;
    if cfg.tail_diagnostics {
        let mut n_max = hybrid.0.n_max();
        while hybrid.0.tail_deficits()[0] >= 1e-6 && n_max < cfg.n_max_cap {
            n_max = (2 * n_max.max(1)).min(cfg.n_max_cap);
            hybrid = hybrid_m_sequence(model, &initial, n_max, forward_limit)?;
        }
    }
    let (m_seq, forward_up_to, gap) = hybrid;

    let mut phi = vec![0.0];
    phi.extend(m_seq.m[0][..reach].iter().scan(0.0, |acc, &m| {
        *acc += m;
        Some(*acc)
    }));
    phi[0] = one_period_value(model, 0, &phi);
    phi.truncate(u_max + 1);
    // rounding can push the partial sums a hair past 1
    phi.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));

    Ok(UltimateSolution {
        class,
        roots: Some(roots),
        system: Some(system),
        initial: Some(initial),
        m_sequence: Some(m_seq),
        forward_up_to: Some(forward_up_to),
        forward_stationary_gap: gap,
        table: SurvivalTable {
            u_max,
            phi,
            finite: None,
        },
    })
}

/// Number of forward steps whose amplified rounding error,
/// `ε n^{m-1} |α|^{-n}` for the smallest nonzero root `α` of multiplicity `m`,
/// stays within `budget`.
pub fn forward_reliable_steps(roots: &RootSet, budget: f64) -> usize {
    let Some((radius, mult)) = roots
        .roots()
        .iter()
        .filter(|r| r.value.norm() > 0.0)
        .map(|r| (r.value.norm(), r.multiplicity))
        .min_by(|a, b| a.0.total_cmp(&b.0))
    else {
        return usize::MAX;
    };
    let mut n = 0usize;
    loop {
        let next = (n + 1) as f64;
        let est = f64::EPSILON * next.powi(mult as i32 - 1) * radius.powf(-next);
        if est > budget || n >= 1 << 20 {
            return n;
        }
        n += 1;
    }
}

/// Forward recursion up to `forward_limit`, stationary solve beyond it.
fn hybrid_m_sequence(
    model: &SeasonalModel,
    initial: &InitialVector,
    n_max: usize,
    forward_limit: usize,
) -> Result<(MSequence, usize, Option<f64>)> {
    let n_fwd = n_max.min(forward_limit);
    let mut seq = compute_m_sequence(model, initial, n_fwd)?;
    if n_fwd == n_max {
        return Ok((seq, n_fwd, None));
    }
    let stat = stationary_m_sequence(model, n_max)?;
    let mut gap = 0.0f64;
    for (row, srow) in seq.m.iter_mut().zip(&stat.m) {
        for (x, y) in row.iter().zip(srow) {
            gap = gap.max((x - y).abs());
        }
        row.extend_from_slice(&srow[n_fwd + 1..]);
    }
    Ok((seq, n_fwd, Some(gap)))
}

/// Largest state space used by [`stationary_m_sequence`].
pub const STATIONARY_CAP: usize = 2048;

/// `m_n^(k)` for `n = 0..=n_max` without the root-based initial values.
///
/// `M_k` has the law of `(M_{k+1} + Z_k - 1)^+` with season indices taken
/// cyclically, so the law of `M_1` is the stationary distribution of one full
/// period of these maps. It is computed on `{0, ..., L}` with the mass above
/// `L` held at `L`, doubling `L` until that mass is below `1e-14`. The
/// remaining seasons follow by applying the maps once.
pub fn stationary_m_sequence(model: &SeasonalModel, n_max: usize) -> Result<MSequence> {
    let n = model.n_seasons();
    let mut l = (2 * (n_max + 1)).max(64);
    loop {
        let laws = stationary_laws(model, l)?;
        let lumped = laws[0][l];
        if lumped < 1e-14 {
            return Ok(MSequence {
                m: laws.into_iter().map(|row| row[..=n_max].to_vec()).collect(),
            });
        }
        if l >= STATIONARY_CAP {
            return Err(Error::ResourceLimit(format!(
                "stationary law of M_1 keeps mass {lumped:.1e} above {l} states (n = {n})"
            )));
        }
        l = (2 * l).min(STATIONARY_CAP);
    }
}

/// `(x + Z - 1)^+` applied to a law on `{0, ..., l}`, mass above `l` kept at `l`.
fn lindley_step(dist: &[f64], z: &[f64], l: usize) -> Vec<f64> {
    let mut out = vec![0.0; l + 1];
    let tail = 1.0 - z.iter().sum::<f64>();
    for (x, &p) in dist.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (c, &q) in z.iter().enumerate() {
            let y = (x + c).saturating_sub(1).min(l);
            out[y] += p * q;
        }
        out[l] += p * tail;
    }
    out
}

fn stationary_laws(model: &SeasonalModel, l: usize) -> Result<Vec<Vec<f64>>> {
    let n = model.n_seasons();
    let size = l + 1;
    // kernel[(y, x)] = P(period map sends x to y)
    let mut kernel = DMatrix::<f64>::zeros(size, size);
    for x in 0..size {
        let mut dist = vec![0.0; size];
        dist[x] = 1.0;
        for k in (1..=n).rev() {
            dist = lindley_step(&dist, model.claim(k).probs(), l);
        }
        for (y, p) in dist.into_iter().enumerate() {
            kernel[(y, x)] = p;
        }
    }
    let mut a = kernel - DMatrix::<f64>::identity(size, size);
    a.row_mut(size - 1).fill(1.0);
    let mut b = DVector::<f64>::zeros(size);
    b[size - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvariantViolation("period kernel has no stationary law".into()))?;
    let mut laws = vec![Vec::new(); n];
    laws[0] = pi.iter().map(|&x| x.max(0.0)).collect();
    for k in (2..=n).rev() {
        let next = if k == n { &laws[0] } else { &laws[k] };
        laws[k - 1] = lindley_step(next, model.claim(k).probs(), l);
    }
    Ok(laws)
}

/// Exact `φ(u, T)` for `u = 0..=u_max`, `T = 0..=t_max`.
///
/// Claim mass beyond the truncated tables counts as ruin, so the values are
/// lower bounds within `T · ε_tail` of the untruncated model.
pub fn survival_finite(model: &SeasonalModel, u_max: usize, t_max: usize) -> Result<FiniteGrid> {
    survival_finite_capped(model, u_max, t_max, DEFAULT_FINITE_CAP)
}

pub fn survival_finite_capped(
    model: &SeasonalModel,
    u_max: usize,
    t_max: usize,
    cap: usize,
) -> Result<FiniteGrid> {
    if u_max + t_max > cap {
        return Err(Error::ResourceLimit(format!(
            "u_max + t_max = {} exceeds {cap}",
            u_max + t_max
        )));
    }
    let phi = (0..=u_max)
        .into_par_iter()
        .map(|u| finite_column(model, u, t_max))
        .collect();
    Ok(FiniteGrid { phi })
}

fn finite_column(model: &SeasonalModel, u: usize, t_max: usize) -> Vec<f64> {
    let width = u + t_max + 1;
    let mut p = vec![0.0; width];
    p[u] = 1.0;
    let mut next = vec![0.0; width];
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(1.0);
    for step in 0..t_max {
        let probs = model.claim(step + 1).probs();
        next.iter_mut().for_each(|x| *x = 0.0);
        for w in 0..(u + step + 1).min(width) {
            let pw = p[w];
            if pw == 0.0 {
                continue;
            }
            for (c, &pc) in probs.iter().enumerate().take(w + 1) {
                next[w + 1 - c] += pw * pc;
            }
        }
        std::mem::swap(&mut p, &mut next);
        out.push(p.iter().sum());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    /// Largest `|φ(u) - Σ P(...) φ(w)|` over `u = 0..=u_max - N`.
    pub max_defect: f64,
    pub checked_up_to: Option<usize>,
    /// Largest `φ(u, t_max) - φ(u)` when a finite grid is present.
    pub finite_gap: Option<f64>,
}

/// Evaluates the one-period recursion on the computed table.
pub fn consistency_check(
    model: &SeasonalModel,
    table: &SurvivalTable,
) -> Result<ConsistencyReport> {
    consistency_check_with(model, table, TOL_CONSISTENCY)
}

pub fn consistency_check_with(
    model: &SeasonalModel,
    table: &SurvivalTable,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    let n = model.n_seasons();
    let mut max_defect = 0.0f64;
    let checked_up_to = table.u_max.checked_sub(n);
    if let Some(last) = checked_up_to {
        for u in 0..=last {
            let rhs = one_period_value(model, u, &table.phi);
            max_defect = max_defect.max((rhs - table.phi[u]).abs());
        }
    }
    let finite_gap = table.finite.as_ref().map(|grid| {
        let t = grid.t_max();
        table
            .phi
            .iter()
            .enumerate()
            .take(grid.phi.len())
            .map(|(u, &p)| grid.at(u, t) - p)
            .fold(0.0, f64::max)
    });
    if max_defect > tolerance {
        return Err(Error::ConsistencyFailure {
            defect: max_defect,
            tolerance,
        });
    }
    Ok(ConsistencyReport {
        max_defect,
        checked_up_to,
        finite_gap,
    })
}
