//! Probability mass functions of non-negative integer random variables and
//! their probability generating functions.
//!
//! Laws with infinite support are truncated at the smallest degree whose
//! discarded tail mass is below a tolerance `eps_tail`. The discarded mass is
//! kept in [`IntegerPmf::tail_mass`] so callers can bound the truncation error
//! of anything computed from the truncated table.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;

/// Default truncation tolerance for infinite-support laws.
pub const DEFAULT_EPS_TAIL: f64 = 1e-14;

/// Largest `|s|` accepted by [`IntegerPmf::pgf_eval`].
const DISK_SLACK: f64 = 1e-9;

/// Law of a non-negative integer random variable, `probs[j] = P(X = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerPmf {
    probs: Vec<f64>,
    tail_mass: f64,
    mean: f64,
}

impl IntegerPmf {
    /// Normalizes non-negative weights into a finitely supported law.
    pub fn from_table(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights must be finite and non-negative, got {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution(
                "weights must have a positive sum".into(),
            ));
        }
        let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        let probs = weights[..=last].iter().map(|w| w / total).collect();
        Ok(Self::from_parts(probs, 0.0))
    }

    /// Point mass at `k`.
    pub fn point_mass(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self::from_parts(probs, 0.0)
    }

    /// Poisson law truncated so that the discarded tail is below `eps_tail`.
    pub fn poisson(lambda: f64, eps_tail: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "Poisson rate must be positive and finite, got {lambda}"
            )));
        }
        if !(eps_tail > 0.0 && eps_tail < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail tolerance must lie in (0, 1), got {eps_tail}"
            )));
        }
        // Generate terms in log space well past the point where they stop
        // contributing, then take suffix sums to locate the cut.
        let ln_lambda = lambda.ln();
        let mut terms = Vec::new();
        let mut ln_fact = 0.0;
        let mut j = 0usize;
        loop {
            if j > 0 {
                ln_fact += (j as f64).ln();
            }
            let p = (-lambda + j as f64 * ln_lambda - ln_fact).exp();
            terms.push(p);
            if j as f64 > lambda && p < eps_tail * 1e-6 {
                break;
            }
            j += 1;
        }
        let mut suffix = vec![0.0; terms.len() + 1];
        for i in (0..terms.len()).rev() {
            suffix[i] = suffix[i + 1] + terms[i];
        }
        let degree = (0..terms.len())
            .find(|&d| suffix[d + 1] < eps_tail)
            .unwrap_or(terms.len() - 1);
        terms.truncate(degree + 1);
        Ok(Self::from_parts(terms, suffix[degree + 1]))
    }

    fn from_parts(probs: Vec<f64>, tail_mass: f64) -> Self {
        let mean = probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
        Self {
            probs,
            tail_mass,
            mean,
        }
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    ///
    /// The resulting tail mass is the sum of the input tails, an upper bound
    /// on the mass the truncated convolution misses.
    pub fn convolve(&self, other: &IntegerPmf) -> IntegerPmf {
        let mut probs = poly::convolve(&self.probs, &other.probs);
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        Self::from_parts(probs, self.tail_mass + other.tail_mass)
    }

    /// `Σ probs[j] s^j`, valid on the closed unit disk.
    pub fn pgf_eval(&self, s: Complex64) -> Result<Complex64> {
        if s.norm().is_nan() || s.norm() > 1.0 + DISK_SLACK {
            return Err(Error::DomainError(format!(
                "|s| = {} exceeds the unit disk",
                s.norm()
            )));
        }
        Ok(poly::eval(&self.probs, s))
    }

    /// Exact `order`-th derivative of the truncated generating function.
    pub fn pgf_derivative(&self, s: Complex64, order: usize) -> Result<Complex64> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "derivative order must be at least 1".into(),
            ));
        }
        Ok(poly::derivative(&self.probs, s, order))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(X = j)`, zero beyond the truncation degree.
    pub fn prob(&self, j: usize) -> f64 {
        self.probs.get(j).copied().unwrap_or(0.0)
    }

    /// Truncation degree `D`.
    pub fn degree(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean of the truncated table.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `P(X = 0)`.
    pub fn z0(&self) -> f64 {
        self.probs[0]
    }

    /// `Some(k)` when the law is exactly `δ_k`.
    pub fn point_mass_at(&self) -> Option<usize> {
        if self.tail_mass != 0.0 {
            return None;
        }
        let mut support = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, _)| j);
        match (support.next(), support.next()) {
            (Some(k), None) => Some(k),
            _ => None,
        }
    }

    /// Smallest `j` with `P(X = j) > 0`.
    pub fn min_support(&self) -> usize {
        self.probs.iter().position(|&p| p > 0.0).unwrap_or(0)
    }
}
