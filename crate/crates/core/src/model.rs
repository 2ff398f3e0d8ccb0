//! The N-seasonal discrete-time risk model and its net-profit classification.
//!
//! The surplus evolves as `W_u(n) = u + n - (Z_1 + ... + Z_n)` where the claim
//! laws repeat with period `N`, i.e. `Z_{N+j}` has the law of `Z_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::IntegerPmf;

/// Default upper bound on the number of seasons.
pub const DEFAULT_MAX_SEASONS: usize = 16;

/// Half-width of the band around `E S_N = N` treated as critical.
pub const EPS_NPC: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SeasonalModel {
    claims: Vec<IntegerPmf>,
    s_n: IntegerPmf,
}

impl SeasonalModel {
    pub fn new(claims: Vec<IntegerPmf>) -> Result<Self> {
        Self::with_max_seasons(claims, DEFAULT_MAX_SEASONS)
    }

    pub fn with_max_seasons(claims: Vec<IntegerPmf>, max_seasons: usize) -> Result<Self> {
        if claims.is_empty() {
            return Err(Error::InvalidModel(
                "at least one season is required".into(),
            ));
        }
        if claims.len() > max_seasons {
            return Err(Error::InvalidModel(format!(
                "{} seasons exceeds the configured maximum {max_seasons}",
                claims.len()
            )));
        }
        let s_n = claims[1..]
            .iter()
            .fold(claims[0].clone(), |acc, z| acc.convolve(z));
        Ok(Self { claims, s_n })
    }

    /// Period `N`.
    pub fn n_seasons(&self) -> usize {
        self.claims.len()
    }

    pub fn claims(&self) -> &[IntegerPmf] {
        &self.claims
    }

    /// Claim law of season `k`, 1-based and cyclic (`claim(N + 1) == claim(1)`).
    pub fn claim(&self, k: usize) -> &IntegerPmf {
        let n = self.claims.len();
        &self.claims[(k + n - 1) % n]
    }

    /// Law of `S_N = Z_1 + ... + Z_N`.
    pub fn s_n(&self) -> &IntegerPmf {
        &self.s_n
    }

    /// `E S_N` as the sum of the seasonal means.
    pub fn mean_s_n(&self) -> f64 {
        self.claims.iter().map(IntegerPmf::mean).sum()
    }

    /// Total truncation mass dropped across the seasonal laws.
    pub fn tail_mass(&self) -> f64 {
        self.claims.iter().map(IntegerPmf::tail_mass).sum()
    }

    pub fn classify(&self) -> ModelClass {
        let n = self.n_seasons();
        let point_masses: Option<Vec<usize>> =
            self.claims.iter().map(IntegerPmf::point_mass_at).collect();
        if let Some(ks) = point_masses {
            let total: usize = ks.iter().sum();
            return match total.cmp(&n) {
                std::cmp::Ordering::Less => ModelClass::NetProfit,
                std::cmp::Ordering::Greater => ModelClass::Supercritical,
                std::cmp::Ordering::Equal => {
                    let (t_star, min_drift) = deterministic_min_drift(&ks);
                    ModelClass::CriticalDegenerate { t_star, min_drift }
                }
            };
        }
        let mean = self.mean_s_n();
        let n = n as f64;
        if mean < n - EPS_NPC {
            ModelClass::NetProfit
        } else if mean > n + EPS_NPC {
            ModelClass::Supercritical
        } else {
            ModelClass::CriticalNondegenerate
        }
    }
}

/// Smallest minimizer of `t - (k_1 + ... + k_t)` over `t = 1..=N` and the minimum.
fn deterministic_min_drift(ks: &[usize]) -> (usize, i64) {
    let mut best = (0, i64::MAX);
    let mut claimed = 0i64;
    for (i, &k) in ks.iter().enumerate() {
        claimed += k as i64;
        let drift = (i + 1) as i64 - claimed;
        if drift < best.1 {
            best = (i + 1, drift);
        }
    }
    best
}

/// Position of a model relative to the net-profit condition `E S_N < N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "tag")]
pub enum ModelClass {
    NetProfit,
    Supercritical,
    CriticalNondegenerate,
    /// Every claim is a point mass and `S_N = N`; the walk is periodic.
    CriticalDegenerate {
        t_star: usize,
        min_drift: i64,
    },
}

impl ModelClass {
    pub fn name(&self) -> &'static str {
        match self {
            ModelClass::NetProfit => "NetProfit",
            ModelClass::Supercritical => "Supercritical",
            ModelClass::CriticalNondegenerate => "CriticalNondegenerate",
            ModelClass::CriticalDegenerate { .. } => "CriticalDegenerate",
        }
    }

    /// Survival of the periodic deterministic walk started at `u`: zero when
    /// the surplus touches zero within the first period, one otherwise.
    pub fn degenerate_survival(&self, u: u64) -> Result<f64> {
        match *self {
            ModelClass::CriticalDegenerate { min_drift, .. } => {
                Ok(if u as i64 + min_drift <= 0 { 0.0 } else { 1.0 })
            }
            other => Err(Error::InvalidArgument(format!(
                "degenerate survival requested for a {} model",
                other.name()
            ))),
        }
    }
}
