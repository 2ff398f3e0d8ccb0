//! Initial probabilities `m_0^(k) = P(M_k = 0)` from the unit-disk roots.
//!
//! Unknowns are ordered `m_0^(1), ..., m_0^(N)`. With the partial claim laws
//! `H_k = Z_N + Z_1 + ... + Z_{k-1}` the rows are
//!
//! * one row per root `α` (and per derivative order below its multiplicity):
//!   `z_0^(N) m_0^(1) + Σ_k z_0^(k) [d^l/ds^l G_{H_k}(s) s^{-k}]_{s=α} m_0^(k+1) = 0`,
//!   where the first coefficient is dropped for `l ≥ 1`;
//! * for every season with `z_0^(k) = 0`, the step-one relation
//!   `m_0^(k) = z_1^(k) m_0^(k+1)` (cyclic in `k`), which replaces the rows
//!   lost to the root at the origin;
//! * the mass row `z_0^(N) m_0^(1) + Σ_k z_0^(k) m_0^(k+1) = N - E S_N`, last.
//!
//! Non-real roots come in conjugate pairs; only the member with positive
//! imaginary part is used and its complex row is split into real and
//! imaginary parts, keeping the whole system real.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ModelClass, SeasonalModel};
use crate::pmf::IntegerPmf;
use crate::poly;
use crate::roots::{ser_complex, RootSet};

/// Residual bound on the solved system.
pub const TOL_SYS: f64 = 1e-10;

/// Slack allowed outside `[0, 1]` before a solution is rejected.
pub const TOL_PROB: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RowPart {
    Real,
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum RowProvenance {
    RootRow {
        #[serde(serialize_with = "ser_complex")]
        root: Complex64,
        part: RowPart,
    },
    DerivativeRow {
        #[serde(serialize_with = "ser_complex")]
        root: Complex64,
        order: usize,
        part: RowPart,
    },
    DegeneracyRow {
        season: usize,
    },
    MassRow,
}

#[derive(Debug, Clone)]
pub struct InitialSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub row_provenance: Vec<RowProvenance>,
    zero_z0: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialVector {
    /// `m0[k - 1] = P(M_k = 0)`.
    pub m0: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
}

impl InitialVector {
    /// Defect of `m_0^(1) z_0^(N) + Σ m_0^(k+1) z_0^(k) = N - E S_N`.
    pub fn mass_identity_defect(&self, model: &SeasonalModel) -> f64 {
        let n = model.n_seasons();
        let lhs: f64 = (0..n).map(|c| column_z0(model, c) * self.m0[c]).sum();
        (lhs - (n as f64 - model.mean_s_n())).abs()
    }
}

/// `z_0` multiplying unknown `m_0^(c+1)`: `z_0^(N)` for the first column,
/// `z_0^(c)` otherwise.
fn column_z0(model: &SeasonalModel, c: usize) -> f64 {
    if c == 0 {
        model.claim(model.n_seasons()).z0()
    } else {
        model.claim(c).z0()
    }
}

/// Coefficient arrays of `G_{H_k}` for `k = 1..N-1` (index `k - 1`).
fn partial_laws(model: &SeasonalModel) -> Vec<IntegerPmf> {
    let n = model.n_seasons();
    let mut out = Vec::with_capacity(n - 1);
    let mut acc = model.claim(n).clone();
    for k in 1..n {
        if k > 1 {
            acc = acc.convolve(model.claim(k - 1));
        }
        out.push(acc.clone());
    }
    out
}

/// `d^l/ds^l [ H(s) s^{-k} ]` at `α` by the Leibniz rule.
fn shifted_derivative(h: &[f64], k: usize, alpha: Complex64, l: usize) -> Complex64 {
    (0..=l)
        .map(|i| {
            let r = l - i;
            let power: f64 = (0..r).map(|q| -(k as f64) - q as f64).product();
            poly::binomial(l, i)
                * poly::derivative(h, alpha, i)
                * power
                * alpha.powi(-(k as i32) - r as i32)
        })
        .sum()
}

/// Complex coefficient row of order `l` for the root `α`.
fn root_row(
    model: &SeasonalModel,
    laws: &[IntegerPmf],
    alpha: Complex64,
    l: usize,
) -> Vec<Complex64> {
    let n = model.n_seasons();
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    if l == 0 {
        row[0] = Complex64::new(column_z0(model, 0), 0.0);
    }
    for k in 1..n {
        let z0 = column_z0(model, k);
        if z0 != 0.0 {
            row[k] = z0 * shifted_derivative(laws[k - 1].probs(), k, alpha, l);
        }
    }
    row
}

fn check_preconditions(model: &SeasonalModel) -> Result<()> {
    if model.n_seasons() < 2 {
        return Err(Error::InvalidArgument(
            "the initial-value system needs at least two seasons".into(),
        ));
    }
    if model.classify() != ModelClass::NetProfit {
        return Err(Error::InvalidArgument(format!(
            "initial values require the net profit condition, model is {}",
            model.classify().name()
        )));
    }
    Ok(())
}

pub fn build_initial_system(model: &SeasonalModel, roots: &RootSet) -> Result<InitialSystem> {
    check_preconditions(model)?;
    let n = model.n_seasons();
    let laws = partial_laws(model);
    let zero_z0: Vec<bool> = (1..=n).map(|k| model.claim(k).z0() == 0.0).collect();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let mut prov = Vec::with_capacity(n);

    for root in roots.roots() {
        let alpha = root.value;
        if alpha == Complex64::new(0.0, 0.0) || alpha.im < 0.0 {
            continue;
        }
        for l in 0..root.multiplicity {
            let row = root_row(model, &laws, alpha, l);
            let tag = |part| {
                if l == 0 {
                    RowProvenance::RootRow { root: alpha, part }
                } else {
                    RowProvenance::DerivativeRow {
                        root: alpha,
                        order: l,
                        part,
                    }
                }
            };
            if alpha.im == 0.0 {
                rows.push(row.iter().map(|c| c.re).collect());
                rhs.push(0.0);
                prov.push(tag(RowPart::Real));
            } else {
                rows.push(row.iter().map(|c| c.re).collect());
                rhs.push(0.0);
                prov.push(tag(RowPart::Re));
                rows.push(row.iter().map(|c| c.im).collect());
                rhs.push(0.0);
                prov.push(tag(RowPart::Im));
            }
        }
    }

    let singular = |rank: usize| Error::SingularInitialSystem {
        rank,
        size: n,
        zero_z0: zero_z0.clone(),
    };

    for k in 1..=n {
        if !zero_z0[k - 1] {
            continue;
        }
        let z1 = model.claim(k).prob(1);
        if z1 == 0.0 {
            return Err(singular(rows.len()));
        }
        let mut row = vec![0.0; n];
        row[k - 1] = 1.0;
        row[k % n] -= z1;
        rows.push(row);
        rhs.push(0.0);
        prov.push(RowProvenance::DegeneracyRow { season: k });
    }

    rows.push((0..n).map(|c| column_z0(model, c)).collect());
    rhs.push(n as f64 - model.mean_s_n());
    prov.push(RowProvenance::MassRow);

    if rows.len() != n {
        let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        return Err(singular(linalg::numerical_rank(&m).0));
    }
    Ok(InitialSystem {
        matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        rhs: DVector::from_vec(rhs),
        row_provenance: prov,
        zero_z0,
    })
}

pub fn solve_initial_values(system: &InitialSystem) -> Result<InitialVector> {
    let n = system.matrix.nrows();
    let singular = |rank| Error::SingularInitialSystem {
        rank,
        size: n,
        zero_z0: system.zero_z0.clone(),
    };
    let sol = linalg::solve_refined(&system.matrix, &system.rhs)
        .ok_or_else(|| singular(linalg::numerical_rank(&system.matrix).0))?;
    if sol.residual.is_nan() || sol.residual >= TOL_SYS {
        return Err(singular(sol.rank));
    }
    let m0: Vec<f64> = sol.x.iter().copied().collect();
    if m0
        .iter()
        .any(|&m| !(-TOL_PROB..=1.0 + TOL_PROB).contains(&m))
    {
        return Err(Error::NonProbabilisticSolution(m0));
    }
    Ok(InitialVector {
        m0,
        residual: sol.residual,
        condition: sol.condition,
    })
}

/// The same system kept complex: one row per root (both members of a
/// conjugate pair), derivative rows, then degeneracy and mass rows.
pub fn complex_initial_system(
    model: &SeasonalModel,
    roots: &RootSet,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let real = build_initial_system(model, roots)?;
    let n = model.n_seasons();
    let laws = partial_laws(model);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for root in roots.roots() {
        if root.value == Complex64::new(0.0, 0.0) {
            continue;
        }
        for l in 0..root.multiplicity {
            rows.push(root_row(model, &laws, root.value, l));
        }
    }
    for (i, p) in real.row_provenance.iter().enumerate() {
        if matches!(
            p,
            RowProvenance::DegeneracyRow { .. } | RowProvenance::MassRow
        ) {
            rows.push(real.matrix.row(i).iter().map(|&x| x.into()).collect());
        }
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[n - 1] = real.rhs[n - 1].into();
    Ok((
        DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        DVector::from_vec(rhs),
    ))
}

/// `(φ(0), φ(1))` for two seasons from the closed forms, with the negative
/// root located by bisection on `(-1, 0)` independently of [`crate::roots`].
pub fn bi_seasonal_closed_form(model: &SeasonalModel) -> Result<(f64, f64)> {
    if model.n_seasons() != 2 {
        return Err(Error::InvalidArgument(
            "closed form applies to two seasons only".into(),
        ));
    }
    let slack = 2.0 - model.mean_s_n();
    let (z1, z2) = (model.claim(1), model.claim(2));
    if model.classify() != ModelClass::NetProfit {
        return Err(Error::NetProfitViolation {
            mean: model.mean_s_n(),
            limit: 2.0,
        });
    }
    match (z1.z0() > 0.0, z2.z0() > 0.0) {
        (true, true) => {
            let alpha = negative_root_two_seasons(model)?;
            let g2 = poly::eval(z2.probs(), Complex64::new(alpha, 0.0)).re;
            Ok((
                slack * alpha / (alpha - g2),
                slack / z2.z0() * g2 / (g2 - alpha),
            ))
        }
        (true, false) => Ok((slack, slack / (z1.z0() * z2.prob(1)))),
        (false, true) => Ok((0.0, slack / z2.z0())),
        (false, false) => Err(Error::NetProfitViolation {
            mean: model.mean_s_n(),
            limit: 2.0,
        }),
    }
}

fn negative_root_two_seasons(model: &SeasonalModel) -> Result<f64> {
    let p = model.s_n().probs();
    let f = |s: f64| poly::eval(p, Complex64::new(s, 0.0)).re - s * s;
    let (mut lo, mut hi) = (-1.0, 0.0);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::RootCountMismatch {
            expected: 1,
            found: 0,
            candidates: Vec::new(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::DEFAULT_EPS_TAIL;
    use crate::roots::{find_unit_disk_roots, RootConfig};

    fn poisson_model(rates: &[f64]) -> SeasonalModel {
        SeasonalModel::new(
            rates
                .iter()
                .map(|&l| IntegerPmf::poisson(l, DEFAULT_EPS_TAIL).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn table_model(tables: &[&[f64]]) -> SeasonalModel {
        SeasonalModel::new(
            tables
                .iter()
                .map(|t| IntegerPmf::from_table(t).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn solve(model: &SeasonalModel) -> Result<(InitialSystem, InitialVector)> {
        let roots = find_unit_disk_roots(model, &RootConfig::default())?;
        let sys = build_initial_system(model, &roots)?;
        let v = solve_initial_values(&sys)?;
        Ok((sys, v))
    }

    #[test]
    fn bernoulli_double_root_matrix() {
        let m = table_model(&[&[0.8, 0.2], &[0.2, 0.8], &[0.8, 0.2]]);
        let (sys, v) = solve(&m).unwrap();
        let want = [[0.8, -1.6, 0.8], [0.0, -4.84, 4.84], [0.8, 0.8, 0.2]];
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert!((sys.matrix[(i, j)] - w).abs() < 1e-9, "({i},{j})");
            }
        }
        assert!((sys.rhs[0]).abs() < 1e-15 && sys.rhs[1] == 0.0);
        assert!((sys.rhs[2] - 1.8).abs() < 1e-12);
        assert!(matches!(
            sys.row_provenance[1],
            RowProvenance::DerivativeRow { order: 1, .. }
        ));
        assert!((v.m0[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_season_rows() {
        let m = poisson_model(&[0.3, 1.4]);
        let roots = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        let alpha = roots.roots()[0].value.re;
        let sys = build_initial_system(&m, &roots).unwrap();
        let (z01, z02) = (m.claim(1).z0(), m.claim(2).z0());
        let g2 = (1.4 * (alpha - 1.0)).exp();
        assert!((sys.matrix[(0, 0)] - z02).abs() < 1e-15);
        assert!((sys.matrix[(0, 1)] - z01 * g2 / alpha).abs() < 1e-12);
        assert_eq!(sys.matrix[(1, 0)], z02);
        assert_eq!(sys.matrix[(1, 1)], z01);
        assert!((sys.rhs[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn three_poisson_values() {
        let m = poisson_model(&[0.5, 2.0 / 3.0, 0.8]);
        let (sys, v) = solve(&m).unwrap();
        let want = [0.699796, 0.644968, 0.638276];
        for (got, want) in v.m0.iter().zip(want) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
        assert!(v.residual < TOL_SYS);
        assert!(matches!(
            sys.row_provenance[0],
            RowProvenance::RootRow {
                part: RowPart::Re,
                ..
            }
        ));
        assert!(matches!(
            sys.row_provenance[1],
            RowProvenance::RootRow {
                part: RowPart::Im,
                ..
            }
        ));
    }

    #[test]
    fn closed_form_matches_pipeline() {
        let m = poisson_model(&[0.3, 1.4]);
        let (_, v) = solve(&m).unwrap();
        let (phi0, phi1) = bi_seasonal_closed_form(&m).unwrap();
        assert!((phi0 - 0.2023378868).abs() < 1e-9);
        assert!((phi1 - v.m0[0]).abs() < 1e-9);
        // φ(0) = z_0^(1) m_0^(2)
        assert!((phi0 - m.claim(1).z0() * v.m0[1]).abs() < 1e-9);
    }

    #[test]
    fn closed_form_fair_coins() {
        // (1/2 + s/2)^2 = s^2 has the root s = -1/3 in (-1, 0).
        let m = table_model(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let alpha = -1.0 / 3.0;
        let g2 = 0.5 + 0.5 * alpha;
        let (phi0, phi1) = bi_seasonal_closed_form(&m).unwrap();
        assert!((phi0 - alpha / (alpha - g2)).abs() < 1e-14);
        assert!((phi0 - 0.5).abs() < 1e-14);
        let (_, v) = solve(&m).unwrap();
        assert!((v.m0[0] - phi1).abs() < 1e-12);
        assert!((phi1 - 2.0 * g2 / (g2 - alpha)).abs() < 1e-14);
    }

    #[test]
    fn closed_form_degenerate_cases() {
        // Z_1 = δ_0 and Z_2 = δ_1: the walk never moves.
        let m = table_model(&[&[1.0], &[0.0, 1.0]]);
        let (phi0, phi1) = bi_seasonal_closed_form(&m).unwrap();
        assert_eq!((phi0, phi1), (1.0, 1.0));

        let m = table_model(&[&[0.6, 0.4], &[0.0, 0.7, 0.3]]);
        let (phi0, phi1) = bi_seasonal_closed_form(&m).unwrap();
        let slack = 2.0 - 0.4 - 1.3;
        assert!((phi0 - slack).abs() < 1e-14);
        assert!((phi1 - slack / (0.6 * 0.7)).abs() < 1e-14);
        let (sys, v) = solve(&m).unwrap();
        assert!(sys
            .row_provenance
            .iter()
            .any(|p| matches!(p, RowProvenance::DegeneracyRow { season: 2 })));
        assert!((v.m0[0] - phi1).abs() < 1e-12);

        let m = table_model(&[&[0.0, 0.9, 0.1], &[0.7, 0.3]]);
        let (phi0, phi1) = bi_seasonal_closed_form(&m).unwrap();
        assert_eq!(phi0, 0.0);
        assert!((phi1 - (2.0 - 1.1 - 0.3) / 0.7).abs() < 1e-14);
        let (_, v) = solve(&m).unwrap();
        assert!((v.m0[0] - phi1).abs() < 1e-12);
    }

    #[test]
    fn unrepairable_zero_pattern() {
        // Z_1 >= 2 leaves a double root at 0 but only one relation.
        let m = table_model(&[&[0.0, 0.0, 1.0], &[0.9, 0.1], &[0.9, 0.1]]);
        assert!(matches!(
            solve(&m),
            Err(Error::SingularInitialSystem { .. })
        ));
    }

    #[test]
    fn complex_form_agrees_with_split_form() {
        for rates in [
            vec![0.5, 2.0 / 3.0, 0.8],
            vec![0.1, 0.9, 0.4, 1.1],
            vec![0.3, 0.3, 0.3, 0.3, 0.3],
        ] {
            let m = poisson_model(&rates);
            let roots = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
            let (_, v) = solve(&m).unwrap();
            let (a, b) = complex_initial_system(&m, &roots).unwrap();
            let x = a.lu().solve(&b).unwrap();
            for (c, r) in x.iter().zip(&v.m0) {
                assert!((c.re - r).abs() < 1e-10);
                assert!(c.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn root_rows_vanish_at_solution() {
        let rates: Vec<f64> = (1..=10).map(|k| k as f64 / (k + 1) as f64).collect();
        let m = poisson_model(&rates);
        let roots = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        let (_, v) = solve(&m).unwrap();
        let laws = partial_laws(&m);
        for r in roots.roots() {
            let row = root_row(&m, &laws, r.value, 0);
            let val: Complex64 = row.iter().zip(&v.m0).map(|(c, x)| c * x).sum();
            assert!(val.norm() < 1e-8);
        }
        assert!(v.mass_identity_defect(&m) < 1e-9);
    }

    #[test]
    fn shifted_derivative_matches_finite_difference() {
        let h = [0.3, 0.5, 0.2];
        let a = Complex64::new(-0.4, 0.2);
        let f = |s: Complex64| poly::eval(&h, s) * s.powi(-2);
        let eps = 1e-5;
        let fd = (f(a + eps) - f(a - eps)) / (2.0 * eps);
        assert!((shifted_derivative(&h, 2, a, 1) - fd).norm() < 1e-7);
        let fd2 = (f(a + eps) - 2.0 * f(a) + f(a - eps)) / (eps * eps);
        assert!((shifted_derivative(&h, 2, a, 2) - fd2).norm() < 1e-3);
    }

    #[test]
    fn preconditions() {
        let m = table_model(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert!(bi_seasonal_closed_form(&m).is_err());
        assert!(bi_seasonal_closed_form(&poisson_model(&[0.1, 0.1, 0.1])).is_err());
    }
}
