//! Roots of `G_{S_N}(s) = s^N` inside the open unit disk.
//!
//! Under the net-profit condition the equation has exactly `N - 1` roots
//! (counted with multiplicity) in `|s| < 1` besides the trivial root `s = 1`.
//! They are located on the truncated polynomial `P(s) = G_{S_N}(s) - s^N`:
//!
//! 1. exact zero low-order coefficients are factored out as a root at `s = 0`;
//! 2. the factor `s - 1` is divided out so the trivial root never competes;
//! 3. the remaining roots are found simultaneously by Aberth–Ehrlich iteration;
//! 4. interior candidates are Newton-polished on `P`, merged into clusters,
//!    and each cluster of size `k` is re-polished on `P^{(k-1)}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelClass, SeasonalModel};
use crate::poly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootConfig {
    /// Maximum accepted `|P(α)|`.
    pub tol_root: f64,
    /// Candidates with `|α| ≥ 1 - tol_boundary` but `|α| < 1` are rejected.
    pub tol_boundary: f64,
    /// Candidates closer than this are treated as one repeated root.
    pub tol_cluster: f64,
    /// Maximum accepted `|P^{(l)}(α)|` for `l` below the multiplicity.
    pub tol_mult: f64,
    pub max_poly_degree: usize,
    pub max_iterations: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            tol_root: 1e-10,
            tol_boundary: 1e-8,
            tol_cluster: 1e-6,
            tol_mult: 1e-6,
            max_poly_degree: 4096,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskRoot {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|G_{S_N}(value) - value^N|` on the truncated law.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    roots: Vec<DiskRoot>,
}

impl RootSet {
    pub fn roots(&self) -> &[DiskRoot] {
        &self.roots
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Multiplicity of the root at the origin (zero when absent).
    pub fn zero_multiplicity(&self) -> usize {
        self.roots
            .iter()
            .find(|r| r.value == Complex64::new(0.0, 0.0))
            .map_or(0, |r| r.multiplicity)
    }
}

pub(crate) fn ser_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Ascending coefficients of `G_{S_N}(s) - s^N` on the truncated law of `S_N`.
pub fn characteristic_polynomial(model: &SeasonalModel) -> Vec<f64> {
    let n = model.n_seasons();
    let mut coeffs = model.s_n().probs().to_vec();
    if coeffs.len() <= n {
        coeffs.resize(n + 1, 0.0);
    }
    coeffs[n] -= 1.0;
    while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    coeffs
}

pub fn find_unit_disk_roots(model: &SeasonalModel, cfg: &RootConfig) -> Result<RootSet> {
    let n = model.n_seasons();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "unit-disk roots are only needed for two or more seasons".into(),
        ));
    }
    if model.classify() != ModelClass::NetProfit {
        return Err(Error::InvalidArgument(format!(
            "root location requires the net profit condition, model is {}",
            model.classify().name()
        )));
    }
    let full = characteristic_polynomial(model);
    if full.len() - 1 > cfg.max_poly_degree {
        return Err(Error::ResourceLimit(format!(
            "characteristic polynomial degree {} exceeds {}",
            full.len() - 1,
            cfg.max_poly_degree
        )));
    }

    let zero_mult = full.iter().position(|&c| c != 0.0).unwrap_or(0);
    let reduced = deflate_unit_root(&full[zero_mult..]);
    let candidates = aberth(&reduced, cfg.max_iterations);

    let mut inside = Vec::new();
    let mut on_edge = false;
    for &z in &candidates {
        let r = z.norm();
        if r < 1.0 - cfg.tol_boundary {
            inside.push(z);
        } else if r < 1.0 {
            on_edge = true;
        }
    }
    let mismatch = |found: usize| Error::RootCountMismatch {
        expected: n - 1,
        found,
        candidates: candidates.iter().map(|z| (*z, z.norm())).collect(),
    };
    if on_edge || inside.len() + zero_mult != n - 1 {
        return Err(mismatch(inside.len() + zero_mult));
    }

    for z in inside.iter_mut() {
        *z = newton(&full, *z, 0, cfg.max_iterations);
        if z.im.abs() <= 1e-9 * z.norm().max(1.0) {
            *z = newton(&full, Complex64::new(z.re, 0.0), 0, cfg.max_iterations);
        }
    }

    let mut roots = Vec::new();
    if zero_mult > 0 {
        roots.push(DiskRoot {
            value: Complex64::new(0.0, 0.0),
            multiplicity: zero_mult,
            residual: 0.0,
        });
    }
    for cluster in clusters(&inside, cfg.tol_cluster) {
        let k = cluster.len();
        let center = cluster.iter().sum::<Complex64>() / k as f64;
        let center = if center.im.abs() <= 1e-9 * center.norm().max(1.0) {
            Complex64::new(center.re, 0.0)
        } else {
            center
        };
        let value = newton(&full, center, k - 1, cfg.max_iterations);
        let residual = poly::eval(&full, value).norm();
        if residual.is_nan() || residual >= cfg.tol_root {
            return Err(Error::RootRefinementFailure {
                root: value,
                residual,
            });
        }
        for l in 1..k {
            let d = poly::derivative(&full, value, l).norm();
            if d.is_nan() || d >= cfg.tol_mult {
                return Err(Error::RootRefinementFailure {
                    root: value,
                    residual: d,
                });
            }
        }
        roots.push(DiskRoot {
            value,
            multiplicity: k,
            residual,
        });
    }

    enforce_conjugate_closure(&mut roots).map_err(|_| mismatch(inside.len() + zero_mult))?;
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(RootSet { roots })
}

/// Quotient of `p(s)` by `s - 1`, discarding the (truncation-sized) remainder.
fn deflate_unit_root(p: &[f64]) -> Vec<f64> {
    let d = p.len() - 1;
    let mut q = vec![0.0; d];
    let mut carry = 0.0;
    for i in (1..=d).rev() {
        carry += p[i];
        q[i - 1] = carry;
    }
    q
}

/// All roots of the real polynomial `p` by Aberth–Ehrlich iteration.
pub(crate) fn aberth(p: &[f64], max_iterations: usize) -> Vec<Complex64> {
    let d = p.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![Complex64::new(-p[0] / p[1], 0.0)];
    }
    let radius = (p[0].abs() / p[d].abs()).powf(1.0 / d as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    for _ in 0..max_iterations {
        let mut converged = true;
        for i in 0..d {
            let v = poly::eval(p, z[i]);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = v / poly::derivative(p, z[i], 1);
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                if step.norm() > 1e-14 * z[i].norm().max(1.0) {
                    converged = false;
                }
            }
        }
        if converged {
            break;
        }
    }
    z
}

/// Newton iteration on the `order`-th derivative of `p`.
fn newton(p: &[f64], start: Complex64, order: usize, max_iterations: usize) -> Complex64 {
    let mut z = start;
    let mut best = (poly::derivative(p, z, order).norm(), z);
    for _ in 0..max_iterations {
        let f = poly::derivative(p, z, order);
        let df = poly::derivative(p, z, order + 1);
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        z -= step;
        let r = poly::derivative(p, z, order).norm();
        if r < best.0 {
            best = (r, z);
        }
        if step.norm() <= 1e-16 * z.norm().max(1e-3) {
            break;
        }
    }
    best.1
}

/// Single-linkage grouping of points closer than `tol`.
fn clusters(points: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() < tol {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &l) in label.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, v)) => v.push(points[i]),
            None => groups.push((l, vec![points[i]])),
        }
    }
    groups.into_iter().map(|(_, v)| v).collect()
}

/// Pairs every non-real root with its conjugate and makes the pair exact.
fn enforce_conjugate_closure(roots: &mut [DiskRoot]) -> std::result::Result<(), ()> {
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] || roots[i].value.im == 0.0 {
            continue;
        }
        if roots[i].value.im < 0.0 {
            continue;
        }
        let target = roots[i].value.conj();
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && j != i && roots[j].value.im < 0.0)
            .filter(|&j| roots[j].multiplicity == roots[i].multiplicity)
            .min_by(|&a, &b| {
                (roots[a].value - target)
                    .norm()
                    .total_cmp(&(roots[b].value - target).norm())
            })
            .ok_or(())?;
        if (roots[partner].value - target).norm() > 1e-8 {
            return Err(());
        }
        used[i] = true;
        used[partner] = true;
        roots[partner].value = target;
        roots[partner].residual = roots[i].residual;
    }
    let unpaired = roots
        .iter()
        .zip(&used)
        .any(|(r, &u)| r.value.im != 0.0 && !u);
    if unpaired {
        Err(())
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::{IntegerPmf, DEFAULT_EPS_TAIL};

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

    /// Winding number of `p` around the circle `|s| = radius`, i.e. the
    /// number of roots inside by the argument principle.
    fn winding_count(p: &[f64], radius: f64) -> usize {
        let steps = 20_000;
        let mut total = 0.0;
        let mut prev = poly::eval(p, Complex64::new(radius, 0.0));
        for k in 1..=steps {
            let s = Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / steps as f64);
            let cur = poly::eval(p, s);
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / std::f64::consts::TAU).round() as usize
    }

    /// Distinct roots reached by Newton from a polar grid of starting points.
    fn grid_newton_roots(p: &[f64]) -> Vec<Complex64> {
        let mut found: Vec<Complex64> = Vec::new();
        for i in 1..20 {
            for j in 0..36 {
                let z0 =
                    Complex64::from_polar(0.05 * i as f64, std::f64::consts::TAU * j as f64 / 36.0);
                let z = newton(p, z0, 0, 100);
                if poly::eval(p, z).norm() < 1e-12
                    && z.norm() < 0.999
                    && found.iter().all(|f| (f - z).norm() > 1e-6)
                {
                    found.push(z);
                }
            }
        }
        found
    }

    #[test]
    fn bi_poisson_real_root() {
        let set =
            find_unit_disk_roots(&poisson_model(&[0.3, 1.4]), &RootConfig::default()).unwrap();
        assert_eq!(set.roots().len(), 1);
        let r = set.roots()[0];
        assert_eq!(r.multiplicity, 1);
        assert_eq!(r.value.im, 0.0);
        assert!((r.value.re + 0.3244096519).abs() < 1e-9);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn three_poisson_conjugate_pair() {
        let set = find_unit_disk_roots(
            &poisson_model(&[0.5, 2.0 / 3.0, 0.8]),
            &RootConfig::default(),
        )
        .unwrap();
        assert_eq!(set.roots().len(), 2);
        let (a, b) = (set.roots()[0].value, set.roots()[1].value);
        assert_eq!(a, b.conj());
        assert!(a.im < 0.0);
        assert!((a - Complex64::new(-0.287678, -0.319495)).norm() < 1e-5);
    }

    #[test]
    fn bernoulli_double_root() {
        let m = table_model(&[&[0.8, 0.2], &[0.2, 0.8], &[0.8, 0.2]]);
        let set = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        assert_eq!(set.roots().len(), 1);
        let r = set.roots()[0];
        assert_eq!(r.multiplicity, 2);
        assert!((r.value.re + 4.0 / 11.0).abs() < 1e-12);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn zero_root_from_vanishing_z0() {
        // Z_2 >= 1 makes S_2 >= 1, so s = 0 solves G(s) = s^2.
        let m = table_model(&[&[0.6, 0.4], &[0.0, 0.7, 0.3]]);
        let set = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        assert_eq!(set.zero_multiplicity(), 1);
        assert_eq!(set.total_multiplicity(), 1);
    }

    #[test]
    fn preconditions() {
        let m = table_model(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert!(matches!(
            find_unit_disk_roots(&m, &RootConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
        let m = poisson_model(&[0.5]);
        assert!(find_unit_disk_roots(&m, &RootConfig::default()).is_err());
    }

    #[test]
    fn lattice_law_hits_the_boundary() {
        // Claims on {0, 2} make s = -1 a root of G(s)^2 = s^2 on the unit circle.
        let m = table_model(&[&[0.7, 0.0, 0.3], &[0.7, 0.0, 0.3]]);
        match find_unit_disk_roots(&m, &RootConfig::default()) {
            Err(Error::RootCountMismatch {
                expected,
                candidates,
                ..
            }) => {
                assert_eq!(expected, 1);
                assert!(candidates.iter().any(|(z, _)| (z + 1.0).norm() < 1e-6));
            }
            other => panic!("expected a root count mismatch, got {other:?}"),
        }
    }

    #[test]
    fn aberth_agrees_with_independent_oracles() {
        for rates in [
            vec![0.3, 1.4],
            vec![0.5, 2.0 / 3.0, 0.8],
            vec![0.1, 0.9, 0.4, 1.1],
        ] {
            let m = poisson_model(&rates);
            let p = characteristic_polynomial(&m);
            assert_eq!(winding_count(&p, 0.999), m.n_seasons() - 1, "{rates:?}");
            let set = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
            let grid = grid_newton_roots(&p);
            assert_eq!(grid.len(), set.roots().len(), "{rates:?} {grid:?}");
            for r in set.roots() {
                let nearest = grid
                    .iter()
                    .map(|e| (e - r.value).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-10, "{rates:?}: {} off by {nearest}", r.value);
            }
        }
    }

    #[test]
    fn ten_season_roots() {
        let rates: Vec<f64> = (1..=10).map(|k| k as f64 / (k + 1) as f64).collect();
        let set = find_unit_disk_roots(&poisson_model(&rates), &RootConfig::default()).unwrap();
        assert_eq!(set.total_multiplicity(), 9);
        for r in set.roots() {
            assert!(r.residual < 1e-10);
            assert!(r.value.norm() < 1.0);
        }
    }

    #[test]
    fn perturbed_laws_move_simple_roots_little() {
        let base = [[0.5, 0.3, 0.2], [0.6, 0.1, 0.3], [0.4, 0.4, 0.2]];
        let perturbed: Vec<Vec<f64>> = base
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.iter()
                    .enumerate()
                    .map(|(j, p)| p * (1.0 + 1e-12 * if (i + j) % 2 == 0 { 1.0 } else { -1.0 }))
                    .collect()
            })
            .collect();
        let a = find_unit_disk_roots(
            &table_model(&base.iter().map(|t| &t[..]).collect::<Vec<_>>()),
            &RootConfig::default(),
        )
        .unwrap();
        let b = find_unit_disk_roots(
            &table_model(&perturbed.iter().map(|t| &t[..]).collect::<Vec<_>>()),
            &RootConfig::default(),
        )
        .unwrap();
        assert_eq!(a.roots().len(), b.roots().len());
        for (x, y) in a.roots().iter().zip(b.roots()) {
            assert!((x.value - y.value).norm() < 1e-8);
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let m = poisson_model(&[0.5, 2.0 / 3.0, 0.8]);
        let a = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        let b = find_unit_disk_roots(&m, &RootConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clusters_merge_close_points() {
        let pts = [
            Complex64::new(0.1, 0.0),
            Complex64::new(0.1 + 1e-9, 0.0),
            Complex64::new(0.5, 0.0),
        ];
        let c = clusters(&pts, 1e-6);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].len(), 2);
    }
}
