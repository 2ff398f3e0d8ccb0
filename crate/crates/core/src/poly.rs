//! Dense polynomial helpers on ascending coefficient slices.

use num_complex::Complex64;

/// Horner evaluation of `Σ c[j] s^j`.
pub(crate) fn eval<T>(coeffs: &[T], s: Complex64) -> Complex64
where
    T: Copy + Into<Complex64>,
{
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c.into())
}

/// `order`-th derivative of `Σ c[j] s^j` at `s`.
pub(crate) fn derivative<T>(coeffs: &[T], s: Complex64, order: usize) -> Complex64
where
    T: Copy + Into<Complex64>,
{
    if order == 0 {
        return eval(coeffs, s);
    }
    if coeffs.len() <= order {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in (order..coeffs.len()).rev() {
        acc = acc * s + coeffs[j].into() * falling_factorial(j, order);
    }
    acc
}

/// `j (j-1) ... (j-order+1)`.
pub(crate) fn falling_factorial(j: usize, order: usize) -> f64 {
    (0..order).map(|i| (j - i) as f64).product()
}

pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
