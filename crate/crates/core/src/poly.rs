//! Real polynomials stored highest power first.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg;

pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    roots.iter().fold(vec![1.0], |p, &r| mul(&p, &[1.0, -r]))
}

pub fn mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn eval(p: &[f64], z: Complex64) -> Complex64 {
    p.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Synthetic division by `(z - root)`. Returns quotient and remainder.
pub fn deflate(p: &[f64], root: f64) -> (Vec<f64>, f64) {
    let mut q = Vec::with_capacity(p.len().saturating_sub(1));
    let mut acc = 0.0;
    for (i, &c) in p.iter().enumerate() {
        acc = acc * root + c;
        if i + 1 < p.len() {
            q.push(acc);
        }
    }
    (q, acc)
}

/// Roots as eigenvalues of the companion matrix.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let lead = p.iter().position(|&c| c != 0.0);
    let Some(lead) = lead else {
        return Vec::new();
    };
    let p = &p[lead..];
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -p[j + 1] / p[0];
    }
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    linalg::eigenvalues(&comp)
}

/// Numerator of `C (zI - A)^{-1} B` given the monic denominator
/// `[1, a_1, ..., a_n]` and Markov parameters `h[k] = C A^k B`. The result
/// has degree `n - 1`: `beta_j = h[j-1] + sum_{i=1}^{j-1} a_i h[j-1-i]`.
pub fn numerator_from_markov(den: &[f64], markov: &[f64]) -> Vec<f64> {
    let n = den.len() - 1;
    (1..=n)
        .map(|j| markov[j - 1] + (1..j).map(|i| den[i] * markov[j - 1 - i]).sum::<f64>())
        .collect()
}
