//! Small dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

// Padé(6/6) coefficients c_k = (2q-k)! q! / ((2q)! k! (q-k)!), q = 6.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé(6/6)
/// approximant. The scaled matrix has 1-norm at most 1/2, where the
/// approximant error is below double-precision roundoff.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);

    let ident = DMatrix::<f64>::identity(n, n);
    let mut num = ident.clone() * PADE6[0];
    let mut den = ident.clone() * PADE6[0];
    let mut power = ident;
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * c;
        if k % 2 == 0 {
            den += &power * c;
        } else {
            den -= &power * c;
        }
    }
    let mut result = den.lu().solve(&num).ok_or(Error::ExpmFailure)?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if !result.iter().all(|v| v.is_finite()) {
        return Err(Error::ExpmFailure);
    }
    Ok(result)
}

pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().map(|l| l.norm()).fold(0.0, f64::max)
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= rel_tol * smax).count()
}

/// Unit vector spanning the (numerical) null space of `m - lambda I`,
/// rotated so its largest entry is real and positive.
pub fn eigenvector(m: &DMatrix<f64>, lambda: Complex64) -> DVector<Complex64> {
    let n = m.nrows();
    let shifted = m.map(|v| Complex64::new(v, 0.0)) - DMatrix::<Complex64>::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let mut v: DVector<Complex64> = v_t.row(imin).transpose().map(|c| c.conj());
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        v *= phase;
    }
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    v
}

/// Monic characteristic polynomial of `m` by Faddeev–LeVerrier, highest
/// power first: `[1, c_1, ..., c_n]`.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        mk = m * &mk + &ident * c_prev;
        let c = -(m * &mk).trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}
