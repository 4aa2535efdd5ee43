//! Transmission zeros, serial decomposition of nonminimum-phase plants and
//! the closed-form output-error bounds for static and dynamic quantization.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::DiscretePlant;
use crate::poly;

/// Zeros closer than this to the unit circle cannot be classified.
pub const UNIT_CIRCLE_MARGIN: f64 = 1e-6;
/// Largest modulus accepted for the structural zero eigenvalue.
pub const STRUCTURAL_ZERO_TOL: f64 = 1e-6;
/// Target for the neglected tail of impulse-response sums.
pub const TAIL_TOL: f64 = 1e-9;
pub const MAX_SUM_TERMS: usize = 1_000_000;
/// Spectral radii at or above `1 - STABILITY_MARGIN` are treated as unstable.
pub const STABILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub zeros: Vec<Complex64>,
    pub unstable: Vec<Complex64>,
    pub relative_degree_one: bool,
    pub minimum_phase: bool,
}

impl ZeroReport {
    fn classify(zeros: Vec<Complex64>) -> Self {
        let unstable: Vec<_> = zeros.iter().copied().filter(|z| z.norm() > 1.0).collect();
        let minimum_phase = unstable.is_empty();
        Self { zeros, unstable, relative_degree_one: true, minimum_phase }
    }

    /// Zeros whose modulus is within [`UNIT_CIRCLE_MARGIN`] of one.
    pub fn marginal(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .copied()
            .filter(|z| (1.0 - z.norm()).abs() < UNIT_CIRCLE_MARGIN)
            .collect()
    }
}

/// `A - B (CA) / (CB)`. Its rows are annihilated by `C`.
pub fn zero_dynamics_matrix(plant: &DiscretePlant) -> Result<DMatrix<f64>> {
    let cb = plant.checked_cb()?;
    let ca = &plant.c * &plant.a;
    Ok(&plant.a - &plant.b * (ca / cb))
}

/// Output-zeroing feedback row `-CA / CB`.
pub fn zero_dynamics_gain(plant: &DiscretePlant) -> Result<RowDVector<f64>> {
    let cb = plant.checked_cb()?;
    Ok(-(&plant.c * &plant.a) / cb)
}

/// The `n - 1` transmission zeros of a relative-degree-one plant.
///
/// Computed as the eigenvalues of the zero-dynamics matrix after dropping the
/// structural eigenvalue at the origin. When the plant itself has a zero at
/// the origin the two cannot be told apart, so the numerator polynomial is
/// factored instead.
pub fn transmission_zeros(plant: &DiscretePlant) -> Result<ZeroReport> {
    let zdm = zero_dynamics_matrix(plant)?;
    let mut eig = linalg::eigenvalues(&zdm);
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let threshold = STRUCTURAL_ZERO_TOL * linalg::one_norm(&plant.a).max(1.0);
    let smallest = eig[0].norm();
    if smallest >= threshold {
        return Err(Error::StructuralZero { modulus: smallest });
    }
    let near_origin = eig.iter().filter(|z| z.norm() < threshold).count();
    let zeros = if near_origin > 1 {
        numerator_zeros(plant)
    } else {
        eig[1..].to_vec()
    };
    Ok(ZeroReport::classify(zeros))
}

/// Roots of the transfer-function numerator.
pub fn numerator_zeros(plant: &DiscretePlant) -> Vec<Complex64> {
    let (num, _) = transfer_function(plant);
    poly::roots(&num)
}

/// Numerator and monic denominator of `C (zI - A)^{-1} B`.
pub fn transfer_function(plant: &DiscretePlant) -> (Vec<f64>, Vec<f64>) {
    let den = linalg::char_poly(&plant.a);
    let markov = plant.markov_parameters(plant.order());
    (poly::numerator_from_markov(&den, &markov), den)
}

/// Generic SISO realization `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl Realization {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Controllable canonical form of `num(z) / den(z)`, both highest power
    /// first, `den` monic of degree `n` and `num` of degree below `n`.
    pub fn controllable_canonical(num: &[f64], den: &[f64]) -> Self {
        let n = den.len() - 1;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -den[n - j];
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let mut c = RowDVector::<f64>::zeros(n);
        for (k, &coef) in num.iter().rev().enumerate().take(n) {
            c[k] = coef;
        }
        Self { a, b, c, d: 0.0 }
    }

    /// `h[0] = D`, `h[k] = C A^{k-1} B`.
    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return out;
        }
        out.push(self.d);
        let mut v = self.b.clone();
        for _ in 1..len {
            out.push(self.c.dot(&v.transpose()));
            v = &self.a * v;
        }
        out
    }

    pub fn as_plant(&self, t_sample: f64) -> Result<DiscretePlant> {
        DiscretePlant::new_unchecked(self.a.clone(), self.b.clone(), self.c.clone(), t_sample)
    }
}

impl From<&DiscretePlant> for Realization {
    fn from(p: &DiscretePlant) -> Self {
        Self { a: p.a.clone(), b: p.b.clone(), c: p.c.clone(), d: 0.0 }
    }
}

/// `P = P_s * P_u` with `P_u(z) = (z - lambda) / z` carrying the single
/// unstable zero and `P_s` stable, minimum phase and strictly proper.
#[derive(Debug, Clone, PartialEq)]
pub struct SerialDecomposition {
    pub p_s: Realization,
    pub p_u: Realization,
    pub lambda: f64,
    pub cs_bs: f64,
}

impl SerialDecomposition {
    /// Impulse response of the cascade `P_s * P_u` (output of `P_s` driven
    /// by the output of `P_u`), `len` samples starting at `k = 0`.
    pub fn cascade_impulse_response(&self, len: usize) -> Vec<f64> {
        let hs = self.p_s.impulse_response(len);
        let hu = self.p_u.impulse_response(len);
        (0..len)
            .map(|k| (0..=k).map(|j| hs[j] * hu[k - j]).sum())
            .collect()
    }

    pub fn p_u_norm(&self) -> f64 {
        1.0 + self.lambda.abs()
    }
}

pub fn serial_decompose_single_zero(plant: &DiscretePlant) -> Result<SerialDecomposition> {
    let report = transmission_zeros(plant)?;
    if let Some(&z) = report.marginal().first() {
        return Err(Error::MarginalZero(z));
    }
    let lambda = match report.unstable.as_slice() {
        [] => return Err(Error::MinimumPhase),
        [l] => *l,
        many => return Err(Error::UnstableZeroCount(many.len())),
    };
    if lambda.im.abs() > 1e-9 * lambda.norm() {
        return Err(Error::ComplexUnstableZero(lambda));
    }
    let lambda = lambda.re;

    let (num, den) = transfer_function(plant);
    let (reduced, rem) = poly::deflate(&num, lambda);
    let scale = num.iter().map(|c| c.abs()).fold(0.0, f64::max) * lambda.abs().max(1.0).powi(num.len() as i32);
    if rem.abs() > 1e-8 * scale {
        return Err(Error::Deflation(rem));
    }
    // P_s = z * num(z) / ((z - lambda) den(z)): multiply the deflated numerator by z.
    let mut num_s = reduced;
    num_s.push(0.0);
    let p_s = Realization::controllable_canonical(&num_s, &den);
    let cs_bs = p_s.c.dot(&p_s.b.transpose());

    let p_u = Realization {
        a: DMatrix::zeros(1, 1),
        b: DVector::from_element(1, 1.0),
        c: RowDVector::from_element(1, -lambda),
        d: 1.0,
    };
    Ok(SerialDecomposition { p_s, p_u, lambda, cs_bs })
}

/// Sum of `|C A^k B|` with a rigorous bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsSum {
    pub partial: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

impl AbsSum {
    pub fn total(&self) -> f64 {
        self.partial + self.tail_bound
    }
}

/// Constants `(m, S_m, gamma)` with `||A^m|| = gamma < 1` and
/// `S_m = sum_{j<m} ||A^j||`, so that `sum_j ||A^j|| <= S_m / (1 - gamma)`.
fn power_envelope(a: &DMatrix<f64>) -> Option<(f64, f64)> {
    let n = a.nrows();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut s = 0.0;
    for _ in 0..10_000 {
        s += power.norm();
        power = a * &power;
        let g = power.norm();
        if g < 0.5 {
            return Some((s, g));
        }
    }
    None
}

fn abs_markov_sum(r: &Realization, fixed: Option<usize>) -> Result<AbsSum> {
    let n = r.order();
    let rho = linalg::spectral_radius(&r.a);
    let mut ak = DMatrix::<f64>::identity(n, n);
    let mut nilpotent_at = None;
    let mut nk = ak.clone();
    for k in 1..=n {
        nk = &r.a * nk;
        if nk.iter().all(|&v| v == 0.0) {
            nilpotent_at = Some(k);
            break;
        }
    }
    if let Some(m) = nilpotent_at {
        let mut partial = 0.0;
        for _ in 0..m {
            partial += (&r.c * &ak * &r.b)[0].abs();
            ak = &r.a * ak;
        }
        return Ok(AbsSum { partial, tail_bound: 0.0, terms: m });
    }
    if rho >= 1.0 - STABILITY_MARGIN {
        return Err(Error::Unstable { rho });
    }
    let (s_m, gamma) = power_envelope(&r.a).ok_or(Error::Unstable { rho })?;
    let k_const = r.c.norm() * r.b.norm() * s_m / (1.0 - gamma);
    let cap = fixed.unwrap_or(MAX_SUM_TERMS);
    let mut partial = 0.0;
    let mut terms = 0;
    loop {
        let tail = k_const * ak.norm();
        if terms >= cap || (fixed.is_none() && tail < TAIL_TOL) {
            return Ok(AbsSum { partial, tail_bound: tail, terms });
        }
        partial += (&r.c * &ak * &r.b)[0].abs();
        ak = &r.a * ak;
        terms += 1;
    }
}

/// Induced l-infinity gain `|D| + sum_k |C A^k B|`. Exact for FIR systems;
/// for stable IIR systems the first `truncation` terms are summed and a
/// geometric envelope of the remainder is added, so the value is an upper
/// bound within that envelope.
pub fn induced_linf_norm(r: &Realization, truncation: usize) -> Result<f64> {
    if truncation == 0 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    Ok(r.d.abs() + abs_markov_sum(r, Some(truncation))?.total())
}

/// Same as [`induced_linf_norm`] but with the truncation chosen adaptively
/// so the remainder bound is below [`TAIL_TOL`].
pub fn induced_linf_norm_adaptive(r: &Realization) -> Result<AbsSum> {
    let s = abs_markov_sum(r, None)?;
    Ok(AbsSum { partial: s.partial + r.d.abs(), ..s })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub cb: f64,
    /// `(1/2) sum |C A^k B| d`, static quantization.
    pub static_bound: f64,
    /// `(1/2) |CB| d`, optimal dynamic quantizer (minimum-phase plants).
    pub dyn_opt_bound: f64,
    /// `(1/2) ||P_u|| |C_s B_s| d`, serial-decomposition quantizer.
    pub serial_bound: Option<f64>,
    /// `|CB| d + |CB| delta`.
    pub eps_stealthy_bound: f64,
    pub markov_terms: usize,
}

pub fn compute_bounds(
    plant: &DiscretePlant,
    decomposition: Option<&SerialDecomposition>,
    d: f64,
    delta: f64,
    truncation: Option<usize>,
) -> Result<BoundSet> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParameter(format!("quantization width must be positive, got {d}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    let cb = plant.checked_cb()?;
    let sum = abs_markov_sum(&Realization::from(plant), truncation)?;
    let serial_bound = match decomposition {
        Some(dec) => {
            let pu = induced_linf_norm(&dec.p_u, 1)?;
            Some(0.5 * pu * dec.cs_bs.abs() * d)
        }
        None => None,
    };
    Ok(BoundSet {
        cb,
        static_bound: 0.5 * sum.total() * d,
        dyn_opt_bound: 0.5 * cb.abs() * d,
        serial_bound,
        eps_stealthy_bound: cb.abs() * d + cb.abs() * delta,
        markov_terms: sum.terms,
    })
}
