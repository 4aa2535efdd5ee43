//! Attack-signal generators.
//!
//! * real-valued zero-dynamics attack (ZDA),
//! * method 1: ZDA quantized statically,
//! * method 2: ZDA passed through the serial-decomposition dynamic quantizer,
//! * method 3: the epsilon-stealthy quantized attack, which keeps `C z[k]`
//!   pinned near `sign(CB) eps` while `z` is driven by a strictly positive
//!   input into the unstable zero dynamics.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::DiscretePlant;
use crate::quantizer::{make_serial_quantizer, UniformQuantizer};
use crate::zeros::{self, SerialDecomposition};

pub const DEFAULT_SCALE: f64 = 1e-6;
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Generation stops once an internal state norm exceeds this.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct ZdaState {
    pub z: DVector<f64>,
    pub zdm: DMatrix<f64>,
    pub gain: RowDVector<f64>,
}

impl ZdaState {
    /// State with a caller-chosen `z[0]`, which must lie in `ker C`.
    pub fn with_initial(plant: &DiscretePlant, z0: DVector<f64>) -> Result<Self> {
        if z0.len() != plant.order() {
            return Err(Error::Dimension(format!("z0 has length {}, expected {}", z0.len(), plant.order())));
        }
        let cz = plant.output(&z0).abs();
        if cz > 1e-10 * plant.c.norm() * z0.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!("z0 is not in ker C (C z0 = {cz:e})")));
        }
        Ok(Self {
            z: z0,
            zdm: zeros::zero_dynamics_matrix(plant)?,
            gain: zeros::zero_dynamics_gain(plant)?,
        })
    }

    pub fn step(&self) -> (f64, ZdaState) {
        let a = self.gain.dot(&self.z.transpose());
        let z = &self.zdm * &self.z;
        (a, Self { z, zdm: self.zdm.clone(), gain: self.gain.clone() })
    }
}

/// Initial ZDA state `scale * w`, where `w` is a unit vector of `ker C`
/// aligned with the dominant unstable eigenvector of the zero-dynamics matrix.
pub fn zda_init(plant: &DiscretePlant, scale: f64) -> Result<ZdaState> {
    if !scale.is_finite() {
        return Err(Error::NonFinite("attack scale"));
    }
    let zdm = zeros::zero_dynamics_matrix(plant)?;
    let gain = zeros::zero_dynamics_gain(plant)?;
    let eig = linalg::eigenvalues(&zdm);
    let dominant = eig
        .iter()
        .copied()
        .filter(|l| l.norm() > 1.0)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(Error::MinimumPhase)?;

    let v = linalg::eigenvector(&zdm, dominant);
    let mut w = real_direction(&v);
    // Any eigenvector with non-zero eigenvalue already satisfies C v = 0;
    // the projection only removes roundoff.
    let c = plant.c.transpose();
    w -= &c * (c.dot(&w) / c.norm_squared());
    let w = if w.norm() > 1e-12 {
        w.normalize()
    } else {
        log::warn!("dominant unstable eigenvector projects to zero on ker C; using a kernel basis vector");
        kernel_fallback(plant, &zdm)?
    };
    Ok(ZdaState { z: w * scale, zdm, gain })
}

fn real_direction(v: &DVector<Complex64>) -> DVector<f64> {
    let re = v.map(|c| c.re);
    let im = v.map(|c| c.im);
    if re.norm() >= im.norm() {
        re
    } else {
        im
    }
}

/// Picks the `ker C` basis vector that grows fastest under the zero dynamics.
fn kernel_fallback(plant: &DiscretePlant, zdm: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = plant.order();
    let c = plant.c.transpose();
    let steps = 8 * n;
    let mut best: Option<(f64, DVector<f64>)> = None;
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let w = &e - &c * (c.dot(&e) / c.norm_squared());
        if w.norm() < 1e-12 {
            continue;
        }
        let w = w.normalize();
        let mut z = w.clone();
        for _ in 0..steps {
            z = zdm * z;
        }
        let growth = z.norm();
        if best.as_ref().is_none_or(|(g, _)| growth > *g) {
            best = Some((growth, w));
        }
    }
    match best {
        Some((g, w)) if g > 1.0 => Ok(w),
        _ => Err(Error::NoUnstableExcitation),
    }
}

pub fn zda_step(state: &ZdaState) -> (f64, ZdaState) {
    state.step()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMethod {
    ZdaReal,
    StaticQ,
    DynamicQ,
    EpsStealthy,
}

impl AttackMethod {
    pub fn name(&self) -> &'static str {
        match self {
            AttackMethod::ZdaReal => "zda_real",
            AttackMethod::StaticQ => "static",
            AttackMethod::DynamicQ => "dynamic",
            AttackMethod::EpsStealthy => "eps_stealthy",
        }
    }
}

/// Per-step internal quantities kept for replay and identity checks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttackAux {
    /// Generator state `z[k]` at the step that produced `b[k]`.
    pub z: Vec<DVector<f64>>,
    /// Real-valued ZDA samples `a[k]` (ZDA-based methods).
    pub a: Vec<f64>,
    /// Dynamic quantizer state `xi[k]` (method 2).
    pub xi: Vec<DVector<f64>>,
    /// Quantization slack `w[k]` in `(0, d]` (method 3).
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSignal {
    pub method: AttackMethod,
    pub values: Vec<f64>,
    /// Lattice indices; `values[k] == levels[k] * d` for quantized methods.
    pub levels: Option<Vec<i64>>,
    pub d: Option<f64>,
    pub aux: AttackAux,
    /// Set when the requested horizon was cut short by the overflow guard.
    pub truncated_at: Option<usize>,
    /// Method 3 with `eps < |CB| d`: the attack collapses to zero.
    pub degenerate: bool,
}

impl AttackSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&b| b == 0.0)
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Unquantized ZDA `a[k] = -CA/(CB) z[k]`.
pub fn zda_real(zda: &ZdaState, horizon: usize, guard: f64) -> Result<AttackSignal> {
    check_horizon(horizon)?;
    let mut state = zda.clone();
    let mut aux = AttackAux::default();
    let mut values = Vec::with_capacity(horizon);
    let mut truncated_at = None;
    for k in 0..horizon {
        if state.z.norm() > guard {
            truncated_at = Some(k);
            break;
        }
        let (a, next) = state.step();
        aux.z.push(state.z.clone());
        aux.a.push(a);
        values.push(a);
        state = next;
    }
    Ok(AttackSignal {
        method: AttackMethod::ZdaReal,
        values,
        levels: None,
        d: None,
        aux,
        truncated_at,
        degenerate: false,
    })
}

/// Method 1: `b[k] = q(a[k])`; the ZDA itself evolves on real values.
pub fn method1_static(zda: &ZdaState, d: f64, horizon: usize, guard: f64) -> Result<AttackSignal> {
    let q = UniformQuantizer::new(d)?;
    let mut sig = zda_real(zda, horizon, guard)?;
    let levels: Vec<i64> = sig.aux.a.iter().map(|&a| q.level(a)).collect();
    sig.values = levels.iter().map(|&l| q.value(l)).collect();
    sig.levels = Some(levels);
    sig.d = Some(d);
    sig.method = AttackMethod::StaticQ;
    Ok(sig)
}

/// Method 2: the ZDA fed through the serial dynamic quantizer with `u := a`.
pub fn method2_dynamic(
    decomposition: &SerialDecomposition,
    zda: &ZdaState,
    d: f64,
    horizon: usize,
    guard: f64,
) -> Result<AttackSignal> {
    check_horizon(horizon)?;
    let mut quant = make_serial_quantizer(decomposition, d)?;
    let mut state = zda.clone();
    let mut aux = AttackAux::default();
    let mut values = Vec::with_capacity(horizon);
    let mut levels = Vec::with_capacity(horizon);
    let mut truncated_at = None;
    for k in 0..horizon {
        if state.z.norm() > guard || quant.xi.norm() > guard {
            truncated_at = Some(k);
            break;
        }
        let (a, next) = state.step();
        let (b, next_q) = quant.step(a);
        aux.z.push(state.z.clone());
        aux.a.push(a);
        aux.xi.push(quant.xi.clone());
        values.push(b.value);
        levels.push(b.level);
        state = next;
        quant = next_q;
    }
    Ok(AttackSignal {
        method: AttackMethod::DynamicQ,
        values,
        levels: Some(levels),
        d: Some(d),
        aux,
        truncated_at,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsStealthyState {
    pub z: DVector<f64>,
    pub eps: f64,
    pub delta: f64,
    pub q: UniformQuantizer,
    gain: RowDVector<f64>,
    /// `sign(CB) eps / CB`
    offset: f64,
}

impl EpsStealthyState {
    pub fn new(plant: &DiscretePlant, eps: f64, delta: f64, d: f64) -> Result<Self> {
        let q = UniformQuantizer::new(d)?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let cb = plant.checked_cb()?;
        Ok(Self {
            z: DVector::zeros(plant.order()),
            eps,
            delta,
            q,
            gain: zeros::zero_dynamics_gain(plant)?,
            offset: cb.signum() * eps / cb,
        })
    }

    /// Returns `(b[k], w[k], next)` with
    /// `b = q(-CA/CB z + sign(CB) eps/CB - d/2 + delta)` and
    /// `w = (-CA/CB z + sign(CB) eps/CB + delta) - b`.
    pub fn step(&self, plant: &DiscretePlant) -> (i64, f64, f64, Self) {
        let target = self.gain.dot(&self.z.transpose()) + self.offset + self.delta;
        let level = self.q.level(target - 0.5 * self.q.width());
        let b = self.q.value(level);
        let w = target - b;
        let z = plant.step(&self.z, b);
        (level, b, w, Self { z, ..self.clone() })
    }
}

/// Method 3, the epsilon-stealthy quantized attack. `z[0] = 0`.
pub fn method3_eps_stealthy(
    plant: &DiscretePlant,
    eps: f64,
    delta: f64,
    d: f64,
    horizon: usize,
    guard: f64,
) -> Result<AttackSignal> {
    check_horizon(horizon)?;
    let mut state = EpsStealthyState::new(plant, eps, delta, d)?;
    let degenerate = eps < plant.cb().abs() * d;
    let mut aux = AttackAux::default();
    let mut values = Vec::with_capacity(horizon);
    let mut levels = Vec::with_capacity(horizon);
    let mut truncated_at = None;
    for k in 0..horizon {
        if state.z.norm() > guard {
            truncated_at = Some(k);
            break;
        }
        let (level, b, w, next) = state.step(plant);
        aux.z.push(state.z.clone());
        aux.w.push(w);
        values.push(b);
        levels.push(level);
        state = next;
    }
    Ok(AttackSignal {
        method: AttackMethod::EpsStealthy,
        values,
        levels: Some(levels),
        d: Some(d),
        aux,
        truncated_at,
        degenerate,
    })
}

/// Unquantized counterpart of method 3:
/// `z+ = (A - BCA/CB) z + B eps/CB`, `a = -CA/CB z + eps/CB`, `z[0] = 0`.
/// Drives `C z[k] = eps` for `k >= 1`. Reference only; it carries no sign
/// correction, so for `CB < 0` it is not what method 3 quantizes.
pub fn eps_stealthy_reference(plant: &DiscretePlant, eps: f64, horizon: usize) -> Result<Vec<f64>> {
    let cb = plant.checked_cb()?;
    let zdm = zeros::zero_dynamics_matrix(plant)?;
    let gain = zeros::zero_dynamics_gain(plant)?;
    let mut z = DVector::zeros(plant.order());
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(gain.dot(&z.transpose()) + eps / cb);
        z = &zdm * z + &plant.b * (eps / cb);
    }
    Ok(out)
}
