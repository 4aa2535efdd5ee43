//! Uniform quantizer onto `d Z` and the linear-filter dynamic quantizers
//!
//! ```text
//! xi[k+1] = E xi[k] + F1 v[k] + F2 u[k]
//! v[k]    = q(G xi[k] + H u[k])
//! ```

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::{DiscretePlant, RELATIVE_DEGREE_TOL};
use crate::zeros::{self, SerialDecomposition};

/// Nearest-neighbour quantizer onto the lattice `d Z`. A value exactly half
/// way between two lattice points goes to the lower one, so level `w` owns
/// the interval `(w - d/2, w + d/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformQuantizer {
    d: f64,
}

impl UniformQuantizer {
    pub fn new(d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidParameter(format!("quantization width must be positive, got {d}")));
        }
        Ok(Self { d })
    }

    pub fn width(&self) -> f64 {
        self.d
    }

    /// Integer index `n` of the chosen lattice point `n d`.
    pub fn level(&self, mu: f64) -> i64 {
        (mu / self.d - 0.5).ceil() as i64
    }

    pub fn value(&self, level: i64) -> f64 {
        level as f64 * self.d
    }

    pub fn quantize(&self, mu: f64) -> f64 {
        self.value(self.level(mu))
    }
}

/// One quantizer output: the lattice index and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantized {
    pub level: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynQuantizerParams {
    pub e: DMatrix<f64>,
    pub f1: DVector<f64>,
    pub f2: DVector<f64>,
    pub g: RowDVector<f64>,
    pub h: f64,
}

impl DynQuantizerParams {
    /// `E = A, F1 = -F2 = B, G = -CA/(CB), H = 1` for the realization `(A, B, C)`.
    fn optimal_for(a: &DMatrix<f64>, b: &DVector<f64>, c: &RowDVector<f64>) -> Result<Self> {
        let cb = c.dot(&b.transpose());
        let tol = RELATIVE_DEGREE_TOL * c.norm() * b.norm();
        if cb.abs() < tol || cb == 0.0 {
            return Err(Error::RelativeDegree { cb, tol });
        }
        Ok(Self {
            e: a.clone(),
            f1: b.clone(),
            f2: -b,
            g: -(c * a) / cb,
            h: 1.0,
        })
    }

    /// Closed-loop state matrix `E + F1 G` seen by the quantizer state.
    pub fn internal_matrix(&self) -> DMatrix<f64> {
        &self.e + &self.f1 * &self.g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynQuantizerState {
    pub xi: DVector<f64>,
    pub params: DynQuantizerParams,
    pub q: UniformQuantizer,
}

impl DynQuantizerState {
    pub fn new(params: DynQuantizerParams, q: UniformQuantizer) -> Result<Self> {
        let n = params.e.nrows();
        if params.e.ncols() != n || params.f1.len() != n || params.f2.len() != n || params.g.len() != n {
            return Err(Error::Dimension("dynamic quantizer parameters disagree on state size".into()));
        }
        Ok(Self { xi: DVector::zeros(n), params, q })
    }

    /// Pure step: returns the quantized output and the successor state.
    pub fn step(&self, u: f64) -> (Quantized, Self) {
        let p = &self.params;
        let arg = p.g.dot(&self.xi.transpose()) + p.h * u;
        let level = self.q.level(arg);
        let v = self.q.value(level);
        let xi = &p.e * &self.xi + &p.f1 * v + &p.f2 * u;
        (
            Quantized { level, value: v },
            Self { xi, params: self.params.clone(), q: self.q },
        )
    }

    /// Runs the quantizer over a whole sequence from the current state.
    pub fn run(&self, inputs: &[f64]) -> (Vec<Quantized>, Vec<DVector<f64>>) {
        let mut state = self.clone();
        let mut out = Vec::with_capacity(inputs.len());
        let mut xis = Vec::with_capacity(inputs.len());
        for &u in inputs {
            xis.push(state.xi.clone());
            let (v, next) = state.step(u);
            out.push(v);
            state = next;
        }
        (out, xis)
    }
}

pub fn quantizer_step(state: &DynQuantizerState, u: f64) -> (Quantized, DynQuantizerState) {
    state.step(u)
}

/// Optimal dynamic quantizer for a minimum-phase plant. Its worst-case output
/// error is `|CB| d / 2`.
pub fn make_optimal_quantizer(plant: &DiscretePlant, d: f64) -> Result<DynQuantizerState> {
    let q = UniformQuantizer::new(d)?;
    let report = zeros::transmission_zeros(plant)?;
    if !report.minimum_phase {
        return Err(Error::NonMinimumPhase(report.unstable));
    }
    if let Some(&z) = report.marginal().first() {
        return Err(Error::MarginalZero(z));
    }
    DynQuantizerState::new(DynQuantizerParams::optimal_for(&plant.a, &plant.b, &plant.c)?, q)
}

/// Optimal quantizer of the minimum-phase factor `P_s`; the output error on
/// the full plant is `||P_u|| |C_s B_s| d / 2`.
pub fn make_serial_quantizer(decomposition: &SerialDecomposition, d: f64) -> Result<DynQuantizerState> {
    let q = UniformQuantizer::new(d)?;
    let ps = &decomposition.p_s;
    let params = DynQuantizerParams::optimal_for(&ps.a, &ps.b, &ps.c)?;
    DynQuantizerState::new(params, q)
}
