//! Continuous and discrete SISO LTI plants, zero-order-hold discretization and
//! exact step-wise simulation.
//!
//! The discrete model is
//!
//! ```text
//! x[k+1] = A x[k] + B u[k],   y[k] = C x[k]
//! ```
//!
//! with `A = exp(A_c T)` and `B = (∫_0^T exp(A_c τ) dτ) B_c`. Both blocks come
//! out of a single exponential of the augmented matrix `[[A_c, B_c], [0, 0]]`.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for declaring `CB != 0`.
pub const RELATIVE_DEGREE_TOL: f64 = 1e-9;
/// Singular values below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPlant {
    pub a_c: DMatrix<f64>,
    pub b_c: DVector<f64>,
    pub c: RowDVector<f64>,
    pub x0: DVector<f64>,
}

impl ContinuousPlant {
    /// Builds a plant and checks that `a_c` is Hurwitz.
    pub fn new(
        a_c: DMatrix<f64>,
        b_c: DVector<f64>,
        c: RowDVector<f64>,
        x0: DVector<f64>,
    ) -> Result<Self> {
        let plant = Self::new_unchecked(a_c, b_c, c, x0)?;
        let max_real = plant
            .a_c
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_real >= 0.0 {
            return Err(Error::NotHurwitz { max_real });
        }
        Ok(plant)
    }

    /// Dimension and finiteness checks only; stability is not enforced.
    pub fn new_unchecked(
        a_c: DMatrix<f64>,
        b_c: DVector<f64>,
        c: RowDVector<f64>,
        x0: DVector<f64>,
    ) -> Result<Self> {
        let n = a_c.nrows();
        check_dims(&a_c, &b_c, &c)?;
        if x0.len() != n {
            return Err(Error::Dimension(format!("x0 has length {}, expected {n}", x0.len())));
        }
        if !a_c.iter().chain(b_c.iter()).chain(c.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("continuous plant matrices"));
        }
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(Self { a_c, b_c, c, x0 })
    }

    pub fn order(&self) -> usize {
        self.a_c.nrows()
    }

    pub fn discretize(&self, t_sample: f64) -> Result<DiscretePlant> {
        discretize(self, t_sample)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePlant {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub t_sample: f64,
    pub source: Option<ContinuousPlant>,
}

impl DiscretePlant {
    /// Builds a discrete plant and checks that `(a, b)` is controllable.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: RowDVector<f64>, t_sample: f64) -> Result<Self> {
        let plant = Self::new_unchecked(a, b, c, t_sample)?;
        let rank = plant.controllability_rank();
        if rank < plant.order() {
            return Err(Error::NotControllable { rank, n: plant.order() });
        }
        Ok(plant)
    }

    pub fn new_unchecked(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        t_sample: f64,
    ) -> Result<Self> {
        check_dims(&a, &b, &c)?;
        if !(t_sample.is_finite() && t_sample > 0.0) {
            return Err(Error::InvalidParameter(format!("sampling period must be positive, got {t_sample}")));
        }
        if !a.iter().chain(b.iter()).chain(c.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("discrete plant matrices"));
        }
        Ok(Self { a, b, c, t_sample, source: None })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// First Markov parameter `CB`.
    pub fn cb(&self) -> f64 {
        self.c.dot(&self.b.transpose())
    }

    /// Returns `CB` if it passes the relative-degree-one tolerance.
    pub fn checked_cb(&self) -> Result<f64> {
        let cb = self.cb();
        let tol = RELATIVE_DEGREE_TOL * self.c.norm() * self.b.norm();
        if cb.abs() < tol || cb == 0.0 {
            return Err(Error::RelativeDegree { cb, tol });
        }
        Ok(cb)
    }

    pub fn step(&self, x: &DVector<f64>, u_total: f64) -> DVector<f64> {
        &self.a * x + &self.b * u_total
    }

    pub fn output(&self, x: &DVector<f64>) -> f64 {
        (&self.c * x)[0]
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.a)
    }

    /// Impulse response `h[k] = C A^k B` for `k = 0..len`.
    pub fn markov_parameters(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        let mut v = self.b.clone();
        for _ in 0..len {
            out.push(self.output(&v));
            v = &self.a * v;
        }
        out
    }

    /// Numerical rank of `[B, AB, ..., A^{n-1}B]`.
    pub fn controllability_rank(&self) -> usize {
        let n = self.order();
        let mut ctrb = DMatrix::zeros(n, n);
        let mut col = self.b.clone();
        for j in 0..n {
            ctrb.set_column(j, &col);
            col = &self.a * col;
        }
        linalg::numerical_rank(&ctrb, RANK_TOL)
    }

    /// Simulates from `x0` with the given held inputs. With `substeps > 1` the
    /// trace also carries the continuous-time response on a grid of `T/M`.
    pub fn simulate(&self, x0: &DVector<f64>, inputs: &[f64], substeps: usize) -> Result<Trace> {
        simulate(self, x0, inputs, substeps)
    }
}

fn check_dims(a: &DMatrix<f64>, b: &DVector<f64>, c: &RowDVector<f64>) -> Result<()> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::Dimension(format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
    }
    if b.len() != n {
        return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.len())));
    }
    if c.len() != n {
        return Err(Error::Dimension(format!("C has {} columns, expected {n}", c.len())));
    }
    Ok(())
}

/// Zero-order-hold discretization with sampling period `t_sample`.
pub fn discretize(plant: &ContinuousPlant, t_sample: f64) -> Result<DiscretePlant> {
    if !(t_sample.is_finite() && t_sample > 0.0) {
        return Err(Error::InvalidParameter(format!("sampling period must be positive, got {t_sample}")));
    }
    let n = plant.order();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&plant.a_c * t_sample));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&plant.b_c * t_sample));
    let e = linalg::expm(&aug)?;
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = e.column(n).rows(0, n).into_owned();
    Ok(DiscretePlant {
        a,
        b,
        c: plant.c.clone(),
        t_sample,
        source: Some(plant.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersamplePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub sample_times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<f64>,
    pub inputs: Vec<f64>,
    pub intersample: Option<Vec<IntersamplePoint>>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

pub fn simulate(plant: &DiscretePlant, x0: &DVector<f64>, inputs: &[f64], substeps: usize) -> Result<Trace> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be at least 1".into()));
    }
    if x0.len() != plant.order() {
        return Err(Error::Dimension(format!("x0 has length {}, expected {}", x0.len(), plant.order())));
    }
    if !inputs.iter().all(|u| u.is_finite()) {
        return Err(Error::NonFinite("input sequence"));
    }
    let horizon = inputs.len();
    let t = plant.t_sample;

    let mut states = Vec::with_capacity(horizon + 1);
    let mut x = x0.clone();
    states.push(x.clone());
    for &u in inputs {
        x = plant.step(&x, u);
        states.push(x.clone());
    }
    let outputs: Vec<f64> = states.iter().map(|x| plant.output(x)).collect();
    let sample_times: Vec<f64> = (0..=horizon).map(|k| k as f64 * t).collect();

    let intersample = if substeps > 1 {
        let source = plant.source.as_ref().ok_or(Error::MissingSource)?;
        let h = t / substeps as f64;
        let sub = discretize(source, h)?;
        let mut points = Vec::with_capacity(horizon * substeps + 1);
        for (k, &u) in inputs.iter().enumerate() {
            // Sampling instants reuse the coarse state so both grids agree exactly.
            let mut xs = states[k].clone();
            points.push(IntersamplePoint {
                t: sample_times[k],
                x: xs.as_slice().to_vec(),
                y: outputs[k],
            });
            for j in 1..substeps {
                xs = sub.step(&xs, u);
                points.push(IntersamplePoint {
                    t: sample_times[k] + j as f64 * h,
                    x: xs.as_slice().to_vec(),
                    y: sub.output(&xs),
                });
            }
        }
        points.push(IntersamplePoint {
            t: sample_times[horizon],
            x: states[horizon].as_slice().to_vec(),
            y: outputs[horizon],
        });
        Some(points)
    } else {
        None
    };

    Ok(Trace {
        sample_times,
        states,
        outputs,
        inputs: inputs.to_vec(),
        intersample,
    })
}
