//! Paired attacked / attack-free simulations and the stealth and disruption
//! checks evaluated on them.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::attack::{self, AttackMethod, AttackSignal, DEFAULT_DELTA, DEFAULT_SCALE, OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::lti::{ContinuousPlant, DiscretePlant, Trace};
use crate::quantizer::UniformQuantizer;
use crate::zeros::{self, BoundSet, SerialDecomposition, ZeroReport};

pub const DEFAULT_HORIZON: usize = 600;
/// Norm window used when fitting the divergence slope.
pub const SLOPE_WINDOW: (f64, f64) = (10.0, 1e6);
/// Stealth tolerance of the unquantized ZDA, relative to `||C|| max ||dx||`:
/// its output error is zero in exact arithmetic and pure roundoff otherwise.
pub const ZDA_ROUNDOFF_REL: f64 = 1e-14;
pub const MIN_SLOPE_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Sin,
    Cos,
}

/// `amplitude * sin(omega k + phase)` or the cosine equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub kind: WaveKind,
    pub amplitude: f64,
    /// Angular frequency in radians per sample.
    pub omega: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InputSpec {
    pub terms: Vec<Sinusoid>,
}

impl InputSpec {
    pub fn value(&self, k: usize) -> f64 {
        let k = k as f64;
        self.terms
            .iter()
            .map(|s| {
                let arg = s.omega * k + s.phase;
                s.amplitude
                    * match s.kind {
                        WaveKind::Sin => arg.sin(),
                        WaveKind::Cos => arg.cos(),
                    }
            })
            .sum()
    }

    pub fn samples(&self, horizon: usize) -> Vec<f64> {
        (0..horizon).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AttackConfig {
    None,
    ZdaReal { scale: f64 },
    Static { scale: f64 },
    Dynamic { scale: f64 },
    /// `eps = None` selects the smallest live value `|CB| d`.
    EpsStealthy { eps: Option<f64>, delta: f64 },
}

impl AttackConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AttackConfig::None => "none",
            AttackConfig::ZdaReal { .. } => AttackMethod::ZdaReal.name(),
            AttackConfig::Static { .. } => AttackMethod::StaticQ.name(),
            AttackConfig::Dynamic { .. } => AttackMethod::DynamicQ.name(),
            AttackConfig::EpsStealthy { .. } => AttackMethod::EpsStealthy.name(),
        }
    }

    pub fn static_default() -> Self {
        AttackConfig::Static { scale: DEFAULT_SCALE }
    }

    pub fn dynamic_default() -> Self {
        AttackConfig::Dynamic { scale: DEFAULT_SCALE }
    }

    pub fn eps_stealthy_default() -> Self {
        AttackConfig::EpsStealthy { eps: None, delta: DEFAULT_DELTA }
    }
}

/// Disruption thresholds `H_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HSchedule {
    Geometric { h0: f64, r: f64 },
    Explicit(Vec<f64>),
}

impl HSchedule {
    pub fn value(&self, k: usize) -> Option<f64> {
        match self {
            HSchedule::Geometric { h0, r } => Some(h0 * r.powi(k as i32)),
            HSchedule::Explicit(v) => v.get(k).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: ContinuousPlant,
    pub t_sample: f64,
    pub d: f64,
    pub input: InputSpec,
    pub attack: AttackConfig,
    pub horizon: usize,
    pub substeps: usize,
    pub h_schedule: Option<HSchedule>,
    /// Stealth threshold; defaults to the attack's theoretical bound.
    pub stealth_eps: Option<f64>,
    pub overflow_guard: f64,
}

impl Scenario {
    pub fn new(plant: ContinuousPlant, t_sample: f64, d: f64, input: InputSpec, attack: AttackConfig) -> Self {
        Self {
            plant,
            t_sample,
            d,
            input,
            attack,
            horizon: DEFAULT_HORIZON,
            substeps: 1,
            h_schedule: None,
            stealth_eps: None,
            overflow_guard: OVERFLOW_GUARD,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be at least 1".into()));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParameter(format!("quantization width must be positive, got {}", self.d)));
        }
        if !self
            .input
            .terms
            .iter()
            .all(|s| s.omega.is_finite() && s.amplitude.is_finite() && s.phase.is_finite())
        {
            return Err(Error::NonFinite("input sinusoid parameters"));
        }
        if !(self.overflow_guard > 0.0) {
            return Err(Error::InvalidParameter("overflow guard must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StealthCheck {
    pub eps: f64,
    pub stealthy: bool,
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisruptiveCheck {
    pub verdicts: Vec<bool>,
    pub first_satisfied: Option<usize>,
    /// Earliest `k` from which every later verdict holds.
    pub holds_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub plant: DiscretePlant,
    pub zeros: ZeroReport,
    pub decomposition: Option<SerialDecomposition>,
    pub bounds: BoundSet,
    /// Control path `v[k] = q(u[k])`.
    pub v: Vec<f64>,
    pub attack: Option<AttackSignal>,
    pub trace_clean: Trace,
    pub trace_attacked: Trace,
    /// `y_{v+b}[k] - y_v[k]`
    pub output_diff: Vec<f64>,
    pub output_error_series: Vec<f64>,
    pub state_divergence_series: Vec<f64>,
    pub observed_sup_error: f64,
    pub stealth: StealthCheck,
    pub disruption: Option<DisruptiveCheck>,
    pub divergence_slope: Option<f64>,
    pub requested_horizon: usize,
    pub truncated_at: Option<usize>,
}

impl ScenarioResult {
    pub fn horizon(&self) -> usize {
        self.v.len()
    }

    pub fn degenerate(&self) -> bool {
        self.attack.as_ref().is_some_and(|a| a.degenerate)
    }

    pub fn attack_values(&self) -> Vec<f64> {
        match &self.attack {
            Some(sig) => sig.values.clone(),
            None => vec![0.0; self.horizon()],
        }
    }
}

/// Theoretical output-error bound for the configured attack.
pub fn declared_bound(attack: &AttackConfig, bounds: &BoundSet, d: f64, cb: f64) -> f64 {
    match attack {
        AttackConfig::None | AttackConfig::ZdaReal { .. } => 0.0,
        AttackConfig::Static { .. } => bounds.static_bound,
        AttackConfig::Dynamic { .. } => bounds.serial_bound.unwrap_or(f64::INFINITY),
        AttackConfig::EpsStealthy { eps, delta } => {
            eps.unwrap_or(cb.abs() * d) + cb.abs() * delta
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    s.validate()?;
    let plant = s.plant.discretize(s.t_sample)?;
    let q = UniformQuantizer::new(s.d)?;
    let cb = plant.checked_cb()?;
    let zero_report = zeros::transmission_zeros(&plant)?;
    let decomposition = if zero_report.unstable.len() == 1 {
        zeros::serial_decompose_single_zero(&plant).ok()
    } else {
        None
    };
    let delta = match s.attack {
        AttackConfig::EpsStealthy { delta, .. } => delta,
        _ => DEFAULT_DELTA,
    };
    let bounds = zeros::compute_bounds(&plant, decomposition.as_ref(), s.d, delta, None)?;

    let guard = s.overflow_guard;
    let attack = match s.attack {
        AttackConfig::None => None,
        AttackConfig::ZdaReal { scale } => {
            Some(attack::zda_real(&attack::zda_init(&plant, scale)?, s.horizon, guard)?)
        }
        AttackConfig::Static { scale } => {
            Some(attack::method1_static(&attack::zda_init(&plant, scale)?, s.d, s.horizon, guard)?)
        }
        AttackConfig::Dynamic { scale } => {
            let dec = match &decomposition {
                Some(dec) => dec,
                None => {
                    // Surface the precise reason.
                    zeros::serial_decompose_single_zero(&plant)?;
                    unreachable!("decomposition failed without an error")
                }
            };
            Some(attack::method2_dynamic(dec, &attack::zda_init(&plant, scale)?, s.d, s.horizon, guard)?)
        }
        AttackConfig::EpsStealthy { eps, delta } => {
            let eps = eps.unwrap_or(cb.abs() * s.d);
            Some(attack::method3_eps_stealthy(&plant, eps, delta, s.d, s.horizon, guard)?)
        }
    };
    let horizon = attack.as_ref().map_or(s.horizon, |a| a.len());
    let truncated_at = attack.as_ref().and_then(|a| a.truncated_at);

    let v: Vec<f64> = s.input.samples(horizon).iter().map(|&u| q.quantize(u)).collect();
    let attacked_input: Vec<f64> = match &attack {
        Some(sig) => v.iter().zip(&sig.values).map(|(v, b)| v + b).collect(),
        None => v.clone(),
    };
    let x0 = &s.plant.x0;
    let trace_clean = plant.simulate(x0, &v, s.substeps)?;
    let trace_attacked = plant.simulate(x0, &attacked_input, s.substeps)?;

    let output_diff: Vec<f64> = trace_attacked
        .outputs
        .iter()
        .zip(&trace_clean.outputs)
        .map(|(a, c)| a - c)
        .collect();
    let output_error_series: Vec<f64> = output_diff.iter().map(|e| e.abs()).collect();
    let state_divergence_series: Vec<f64> = trace_attacked
        .states
        .iter()
        .zip(&trace_clean.states)
        .map(|(a, c)| (a - c).norm())
        .collect();
    let observed_sup_error = output_error_series.iter().copied().fold(0.0, f64::max);

    let eps = s.stealth_eps.unwrap_or_else(|| match s.attack {
        AttackConfig::ZdaReal { .. } => {
            // Both traces start from x0, so the output carries the decaying
            // transient -C A^k z[0] on top of roundoff.
            let z0 = &attack.as_ref().expect("zda attack").aux.z[0];
            let peak = state_divergence_series.iter().copied().fold(0.0, f64::max);
            zda_transient_peak(&plant, z0, horizon) + ZDA_ROUNDOFF_REL * plant.c.norm() * peak
        }
        _ => declared_bound(&s.attack, &bounds, s.d, cb),
    });
    let stealth = check_stealthy(&output_error_series, eps);
    let disruption = s
        .h_schedule
        .as_ref()
        .map(|h| check_disruptive(&state_divergence_series, h));
    let divergence_slope = fit_divergence_slope(&state_divergence_series).ok();

    Ok(ScenarioResult {
        plant,
        zeros: zero_report,
        decomposition,
        bounds,
        v,
        attack,
        trace_clean,
        trace_attacked,
        output_diff,
        output_error_series,
        state_divergence_series,
        observed_sup_error,
        stealth,
        disruption,
        divergence_slope,
        requested_horizon: s.horizon,
        truncated_at,
    })
}

/// `max_{k <= horizon} |C A^k z0|`.
pub fn zda_transient_peak(plant: &DiscretePlant, z0: &DVector<f64>, horizon: usize) -> f64 {
    let mut x = z0.clone();
    let mut peak = 0.0f64;
    for _ in 0..=horizon {
        peak = peak.max(plant.output(&x).abs());
        x = &plant.a * x;
    }
    peak
}

pub fn check_stealthy(output_errors: &[f64], eps: f64) -> StealthCheck {
    let first_violation = output_errors.iter().position(|&e| !(e <= eps));
    StealthCheck { eps, stealthy: first_violation.is_none(), first_violation }
}

/// Evaluates `||x_{v+b}(kT) - x_v(kT)|| >= H_k` at the sampling instants.
pub fn check_disruptive(divergence: &[f64], schedule: &HSchedule) -> DisruptiveCheck {
    let verdicts: Vec<bool> = divergence
        .iter()
        .enumerate()
        .map_while(|(k, &dx)| schedule.value(k).map(|h| dx >= h))
        .collect();
    let first_satisfied = verdicts.iter().position(|&v| v);
    let holds_from = match verdicts.iter().rposition(|&v| !v) {
        None if !verdicts.is_empty() => Some(0),
        None => None,
        Some(last_fail) if last_fail + 1 < verdicts.len() => Some(last_fail + 1),
        Some(_) => None,
    };
    DisruptiveCheck { verdicts, first_satisfied, holds_from }
}

/// Least-squares slope of `ln ||dx[k]||` against `k` over the samples whose
/// norm lies in [`SLOPE_WINDOW`].
pub fn fit_divergence_slope(series: &[f64]) -> Result<f64> {
    fit_log_slope(series, SLOPE_WINDOW.0, SLOPE_WINDOW.1, MIN_SLOPE_SAMPLES)
}

pub fn fit_log_slope(series: &[f64], lo: f64, hi: f64, min_samples: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= lo && v <= hi)
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    let need = min_samples.max(2);
    if pts.len() < need {
        return Err(Error::EmptyWindow { lo, hi, found: pts.len(), need });
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    Ok(sxy / sxx)
}

/// The four-state benchmark plant used throughout the tests and the CLI
/// reproduction command: one stable continuous zero at -1, and after
/// sampling at `T = 0.5` a single unstable discrete zero near -3.21.
pub mod benchmark {
    use super::*;
    use nalgebra::{DMatrix, RowDVector};

    pub const T_SAMPLE: f64 = 0.5;
    pub const D: f64 = 1.0;

    pub fn plant() -> ContinuousPlant {
        #[rustfmt::skip]
        let a_c = DMatrix::from_row_slice(4, 4, &[
             0.0,  0.0,  1.0,  0.0,
             0.0,  0.0,  0.0,  1.0,
            -2.0,  1.0, -1.0,  1.0,
             1.0, -1.0,  1.0, -1.0,
        ]);
        ContinuousPlant::new(
            a_c,
            DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]),
            RowDVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            DVector::zeros(4),
        )
        .expect("benchmark plant is Hurwitz")
    }

    /// `u[k] = sin(0.05 pi k) + 0.5 cos(0.025 pi k)`
    pub fn input() -> InputSpec {
        InputSpec {
            terms: vec![
                Sinusoid { kind: WaveKind::Sin, amplitude: 1.0, omega: 0.05 * PI, phase: 0.0 },
                Sinusoid { kind: WaveKind::Cos, amplitude: 0.5, omega: 0.025 * PI, phase: 0.0 },
            ],
        }
    }

    pub fn scenario(attack: AttackConfig) -> Scenario {
        Scenario::new(plant(), T_SAMPLE, D, input(), attack)
    }
}
