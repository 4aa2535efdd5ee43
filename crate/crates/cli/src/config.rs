//! Strict TOML scenario files.
//!
//! ```toml
//! [plant]
//! a_c = [[0.0, 1.0], [-2.0, -3.0]]
//! b_c = [0.0, 1.0]
//! c = [1.0, 0.0]
//! t_sample = 0.5
//!
//! [quantizer]
//! d = 1.0
//!
//! [[input.sinusoid]]
//! kind = "sin"
//! amplitude = 1.0
//! omega_pi = 0.05
//!
//! [attack]
//! method = "dynamic"
//! scale = 1e-6
//!
//! [run]
//! horizon = 600
//! ```

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, RowDVector};
use qzda_core::attack::{DEFAULT_DELTA, DEFAULT_SCALE};
use qzda_core::sim::{HSchedule, InputSpec, Sinusoid, WaveKind};
use qzda_core::{AttackConfig, ContinuousPlant, Scenario};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    plant: RawPlant,
    quantizer: RawQuantizer,
    #[serde(default)]
    input: RawInput,
    #[serde(default)]
    attack: RawAttack,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    a_c: Spanned<Vec<Spanned<Vec<f64>>>>,
    b_c: Spanned<Vec<f64>>,
    c: Spanned<Vec<f64>>,
    x0: Option<Spanned<Vec<f64>>>,
    t_sample: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantizer {
    d: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    #[serde(default)]
    sinusoid: Vec<RawSinusoid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSinusoid {
    kind: WaveKind,
    amplitude: f64,
    /// Radians per sample.
    omega: Option<f64>,
    /// Multiples of pi radians per sample.
    omega_pi: Option<f64>,
    #[serde(default)]
    phase: f64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    #[default]
    None,
    ZdaReal,
    Static,
    Dynamic,
    EpsStealthy,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    #[serde(default)]
    method: Method,
    scale: Option<f64>,
    eps: Option<f64>,
    delta: Option<f64>,
    stealth_eps: Option<f64>,
    h0: Option<f64>,
    r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    horizon: Option<usize>,
    substeps: Option<usize>,
    output_dir: Option<PathBuf>,
    overflow_guard: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub output_dir: Option<PathBuf>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn vector(src: &str, name: &str, v: &Spanned<Vec<f64>>, n: usize) -> Result<Vec<f64>, CliError> {
    if v.get_ref().len() != n {
        return Err(config_err(format!(
            "line {}: plant.{name} has {} entries, expected {n}",
            line_of(src, v.span().start),
            v.get_ref().len()
        )));
    }
    Ok(v.get_ref().clone())
}

fn build_plant(src: &str, raw: &RawPlant) -> Result<ContinuousPlant, CliError> {
    let rows = raw.a_c.get_ref();
    let n = rows.len();
    if n == 0 {
        return Err(config_err(format!("line {}: plant.a_c is empty", line_of(src, raw.a_c.span().start))));
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.get_ref().len() != n {
            return Err(config_err(format!(
                "line {}: plant.a_c row {} has {} entries, expected {n}",
                line_of(src, row.span().start),
                i + 1,
                row.get_ref().len()
            )));
        }
        entries.extend_from_slice(row.get_ref());
    }
    let a_c = DMatrix::from_row_slice(n, n, &entries);
    let b_c = DVector::from_vec(vector(src, "b_c", &raw.b_c, n)?);
    let c = RowDVector::from_vec(vector(src, "c", &raw.c, n)?);
    let x0 = match &raw.x0 {
        Some(x0) => DVector::from_vec(vector(src, "x0", x0, n)?),
        None => DVector::zeros(n),
    };
    Ok(ContinuousPlant::new(a_c, b_c, c, x0)?)
}

fn build_input(raw: &RawInput) -> Result<InputSpec, CliError> {
    let terms = raw
        .sinusoid
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let omega = match (s.omega, s.omega_pi) {
                (Some(w), None) => w,
                (None, Some(w)) => w * PI,
                _ => {
                    return Err(config_err(format!(
                        "input.sinusoid {}: give exactly one of omega and omega_pi",
                        i + 1
                    )))
                }
            };
            Ok(Sinusoid { kind: s.kind, amplitude: s.amplitude, omega, phase: s.phase })
        })
        .collect::<Result<_, _>>()?;
    Ok(InputSpec { terms })
}

fn build_attack(raw: &RawAttack) -> Result<AttackConfig, CliError> {
    let reject = |name: &str, present: bool| {
        if present {
            Err(config_err(format!("attack.{name} does not apply to method {:?}", raw.method)))
        } else {
            Ok(())
        }
    };
    match raw.method {
        Method::None | Method::ZdaReal | Method::Static | Method::Dynamic => {
            reject("eps", raw.eps.is_some())?;
            reject("delta", raw.delta.is_some())?;
        }
        Method::EpsStealthy => reject("scale", raw.scale.is_some())?,
    }
    if raw.method == Method::None {
        reject("scale", raw.scale.is_some())?;
    }
    let scale = raw.scale.unwrap_or(DEFAULT_SCALE);
    Ok(match raw.method {
        Method::None => AttackConfig::None,
        Method::ZdaReal => AttackConfig::ZdaReal { scale },
        Method::Static => AttackConfig::Static { scale },
        Method::Dynamic => AttackConfig::Dynamic { scale },
        Method::EpsStealthy => AttackConfig::EpsStealthy { eps: raw.eps, delta: raw.delta.unwrap_or(DEFAULT_DELTA) },
    })
}

pub fn parse(src: &str) -> Result<Config, CliError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| config_err(e.to_string()))?;
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(config_err(format!("{name} must be positive, got {v}")))
        }
    };
    positive("plant.t_sample", raw.plant.t_sample)?;
    positive("quantizer.d", raw.quantizer.d)?;
    if raw.run.horizon == Some(0) || raw.run.substeps == Some(0) {
        return Err(config_err("run.horizon and run.substeps must be at least 1"));
    }
    let plant = build_plant(src, &raw.plant)?;
    let mut scenario = Scenario::new(
        plant,
        raw.plant.t_sample,
        raw.quantizer.d,
        build_input(&raw.input)?,
        build_attack(&raw.attack)?,
    );
    if let Some(h) = raw.run.horizon {
        scenario.horizon = h;
    }
    if let Some(m) = raw.run.substeps {
        scenario.substeps = m;
    }
    if let Some(g) = raw.run.overflow_guard {
        scenario.overflow_guard = g;
    }
    scenario.stealth_eps = raw.attack.stealth_eps;
    scenario.h_schedule = match (raw.attack.h0, raw.attack.r) {
        (Some(h0), Some(r)) => Some(HSchedule::Geometric { h0, r }),
        (None, None) => None,
        _ => return Err(config_err("attack.h0 and attack.r must be given together")),
    };
    Ok(Config { scenario, output_dir: raw.run.output_dir })
}

pub fn load(path: &std::path::Path) -> Result<Config, CliError> {
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse(&src)
}
