use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qzda_core::attack::DEFAULT_DELTA;
use qzda_core::zeros::{compute_bounds, serial_decompose_single_zero, transmission_zeros};
use qzda_core::{run_scenario, AttackConfig, Scenario};
use serde::Serialize;

use crate::bundle::{self, zeros_out, Summary, ZeroOut};
use crate::config::{self, Config};
use crate::error::CliError;

pub const DEFAULT_OUT: &str = "qzda-out";

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub zeros: Vec<ZeroOut>,
    pub unstable_zeros: Vec<ZeroOut>,
    pub minimum_phase: bool,
    pub relative_degree_one: bool,
    pub cb_abs: f64,
    pub d: f64,
    pub delta: f64,
    pub static_bound: f64,
    pub dyn_opt_bound: Option<f64>,
    pub dyn_opt_unavailable: Option<String>,
    pub serial_bound: Option<f64>,
    pub serial_unavailable: Option<String>,
    pub eps_stealthy_bound: f64,
}

pub fn analyze(cfg: &Config) -> Result<Analysis, CliError> {
    let s = &cfg.scenario;
    let plant = s.plant.discretize(s.t_sample)?;
    let report = transmission_zeros(&plant)?;
    let delta = match s.attack {
        AttackConfig::EpsStealthy { delta, .. } => delta,
        _ => DEFAULT_DELTA,
    };
    let dec = serial_decompose_single_zero(&plant);
    let bounds = compute_bounds(&plant, dec.as_ref().ok(), s.d, delta, None)?;
    let dyn_opt_unavailable = (!report.minimum_phase).then(|| "plant is nonminimum phase".to_string());
    Ok(Analysis {
        zeros: zeros_out(&report.zeros),
        unstable_zeros: zeros_out(&report.unstable),
        minimum_phase: report.minimum_phase,
        relative_degree_one: report.relative_degree_one,
        cb_abs: bounds.cb.abs(),
        d: s.d,
        delta,
        static_bound: bounds.static_bound,
        dyn_opt_bound: report.minimum_phase.then_some(bounds.dyn_opt_bound),
        dyn_opt_unavailable,
        serial_bound: bounds.serial_bound,
        serial_unavailable: dec.err().map(|e| e.to_string()),
        eps_stealthy_bound: bounds.eps_stealthy_bound,
    })
}

fn bound_line(out: &mut String, label: &str, value: Option<f64>, reason: &Option<String>) {
    match (value, reason) {
        (Some(v), _) => writeln!(out, "  {label:<28} {v:.6}"),
        (None, Some(why)) => writeln!(out, "  {label:<28} unavailable: {why}"),
        (None, None) => writeln!(out, "  {label:<28} unavailable"),
    }
    .expect("writing to a String");
}

pub fn render_analysis(a: &Analysis) -> String {
    let mut out = String::from("transmission zeros:\n");
    for z in &a.zeros {
        let tag = if z.modulus > 1.0 { "unstable" } else { "stable" };
        writeln!(out, "  {:+.6} {:+.6}i  |z| = {:.6}  {tag}", z.re, z.im, z.modulus).expect("writing to a String");
    }
    let class = if a.minimum_phase {
        "minimum phase".to_string()
    } else {
        format!("nonminimum phase ({} unstable zero{})", a.unstable_zeros.len(), if a.unstable_zeros.len() == 1 { "" } else { "s" })
    };
    writeln!(out, "classification: {class}, relative degree one").expect("writing to a String");
    writeln!(out, "|CB| = {:.6e}", a.cb_abs).expect("writing to a String");
    writeln!(out, "output-error bounds (d = {}):", a.d).expect("writing to a String");
    bound_line(&mut out, "static quantization", Some(a.static_bound), &None);
    bound_line(&mut out, "optimal dynamic quantizer", a.dyn_opt_bound, &a.dyn_opt_unavailable);
    bound_line(&mut out, "serial dynamic quantizer", a.serial_bound, &a.serial_unavailable);
    bound_line(&mut out, &format!("eps-stealthy (delta = {:e})", a.delta), Some(a.eps_stealthy_bound), &None);
    out
}

pub fn run(cfg: &Config, out: Option<&Path>, substeps: Option<usize>) -> Result<(PathBuf, Summary), CliError> {
    let mut scenario = cfg.scenario.clone();
    if let Some(m) = substeps {
        if m == 0 {
            return Err(CliError::Config("--substeps must be at least 1".into()));
        }
        scenario.substeps = m;
    }
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let result = run_scenario(&scenario)?;
    let summary = bundle::write_bundle(&dir, &scenario, &result)?;
    Ok((dir, summary))
}

pub const REPRO_CONFIGS: [(&str, &str); 3] = [
    ("static", include_str!("../configs/benchmark_static.toml")),
    ("dynamic", include_str!("../configs/benchmark_dynamic.toml")),
    ("eps_stealthy", include_str!("../configs/benchmark_eps.toml")),
];

pub fn repro(out: &Path) -> Result<Vec<Summary>, CliError> {
    let scenarios: Vec<(&str, Scenario)> = REPRO_CONFIGS
        .iter()
        .map(|(name, src)| Ok((*name, config::parse(src)?.scenario)))
        .collect::<Result<_, CliError>>()?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|(name, s)| {
                let dir = out.join(name);
                scope.spawn(move || -> Result<Summary, CliError> {
                    let r = run_scenario(s)?;
                    bundle::write_bundle(&dir, s, &r)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    })
}

pub fn render_table(rows: &[Summary]) -> String {
    let mut out = format!("{:<14} {:>12} {:>14} {:>8} {:>7}\n", "method", "bound", "observed sup", "slope", "steps");
    for s in rows {
        let slope = s.divergence_slope.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{:<14} {:>12.6} {:>14.6} {:>8} {:>7}",
            s.method, s.declared_bound, s.observed_sup_error, slope, s.valid_steps
        )
        .expect("writing to a String");
    }
    out
}
