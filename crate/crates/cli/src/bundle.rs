//! Result bundle on disk: `series.csv`, `intersample.csv`, `summary.json`
//! and a gnuplot script.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qzda_core::sim::declared_bound;
use qzda_core::{Scenario, ScenarioResult};
use serde::Serialize;

use crate::error::CliError;

pub const SERIES_HEADER: &str = "k,t,y_clean,y_attacked,y_diff,v,v_plus_b,b,dx_norm";
pub const INTERSAMPLE_HEADER: &str = "t,y_continuous_clean,y_continuous_attacked";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOut {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsOut {
    pub static_bound: f64,
    pub dyn_opt_bound: Option<f64>,
    pub serial_bound: Option<f64>,
    pub eps_stealthy_bound: f64,
    pub markov_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisruptionOut {
    pub evaluated: usize,
    pub satisfied: usize,
    pub first_satisfied: Option<usize>,
    pub holds_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub method: &'static str,
    pub t_sample: f64,
    pub d: f64,
    pub substeps: usize,
    pub requested_horizon: usize,
    pub valid_steps: usize,
    pub truncated_at: Option<usize>,
    pub degenerate: bool,
    pub zeros: Vec<ZeroOut>,
    pub minimum_phase: bool,
    pub cb_abs: f64,
    pub bounds: BoundsOut,
    pub declared_bound: f64,
    pub stealth_eps: f64,
    pub stealthy: bool,
    pub first_violation: Option<usize>,
    pub observed_sup_error: f64,
    pub disruption: Option<DisruptionOut>,
    pub divergence_slope: Option<f64>,
}

pub fn zeros_out(zeros: &[qzda_core::Complex64]) -> Vec<ZeroOut> {
    zeros.iter().map(|z| ZeroOut { re: z.re, im: z.im, modulus: z.norm() }).collect()
}

pub fn summarize(s: &Scenario, r: &ScenarioResult) -> Summary {
    let b = &r.bounds;
    Summary {
        method: s.attack.name(),
        t_sample: s.t_sample,
        d: s.d,
        substeps: s.substeps,
        requested_horizon: r.requested_horizon,
        valid_steps: r.horizon(),
        truncated_at: r.truncated_at,
        degenerate: r.degenerate(),
        zeros: zeros_out(&r.zeros.zeros),
        minimum_phase: r.zeros.minimum_phase,
        cb_abs: b.cb.abs(),
        bounds: BoundsOut {
            static_bound: b.static_bound,
            dyn_opt_bound: r.zeros.minimum_phase.then_some(b.dyn_opt_bound),
            serial_bound: b.serial_bound,
            eps_stealthy_bound: b.eps_stealthy_bound,
            markov_terms: b.markov_terms,
        },
        declared_bound: declared_bound(&s.attack, b, s.d, b.cb),
        stealth_eps: r.stealth.eps,
        stealthy: r.stealth.stealthy,
        first_violation: r.stealth.first_violation,
        observed_sup_error: r.observed_sup_error,
        disruption: r.disruption.as_ref().map(|c| DisruptionOut {
            evaluated: c.verdicts.len(),
            satisfied: c.verdicts.iter().filter(|&&v| v).count(),
            first_satisfied: c.first_satisfied,
            holds_from: c.holds_from,
        }),
        divergence_slope: r.divergence_slope,
    }
}

pub fn series_csv(r: &ScenarioResult) -> String {
    let n = r.horizon();
    let b = r.attack_values();
    let t = r.plant.t_sample;
    let mut out = String::with_capacity((n + 2) * 200);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for k in 0..=n {
        let (v, vb, bk) = if k < n {
            (fmt_f64(r.v[k]), fmt_f64(r.trace_attacked.inputs[k]), fmt_f64(b[k]))
        } else {
            (String::new(), String::new(), String::new())
        };
        writeln!(
            out,
            "{k},{},{},{},{},{v},{vb},{bk},{}",
            fmt_f64(k as f64 * t),
            fmt_f64(r.trace_clean.outputs[k]),
            fmt_f64(r.trace_attacked.outputs[k]),
            fmt_f64(r.output_diff[k]),
            fmt_f64(r.state_divergence_series[k]),
        )
        .expect("writing to a String");
    }
    out
}

pub fn intersample_csv(r: &ScenarioResult) -> String {
    let mut out = String::from(INTERSAMPLE_HEADER);
    out.push('\n');
    match (&r.trace_clean.intersample, &r.trace_attacked.intersample) {
        (Some(clean), Some(hit)) => {
            for (c, h) in clean.iter().zip(hit) {
                writeln!(out, "{},{},{}", fmt_f64(c.t), fmt_f64(c.y), fmt_f64(h.y)).expect("writing to a String");
            }
        }
        _ => {
            let tc = &r.trace_clean;
            for k in 0..tc.outputs.len() {
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_f64(tc.sample_times[k]),
                    fmt_f64(tc.outputs[k]),
                    fmt_f64(r.trace_attacked.outputs[k])
                )
                .expect("writing to a String");
            }
        }
    }
    out
}

const PLOT_SCRIPT: &str = "\
set datafile separator ','
set key autotitle columnhead
set multiplot layout 3,1
set ylabel 'y'
plot 'series.csv' using 2:3 with steps, '' using 2:4 with steps, \\
     'intersample.csv' using 1:2 with lines, '' using 1:3 with lines
set ylabel 'y difference'
plot 'series.csv' using 2:5 with steps
set ylabel 'state gap'
set logscale y
plot 'series.csv' using 2:9 with points
unset multiplot
";

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_bundle(dir: &Path, s: &Scenario, r: &ScenarioResult) -> Result<Summary, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let summary = summarize(s, r);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&dir.join("series.csv"), &series_csv(r))?;
    write(&dir.join("intersample.csv"), &intersample_csv(r))?;
    write(&dir.join("summary.json"), &(json + "\n"))?;
    write(&dir.join("plot.gp"), PLOT_SCRIPT)?;
    Ok(summary)
}
