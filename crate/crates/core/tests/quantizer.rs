mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use qzda_core::quantizer::{make_optimal_quantizer, make_serial_quantizer};
use qzda_core::zeros::{compute_bounds, serial_decompose_single_zero, Realization};
use qzda_core::{benchmark, UniformQuantizer};
use rand::Rng;

proptest! {
    #[test]
    fn error_within_half_step(mu in -1e6f64..1e6, d in 1e-3f64..1e3) {
        let q = UniformQuantizer::new(d).unwrap();
        prop_assert!((q.quantize(mu) - mu).abs() <= d / 2.0 * (1.0 + 1e-12));
    }

    #[test]
    fn shift_equivariance(mu in -1e4f64..1e4, n in -1000i64..1000, e in -3i32..3) {
        // power-of-two widths keep n*d and mu + n*d exact
        let d = 2f64.powi(e);
        let q = UniformQuantizer::new(d).unwrap();
        let mu = (mu * 1024.0).round() / 1024.0;
        prop_assert_eq!(q.level(mu + n as f64 * d), q.level(mu) + n);
    }

    #[test]
    fn idempotent_on_lattice(n in -1_000_000i64..1_000_000, d in 1e-3f64..1e3) {
        let q = UniformQuantizer::new(d).unwrap();
        let w = q.value(n);
        prop_assert_eq!(q.quantize(w), w);
        prop_assert_eq!(q.quantize(q.quantize(w + 0.3 * d)), q.quantize(w + 0.3 * d));
    }

    #[test]
    fn ties_go_down(n in -1_000_000i64..1_000_000, e in -4i32..4) {
        let d = 2f64.powi(e);
        let q = UniformQuantizer::new(d).unwrap();
        prop_assert_eq!(q.level((n as f64 + 0.5) * d), n);
    }
}

fn output_gap(plant: &qzda_core::DiscretePlant, u: &[f64], v: &[f64]) -> f64 {
    let yu = common::outputs_of(plant, u);
    let yv = common::outputs_of(plant, v);
    yu.iter().zip(&yv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn optimal_quantizer_meets_its_bound() {
    let mut rng = common::rng(31);
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let p = common::random_minimum_phase_plant(&mut rng, n);
        let d = rng.random_range(0.01..5.0);
        let u: Vec<f64> = (0..1000).map(|_| rng.random_range(-1e3..1e3)).collect();
        let (v, _) = make_optimal_quantizer(&p, d).unwrap().run(&u);
        let v: Vec<f64> = v.iter().map(|s| s.value).collect();
        let bound = 0.5 * p.cb().abs() * d;
        let gap = output_gap(&p, &u, &v);
        assert!(gap <= bound * (1.0 + 1e-9) + 1e-9, "gap {gap} > bound {bound}");
    }
}

#[test]
fn serial_quantizer_meets_its_bound() {
    let mut rng = common::rng(32);
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let placed = common::random_single_unstable_zero_plant(&mut rng, n);
        let p = placed.plant;
        let dec = serial_decompose_single_zero(&p).unwrap();
        let d = rng.random_range(0.01..2.0);
        let bound = compute_bounds(&p, Some(&dec), d, 1e-6, None).unwrap().serial_bound.unwrap();
        let u: Vec<f64> = (0..1000).map(|_| rng.random_range(-1e2..1e2)).collect();
        let (v, _) = make_serial_quantizer(&dec, d).unwrap().run(&u);
        let v: Vec<f64> = v.iter().map(|s| s.value).collect();
        let gap = output_gap(&p, &u, &v);
        assert!(gap <= bound * (1.0 + 1e-9) + 1e-9, "gap {gap} > bound {bound}");
    }
}

#[test]
fn static_bound_is_tight() {
    let mut rng = common::rng(33);
    for _ in 0..10 {
        let n = rng.random_range(1..=5);
        let p = common::random_stable_plant(&mut rng, n);
        let d = 1.0;
        let bound = compute_bounds(&p, None, d, 1e-6, None).unwrap().static_bound;
        let q = UniformQuantizer::new(d).unwrap();
        let horizon = 400;
        let h = Realization::from(&p).impulse_response(horizon + 1);
        // error of q at u = d/2 is -d/2, at u = -d/2 + eta it is about +d/2
        let u: Vec<f64> = (0..horizon)
            .map(|j| if h[horizon - j] > 0.0 { d / 2.0 } else { -d / 2.0 + 1e-9 })
            .collect();
        let v: Vec<f64> = u.iter().map(|&x| q.quantize(x)).collect();
        let gap = output_gap(&p, &u, &v);
        assert!(gap <= bound * (1.0 + 1e-9));
        assert!(gap >= 0.9 * bound, "gap {gap} vs bound {bound}");

        let random: Vec<f64> = (0..horizon).map(|_| rng.random_range(-50.0..50.0)).collect();
        let vr: Vec<f64> = random.iter().map(|&x| q.quantize(x)).collect();
        assert!(output_gap(&p, &random, &vr) <= bound * (1.0 + 1e-9));
    }
}

#[test]
fn vanishing_width_drives_error_to_zero() {
    let mut rng = common::rng(34);
    let p = common::random_minimum_phase_plant(&mut rng, 4);
    let u: Vec<f64> = (0..500).map(|k| (0.1 * k as f64).sin()).collect();
    let mut last = f64::INFINITY;
    for d in [1.0, 1e-2, 1e-4, 1e-6] {
        let (v, _) = make_optimal_quantizer(&p, d).unwrap().run(&u);
        let v: Vec<f64> = v.iter().map(|s| s.value).collect();
        let gap = output_gap(&p, &u, &v);
        assert!(gap <= 0.5 * p.cb().abs() * d * (1.0 + 1e-6) + 1e-12);
        assert!(gap <= last);
        last = gap;
    }
    assert!(last < 1e-6);
}

#[test]
fn internal_state_stays_bounded() {
    let mut rng = common::rng(35);
    let p = common::random_minimum_phase_plant(&mut rng, 3);
    let u: Vec<f64> = (0..100_000).map(|_| rng.random_range(-10.0..10.0)).collect();
    let (_, xi) = make_optimal_quantizer(&p, 0.5).unwrap().run(&u);
    let peak = |s: &[DVector<f64>]| s.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let first = peak(&xi[..50_000]);
    let second = peak(&xi[50_000..]);
    assert!(first.is_finite() && second.is_finite());
    assert!(second <= 2.0 * first + 1.0, "{first} then {second}");
}

#[test]
fn benchmark_serial_quantizer_on_reference_input() {
    let p = benchmark::plant().discretize(benchmark::T_SAMPLE).unwrap();
    let dec = serial_decompose_single_zero(&p).unwrap();
    let u = benchmark::input().samples(600);
    let (v, _) = make_serial_quantizer(&dec, 1.0).unwrap().run(&u);
    let v: Vec<f64> = v.iter().map(|s| s.value).collect();
    assert!(output_gap(&p, &u, &v) <= 0.038);
}
