#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use qzda_core::zeros::Realization;
use qzda_core::{ContinuousPlant, DiscretePlant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; good enough for test matrices.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| gauss(rng))
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
}

/// Dense discrete plant with spectral radius in `[0.3, 0.95]` and a
/// comfortably non-zero first Markov parameter.
pub fn random_stable_plant(rng: &mut ChaCha8Rng, n: usize) -> DiscretePlant {
    loop {
        let a = random_matrix(rng, n, n);
        let rho = spectral_radius(&a);
        if rho < 1e-3 {
            continue;
        }
        let target = rng.random_range(0.3..0.95);
        let a = a * (target / rho);
        let b = DVector::from_fn(n, |_, _| gauss(rng));
        let c = RowDVector::from_fn(n, |_, _| gauss(rng));
        let cb = c.dot(&b.transpose());
        if cb.abs() < 0.2 * b.norm() * c.norm() {
            continue;
        }
        if let Ok(p) = DiscretePlant::new(a, b, c, 1.0) {
            return p;
        }
    }
}

/// Random continuous Hurwitz plant.
pub fn random_continuous_plant(rng: &mut ChaCha8Rng, n: usize) -> ContinuousPlant {
    loop {
        let m = random_matrix(rng, n, n);
        let shift = m.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let a = m - DMatrix::identity(n, n) * (shift + rng.random_range(0.1..2.0));
        let b = DVector::from_fn(n, |_, _| gauss(rng));
        let c = RowDVector::from_fn(n, |_, _| gauss(rng));
        if let Ok(p) = ContinuousPlant::new(a, b, c, DVector::zeros(n)) {
            return p;
        }
    }
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        p = next;
    }
    p.iter().map(|c| c.re).collect()
}

/// Real-coefficient root set of `count` stable roots with modulus in
/// `[lo, hi]`, mixing real roots and conjugate pairs.
fn stable_roots(rng: &mut ChaCha8Rng, count: usize, lo: f64, hi: f64) -> Vec<Complex64> {
    let mut roots = Vec::new();
    while roots.len() < count {
        let r = rng.random_range(lo..hi);
        if count - roots.len() >= 2 && rng.random_bool(0.4) {
            let th = rng.random_range(0.3..2.8);
            roots.push(Complex64::from_polar(r, th));
            roots.push(Complex64::from_polar(r, -th));
        } else {
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            roots.push(Complex64::new(s * r, 0.0));
        }
    }
    roots
}

pub struct PlacedPlant {
    pub plant: DiscretePlant,
    pub lambda: f64,
    pub poles: Vec<Complex64>,
}

/// Plant of order `n >= 2` built by pole/zero placement with exactly one
/// real unstable zero, then hidden behind a random similarity transform.
pub fn random_single_unstable_zero_plant(rng: &mut ChaCha8Rng, n: usize) -> PlacedPlant {
    let poles = stable_roots(rng, n, 0.05, 0.9);
    let mag = rng.random_range(1.3..4.0);
    let lambda = if rng.random_bool(0.5) { mag } else { -mag };
    let mut zeros = stable_roots(rng, n - 2, 0.05, 0.85);
    zeros.push(Complex64::new(lambda, 0.0));
    let gain = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let num: Vec<f64> = poly_from_roots(&zeros).iter().map(|c| c * gain).collect();
    let den = poly_from_roots(&poles);
    let r = Realization::controllable_canonical(&num, &den);
    let t = loop {
        let t = random_matrix(rng, n, n) + DMatrix::identity(n, n) * 2.0;
        if t.clone().try_inverse().is_some() {
            break t;
        }
    };
    let t_inv = t.clone().try_inverse().unwrap();
    let plant = DiscretePlant::new_unchecked(&t * &r.a * &t_inv, &t * &r.b, &r.c * &t_inv, 1.0).unwrap();
    PlacedPlant { plant, lambda, poles }
}

/// Minimum-phase plant by pole/zero placement.
pub fn random_minimum_phase_plant(rng: &mut ChaCha8Rng, n: usize) -> DiscretePlant {
    let poles = stable_roots(rng, n, 0.05, 0.9);
    let zeros = stable_roots(rng, n - 1, 0.05, 0.85);
    let gain = rng.random_range(0.2..2.0);
    let num: Vec<f64> = poly_from_roots(&zeros).iter().map(|c| c * gain).collect();
    let den = poly_from_roots(&poles);
    let r = Realization::controllable_canonical(&num, &den);
    let t = random_matrix(rng, n, n) + DMatrix::identity(n, n) * 3.0;
    let t_inv = t.clone().try_inverse().unwrap();
    DiscretePlant::new_unchecked(&t * &r.a * &t_inv, &t * &r.b, &r.c * &t_inv, 1.0).unwrap()
}

/// `det [[zI - A, -B], [C, 0]]`.
fn rosenbrock_det(p: &DiscretePlant, z: Complex64) -> Complex64 {
    let n = p.order();
    let mut m = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(-p.a[(i, j)], 0.0);
        }
        m[(i, i)] += z;
        m[(i, n)] = Complex64::new(-p.b[i], 0.0);
        m[(n, i)] = Complex64::new(p.c[i], 0.0);
    }
    m.determinant()
}

/// Transmission zeros from the Rosenbrock system matrix: its determinant is
/// a polynomial of degree `n - 1`, recovered exactly by sampling on the unit
/// circle and inverting the DFT, then factored by Durand–Kerner.
pub fn rosenbrock_zeros(p: &DiscretePlant) -> Vec<Complex64> {
    let n = p.order();
    if n == 1 {
        return Vec::new();
    }
    let samples: Vec<Complex64> = (0..n)
        .map(|j| rosenbrock_det(p, Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64)))
        .collect();
    // coefficient of z^m, lowest power first
    let coeffs: Vec<Complex64> = (0..n)
        .map(|m| {
            samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * m) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    durand_kerner(&coeffs[..n])
}

/// Roots of `sum_m c[m] z^m` (lowest power first, non-zero leading term).
pub fn durand_kerner(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
    let deriv = |z: Complex64| {
        monic
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &k)| acc * z + k * i as f64)
    };
    let radius = 1.0 + monic[..deg].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|i| Complex64::from_polar(radius * 0.9, 0.4 + 2.0 * std::f64::consts::PI * i as f64 / deg as f64))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let zi = roots[i];
            let denom: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| zi - roots[j])
                .product();
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = deriv(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

/// Largest distance under a greedy nearest-neighbour matching.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size: {a:?} vs {b:?}");
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (idx, dist) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(dist);
        pool.remove(idx);
    }
    worst
}

/// Direct state recursion, kept independent of `DiscretePlant::simulate`.
pub fn outputs_of(p: &DiscretePlant, inputs: &[f64]) -> Vec<f64> {
    let mut x = DVector::zeros(p.order());
    let mut y = vec![(&p.c * &x)[0]];
    for &u in inputs {
        x = &p.a * x + &p.b * u;
        y.push((&p.c * &x)[0]);
    }
    y
}

pub fn states_of(p: &DiscretePlant, inputs: &[f64]) -> Vec<DVector<f64>> {
    let mut x = DVector::zeros(p.order());
    let mut out = vec![x.clone()];
    for &u in inputs {
        x = &p.a * x + &p.b * u;
        out.push(x.clone());
    }
    out
}
