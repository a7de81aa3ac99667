#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use conservative_ode::{ConservedSystem, MultiIndex, Polynomial};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const A: f64 = -1.0;
pub const B: f64 = 0.3849;
pub const X0: f64 = 0.571;

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

pub fn config(name: &str) -> PathBuf {
    configs_dir().join(name)
}

/// `x' = 2y, y' = 3x² + a` with `ψ = y² - x³ - a x`.
pub fn elliptic(a: f64) -> ConservedSystem {
    elliptic_with_f2(a, "3*x1^2 + a")
}

pub fn elliptic_with_f2(a: f64, f2: &str) -> ConservedSystem {
    let params = HashMap::from([("a".to_string(), a)]);
    let p = |s: &str| Polynomial::parse_with(s, 2, &params).unwrap();
    ConservedSystem::new(vec![p("2*x2"), p(f2)], vec![p("x2^2 - x1^3 - a*x1")]).unwrap()
}

pub fn reference_x0() -> Vec<f64> {
    vec![X0, (X0.powi(3) + A * X0 + B).sqrt()]
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..radius)).collect()
}

/// Random polynomial in `n` variables, total degree ≤ `max_degree`, up to
/// `max_terms` terms with coefficients in [-2, 2].
pub fn random_polynomial(rng: &mut ChaCha8Rng, n: usize, max_degree: u32, max_terms: usize) -> Polynomial {
    let k = rng.gen_range(1..=max_terms);
    let terms = (0..k).map(|_| {
        let mut left = rng.gen_range(0..=max_degree);
        let mut e = vec![0u32; n];
        while left > 0 {
            e[rng.gen_range(0..n)] += 1;
            left -= 1;
        }
        (MultiIndex::new(e), rng.gen_range(-2.0..2.0))
    });
    Polynomial::from_terms(n, terms.collect::<Vec<_>>()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
