//! Checks Λ·f = 0 for the elliptic system, then for a perturbed right-hand
//! side that no longer conserves ψ.
//!
//! ```text
//! cargo run --example verify_multiplier
//! ```

use std::collections::HashMap;

use conservative_ode::{verify_multiplier, ConservedSystem, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(f2: &str) -> conservative_ode::Result<ConservedSystem> {
    let params = HashMap::from([("a".to_string(), -1.0)]);
    let p = |s: &str| Polynomial::parse_with(s, 2, &params);
    ConservedSystem::new(vec![p("2*x2")?, p(f2)?], vec![p("x2^2 - x1^3 - a*x1")?])
}

fn main() -> conservative_ode::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let samples: Vec<Vec<f64>> = (0..1000)
        .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    for f2 in ["3*x1^2 + a", "3*x1^2 + a + 0.001"] {
        let sys = system(f2)?;
        let rep = verify_multiplier(&sys, &samples, 1e-12, None)?;
        println!(
            "f2 = {f2:<20} max |Λf| = {:.3e}  scaled = {:.3e}  {}",
            rep.max_residual,
            rep.max_scaled_residual,
            if rep.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
