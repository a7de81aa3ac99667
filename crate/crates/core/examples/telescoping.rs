//! Polynomial arithmetic and the telescoping factorization behind the
//! discrete multiplier: Σ_j Λ_j(x, x')·(x'_j - x_j) = p(x') - p(x).
//!
//! ```text
//! cargo run --example telescoping
//! ```

use conservative_ode::Polynomial;

fn main() -> conservative_ode::Result<()> {
    let p: Polynomial = "x2^2 - x1^3 + x1 + 2*x1*x2^2".parse()?;
    let q: Polynomial = "x1 - x2".parse()?;
    println!("p       = {p}");
    println!("p * q   = {}", &p * &q);
    for (j, d) in p.gradient().iter().enumerate() {
        println!("dp/dx{}  = {d}", j + 1);
    }

    let x = [0.3, -1.2];
    let xn = [0.7, 0.4];
    let factors: Vec<f64> = (0..2)
        .map(|j| p.forward_difference_factor(j, &x, &xn))
        .collect::<Result<_, _>>()?;
    let lhs: f64 = factors
        .iter()
        .zip(x.iter().zip(&xn))
        .map(|(l, (a, b))| l * (b - a))
        .sum();
    let rhs = p.evaluate(&xn)? - p.evaluate(&x)?;
    println!("factors {factors:?}");
    println!("Λ·Δx = {lhs:.17e}");
    println!("Δp   = {rhs:.17e}");

    // at equal points the factors are the gradient
    let at: Vec<f64> = (0..2)
        .map(|j| p.forward_difference_factor(j, &x, &x))
        .collect::<Result<_, _>>()?;
    let grad: Vec<f64> = p.gradient().iter().map(|g| g.evaluate(&x)).collect::<Result<_, _>>()?;
    println!("Λ(x, x) = {at:?}, ∇p(x) = {grad:?}");
    Ok(())
}
