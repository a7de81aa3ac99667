//! The damped Newton solver on its own, and one implicit step of each
//! implicit method from (0.5, 0.1) with τ = 0.3.
//!
//! ```text
//! cargo run --example newton
//! ```

use conservative_ode::integrators::{backward_euler_step, implicit_midpoint_step};
use conservative_ode::solver::NoJacobian;
use conservative_ode::{newton_solve, NewtonConfig};

fn main() -> conservative_ode::Result<()> {
    let cfg = NewtonConfig::default();
    let circle = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]);
    let s = newton_solve(circle, None::<NoJacobian>, &[0.9, 0.4], &cfg)?;
    println!(
        "circle ∩ diagonal: {:?} after {} iterations, residual {:.1e}",
        s.root, s.iterations, s.residual_norm
    );

    let f = |x: &[f64]| vec![2.0 * x[1], 3.0 * x[0] * x[0] - 1.0];
    let be = backward_euler_step(f, &[0.5, 0.1], 0.3, &cfg)?;
    let mp = implicit_midpoint_step(f, &[0.5, 0.1], 0.3, &cfg)?;
    println!("backward Euler   {:?} ({} iterations)", be.state, be.info.newton_iters);
    println!("implicit midpoint {:?} ({} iterations)", mp.state, mp.info.newton_iters);

    match newton_solve(
        |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]),
        None::<NoJacobian>,
        &[0.5],
        &NewtonConfig { max_iters: 20, ..cfg },
    ) {
        Ok(s) => println!("unexpected root {:?}", s.root),
        Err(e) => println!("x² + 1 = 0: {e}"),
    }
    Ok(())
}
