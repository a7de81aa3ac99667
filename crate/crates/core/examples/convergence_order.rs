//! Observed convergence order of each stepper on the elliptic system,
//! against a fine RK4 reference at T = 1.
//!
//! ```text
//! cargo run --release --example convergence_order
//! ```

use std::path::Path;

use conservative_ode::config::SystemDef;
use conservative_ode::{integrate, StepperKind, StepperSpec};

fn rk4(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: &[f64], t: f64, n: usize) -> Vec<f64> {
    let h = t / n as f64;
    let mut x = x0.to_vec();
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, h / 2.0));
        let k3 = f(&axpy(&x, &k2, h / 2.0));
        let k4 = f(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

fn main() -> conservative_ode::Result<()> {
    let sys = SystemDef::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/elliptic.sys"))?.build()?;
    let x1: f64 = 0.571;
    let x0 = vec![x1, (x1.powi(3) - x1 + 0.3849).sqrt()];
    let reference = rk4(&|x| sys.eval_f(x).unwrap(), &x0, 1.0, 100_000);
    let taus: [f64; 3] = [0.1, 0.05, 0.025];
    println!("stepper,tau,error,order");
    for kind in StepperKind::ALL {
        let mut prev: Option<f64> = None;
        for tau in taus {
            let steps = (1.0 / tau).round() as usize;
            let traj = integrate(&sys, &StepperSpec::new(kind, tau), &x0, steps, 1e3)?;
            let err = traj
                .last()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let order = prev.map_or(String::new(), |e| format!("{:.3}", (e / err).log2()));
            println!("{kind},{tau},{err:.3e},{order}");
            prev = Some(err);
        }
    }
    Ok(())
}
