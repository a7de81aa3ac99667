//! Round-off drift of the conservative method over many steps, the fitted
//! accumulation rate E ≈ C_a N^s, and the resulting bound N_max.
//!
//! ```text
//! cargo run --release --example accumulation_rate [steps]
//! ```

use std::path::Path;

use conservative_ode::analysis::{epsilon_to_merge, fit_accumulation_rate, n_max, AccumulationFit};
use conservative_ode::config::ExperimentConfig;
use conservative_ode::experiment::run;

fn main() -> conservative_ode::Result<()> {
    let steps = std::env::args().nth(1).unwrap_or_else(|| "100000".into());
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/elliptic_conservative.cfg");
    let cfg = ExperimentConfig::load(&cfg_path, &[("steps".into(), steps)])?;
    let rep = run(&cfg)?;
    println!("N,max_drift");
    for (n, e) in &rep.drift.checkpoints {
        println!("{n},{e:.3e}");
    }
    let fit = fit_accumulation_rate(&rep.drift)?;
    let eps = epsilon_to_merge(-1.0, cfg.elliptic_level()?)?;
    println!("C_a = {:.3e}, s = {:.4}, R² = {:.4}", fit.c_a, fit.s, fit.r_squared);
    println!("epsilon = {eps:.4e}, N_max = {:.3e}", n_max(eps, &fit)?);

    let published = AccumulationFit {
        c_a: 2.45e-17,
        s: 0.5964,
        r_squared: 1.0,
        n_points: 0,
    };
    println!(
        "with C_a = 2.45e-17, s = 0.5964, epsilon = 1.8e-7: N_max = {:.3e}",
        n_max(1.8e-7, &published)?
    );
    Ok(())
}
