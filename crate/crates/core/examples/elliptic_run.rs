//! The conservative multiplier method on y² = x³ - x + 0.3849, writing the
//! trajectory, drift, fit, geometry and manifest CSVs.
//!
//! ```text
//! cargo run --release --example elliptic_run [steps] [out_dir]
//! ```

use std::path::{Path, PathBuf};

use conservative_ode::config::ExperimentConfig;
use conservative_ode::experiment::run;

fn main() -> conservative_ode::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps = args.next().unwrap_or_else(|| "5000".into());
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/elliptic_conservative.cfg");
    let mut cfg = ExperimentConfig::load(&cfg_path, &[("steps".into(), steps)])?;
    if let Some(out) = args.next() {
        cfg.output = PathBuf::from(out);
    }
    let rep = run(&cfg)?;
    for path in rep.write_artifacts(&cfg.output)? {
        println!("wrote {}", path.display());
    }
    println!("status      {}", rep.status.name());
    println!("steps       {}", rep.trajectory.len_steps());
    println!("max drift   {:.3e}", rep.max_drift);
    println!("exit step   {:?}", rep.exit_step);
    println!("newton      mean {:.2}, max {}", rep.newton_mean(), rep.newton_max());
    println!("final state {:?}", rep.trajectory.last());
    Ok(())
}
