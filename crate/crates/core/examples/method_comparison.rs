//! Runs the five steppers on the two-component elliptic level set
//! (a = -1, b = 0.3849, τ = 0.3, N = 5000) and tabulates drift and exits.
//!
//! ```text
//! cargo run --release --example method_comparison
//! ```

use std::path::Path;

use conservative_ode::config::ExperimentConfig;
use conservative_ode::experiment::{compare, write_compare_csv};

fn main() -> conservative_ode::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let configs = ["euler", "backward_euler", "verlet", "midpoint", "conservative"]
        .iter()
        .map(|name| ExperimentConfig::load(&dir.join(format!("elliptic_{name}.cfg")), &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = compare(&configs)?;
    write_compare_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
