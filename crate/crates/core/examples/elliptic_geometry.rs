//! Discriminant, real roots, components and merge distance of the level
//! sets y² = x³ + a x + b.
//!
//! ```text
//! cargo run --example elliptic_geometry [a] [b]
//! ```

use conservative_ode::analysis::{elliptic_geometry, epsilon_to_merge};

fn main() -> conservative_ode::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let cases = match args.as_slice() {
        [a, b] => vec![(*a, *b)],
        _ => vec![(-1.0, 0.3849), (-1.0, 0.0), (0.0, 1.0)],
    };
    for (a, b) in cases {
        let g = elliptic_geometry(a, b);
        println!("a = {a}, b = {b}");
        println!(
            "  discriminant {:.6e}, components {}",
            g.discriminant, g.component_count
        );
        println!("  roots {:?}", g.real_roots);
        if let (Some(oval), Some(gap)) = (g.oval_interval, g.gap) {
            println!("  oval {oval:?}, gap {gap:.6}, exit threshold {:?}", g.exit_threshold());
            println!("  merge distance {:.4e}", epsilon_to_merge(a, b)?);
        }
    }
    Ok(())
}
