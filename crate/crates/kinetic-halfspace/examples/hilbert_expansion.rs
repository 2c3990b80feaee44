//! Composite Hilbert expansion (interior + viscous + Knudsen layers) around a
//! smooth Euler background, and its convergence as eps -> 0.
//!
//! cargo run --release --example hilbert_expansion

use kinetic_halfspace::config::preset;
use kinetic_halfspace::criteria::expansion_terms;
use kinetic_halfspace::expansion::{residual_sweep, AssembleOptions};

fn main() -> kinetic_halfspace::Result<()> {
    let cfg = preset("sweep")?;
    let terms = expansion_terms(&cfg)?;
    println!("matching moments {:?}", terms.matching.moments);
    let eps = [0.2, 0.1, 0.05];
    let full = residual_sweep(&terms, &eps, &AssembleOptions::default())?;
    let ablated = residual_sweep(
        &terms,
        &eps,
        &AssembleOptions {
            knudsen: false,
            ..Default::default()
        },
    )?;
    println!(
        "{:>5} {:>11} {:>11} {:>11} {:>11}",
        "eps", "L2 dev", "wall", "wall w/o KL", "min F/mu"
    );
    for (a, b) in full.rows.iter().zip(&ablated.rows) {
        println!(
            "{:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            a.eps, a.deviation_l2, a.boundary_defect, b.boundary_defect, a.min_ratio_core
        );
    }
    println!("L2 slope {:?}", full.slope_l2);
    Ok(())
}
