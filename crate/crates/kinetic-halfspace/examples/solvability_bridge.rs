//! The projected transport residual `P[(d_t + v . grad) mu / sqrt(mu)]` vanishes
//! at the scheme's order for an Euler solution and stays O(1) otherwise.
//!
//! cargo run --release --example solvability_bridge

use kinetic_halfspace::config::preset;
use kinetic_halfspace::criteria::background_slices;
use kinetic_halfspace::euler::Profile;
use kinetic_halfspace::expansion::{fit_slope, solvability_residual};

fn main() -> kinetic_halfspace::Result<()> {
    let cfg = preset("expand")?;
    let grid = cfg.grid.build()?;
    let mut h = Vec::new();
    let mut rel = Vec::new();
    for cells in [50, 100, 200, 400] {
        let sl = background_slices(&cfg, cells)?;
        let r = solvability_residual(&sl, &grid)?;
        let bad = solvability_residual(
            &sl.with_density_perturbation(&Profile::Cosine {
                amplitude: 0.05,
                wavenumber: 2.0,
            })?,
            &grid,
        )?;
        println!(
            "{cells:>4} cells: Euler {:.3e}   perturbed {:.3e}",
            r.relative, bad.relative
        );
        h.push(1.0 / cells as f64);
        rel.push(r.relative);
    }
    println!(
        "observed order {:.2}",
        fit_slope(&h, &rel).unwrap_or(f64::NAN)
    );
    Ok(())
}
