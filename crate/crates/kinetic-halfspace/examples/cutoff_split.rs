//! Near/far split `K = K^m + K^c` and the scaling of `sup |K^m|` with `m`.
//!
//! cargo run --release --example cutoff_split

use kinetic_halfspace::collision::{assemble_k, split_cutoff, CollisionModel};
use kinetic_halfspace::expansion::fit_slope;
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::state::FluidState;

fn main() -> kinetic_halfspace::Result<()> {
    let grid = build_grid(6.0, 12)?;
    let model = CollisionModel::default();
    let op = assemble_k(&model, &FluidState::unit(), &grid)?;
    let ms = [0.8, 0.4, 0.2];
    let mut km = Vec::new();
    println!("{:>5} {:>12} {:>12}", "m", "sup K^m", "sup K^c");
    for m in ms {
        let s = split_cutoff(&op, m)?;
        println!("{m:>5} {:>12.4e} {:>12.4e}", s.km_sup, s.kc_sup);
        km.push(s.km_sup);
    }
    let slope = fit_slope(&ms, &km).unwrap_or(f64::NAN);
    println!("slope {slope:.3} (3 + kappa = {})", 3.0 + model.kappa);
    Ok(())
}
