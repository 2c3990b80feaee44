//! Assemble `L = nu - K` for a cutoff soft potential and check its structure.
//!
//! cargo run --release --example collision_operator -- [n_axis] [v_max]

use std::fs::File;

use kinetic_halfspace::collision::{
    assemble_k, coercivity_constant, read_operator_bin, CollisionModel,
};
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::state::FluidState;

fn main() -> kinetic_halfspace::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let v_max: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5.0);

    let model = CollisionModel::new(-1.0, 1.0, 0.4)?;
    let grid = build_grid(v_max, n)?;
    let op = assemble_k(&model, &FluidState::unit(), &grid)?;
    let d = &op.diagnostics;
    println!("{n}^3 grid, kappa = {}", model.kappa);
    println!(
        "asymmetry  raw {:.3e}  final {:.3e}",
        d.raw_asymmetry, d.asymmetry
    );
    println!(
        "null space raw {:.3e}  final {:.3e}",
        d.raw_null_residual, d.null_residual
    );
    println!(
        "symmetry orbit: {} of {} rows assembled",
        d.orbit_rows,
        op.len()
    );

    let c = coercivity_constant(&op, 300, 7)?;
    println!("c0 = {:.5} after {} Lanczos steps", c.c0, c.iterations);

    let path = std::env::temp_dir().join("khs-example.khsop");
    op.write_bin(File::create(&path)?)?;
    let (_, nu, k) = read_operator_bin(File::open(&path)?)?;
    assert!(nu == op.nu && k == op.k);
    println!("wrote and re-read {}", path.display());
    Ok(())
}
