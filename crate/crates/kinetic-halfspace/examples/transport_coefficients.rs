//! Viscosity and heat conductivity from the Burnett functions, for several
//! potential exponents.
//!
//! cargo run --release --example transport_coefficients -- [n_axis]

use kinetic_halfspace::collision::{assemble_k, CollisionModel};
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::macro_micro::{transport_coefficients, PseudoInverse};
use kinetic_halfspace::state::FluidState;

fn main() -> kinetic_halfspace::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(16);
    // Coarser lattices trip the raw-asymmetry guard at kappa = -1/2.
    let grid = build_grid(6.0, n)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "kappa", "mu", "k_heat", "4/3 res", "isotropy"
    );
    for kappa in [-0.5, -1.0, -2.0] {
        let model = CollisionModel::new(kappa, 1.0, 0.4)?;
        let op = assemble_k(&model, &FluidState::unit(), &grid)?;
        let pinv = PseudoInverse::new(&op, 1e12)?;
        let tc = transport_coefficients(&pinv, &grid)?;
        println!(
            "{kappa:>6} {:>10.5} {:>10.5} {:>10.2e} {:>10.2e}",
            tc.mu_t, tc.kappa_t, tc.identity_43_residual, tc.isotropy_residual
        );
    }
    Ok(())
}
