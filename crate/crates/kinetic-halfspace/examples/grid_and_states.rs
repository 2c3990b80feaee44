//! Velocity lattice, local Maxwellians and the weight envelope.
//!
//! cargo run --release --example grid_and_states

use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::state::{
    check_envelope, maxwellian_on, weight_w_on, FluidState, WeightSystem,
};

fn main() -> kinetic_halfspace::Result<()> {
    let grid = build_grid(6.0, 24)?;
    println!("{} nodes, h = {:.4}", grid.len(), grid.h);

    let st = FluidState::new(1.2, [0.1, -0.05, 0.0], 1.1)?;
    let mu = maxwellian_on(&st, &grid);
    let mass = grid.integrate(&mu);
    let mom: Vec<f64> = (0..3)
        .map(|k| {
            grid.integrate(
                &grid
                    .map(|v| v[k])
                    .iter()
                    .zip(&mu)
                    .map(|(a, b)| a * b)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let energy = grid.integrate(
        &grid
            .map(|v| {
                let d = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
            })
            .iter()
            .zip(&mu)
            .map(|(a, b)| a * b)
            .collect::<Vec<_>>(),
    );
    println!("rho  {mass:.12} (exact {})", st.rho);
    println!("rho u {:.3e} {:.3e} {:.3e}", mom[0], mom[1], mom[2]);
    println!("3 rho T {energy:.12} (exact {})", 3.0 * st.rho * st.temp);

    let ws = WeightSystem::default();
    let states = [FluidState::unit(), st];
    let env = check_envelope(&ws, &states, &grid)?;
    println!(
        "envelope: alpha = {:.3}, C = {:.3}, T in [{}, {}]",
        env.alpha, env.c, env.min_t, env.max_t
    );
    let w = weight_w_on(&ws, &FluidState::unit(), &grid)?;
    println!(
        "w_l ranges over [{:.3}, {:.3e}]",
        w.iter().cloned().fold(f64::INFINITY, f64::min),
        w.iter().cloned().fold(0.0, f64::max)
    );

    let cold = FluidState::new(1.0, [0.0; 3], 0.7)?;
    match check_envelope(&ws, &[cold], &grid) {
        Err(e) => println!("rejected as expected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
