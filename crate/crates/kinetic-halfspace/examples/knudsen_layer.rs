//! Half-space Knudsen layer with specular reflection: boundary datum from an
//! odd wall trace, algebraically decaying source, constraint shift and decay.
//!
//! cargo run --release --example knudsen_layer

use std::sync::Arc;

use kinetic_halfspace::collision::{assemble_k, CollisionModel};
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::knudsen::{
    datum_from_trace, solvable_odd_trace, solve_halfspace, KnudsenParams, KnudsenProblem, MeshSpec,
    SourceModel,
};
use kinetic_halfspace::state::{FluidState, WeightSystem};

fn main() -> kinetic_halfspace::Result<()> {
    let grid = build_grid(4.5, 8)?;
    let op = Arc::new(assemble_k(
        &CollisionModel::default(),
        &FluidState::unit(),
        &grid,
    )?);
    let f_b = datum_from_trace(&op, &solvable_odd_trace(&op, 0.3)?);
    let source = SourceModel::Algebraic {
        q: 6.0,
        a31: 0.5,
        b3: 1.0,
        a33: 0.3,
    };
    let problem = KnudsenProblem::new(op, source, f_b, WeightSystem::default())?;

    let params = KnudsenParams {
        d_schedule: vec![10.0, 20.0],
        mesh: MeshSpec::Nested {
            first: 0.05,
            max_width: 0.5,
            growth: 1.15,
        },
        ..KnudsenParams::default()
    };
    let sol = solve_halfspace(&problem, &params)?;
    for s in &sol.history {
        println!(
            "d {:>4} delta {:.0e} iters {:>4} residual {:.2e}",
            s.d, s.delta, s.iterations, s.solver_residual
        );
    }
    for d in &sol.domains {
        println!(
            "d {:>4}: sup {:.4e}, change from previous d {:?}",
            d.d, d.weighted_sup, d.difference
        );
    }
    println!("shift phi {:?}", sol.shift.phi);
    println!(
        "b3 {:.2e}, flux orthogonality {:.2e}",
        sol.b3_max(),
        sol.flux_orthogonality
    );

    let decay = sol.decay(&problem, &[0.0, 2.0, 4.0], 5.0)?;
    for r in &decay.rows {
        println!("k {}: sup (1+eta)^k |w f| = {:.4e}", r.k, r.weighted_sup);
    }
    println!("fitted decay exponent {:?}", decay.fitted_exponent);
    Ok(())
}
