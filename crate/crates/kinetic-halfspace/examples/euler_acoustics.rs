//! Planar Euler solver against linear acoustics, plus conservation.
//!
//! cargo run --release --example euler_acoustics

use kinetic_halfspace::criteria::acoustic_errors;
use kinetic_halfspace::euler::{init_euler, EulerInit, EulerParams};

fn main() -> kinetic_halfspace::Result<()> {
    let (delta, center, width) = (1e-3, 0.15, 0.05);
    for cells in [100, 200, 400, 800] {
        let mut f = init_euler(
            &EulerInit::acoustic_pulse(delta, center, width),
            EulerParams {
                cells,
                ..Default::default()
            },
        )?;
        let (m0, e0) = f.mass_energy();
        f.solve_to(0.2)?;
        let (m1, e1) = f.mass_energy();
        let e = acoustic_errors(&f, delta, center, width);
        println!(
            "{cells:>4} cells, {:>4} steps: L2 error rho {:.3e} u3 {:.3e} T {:.3e}; drift mass {:.1e} energy {:.1e}",
            f.steps,
            e[0],
            e[1],
            e[2],
            m1 - m0,
            e1 - e0
        );
    }
    Ok(())
}
