use std::sync::OnceLock;

use kinetic_halfspace::config::{preset, ExperimentConfig};
use kinetic_halfspace::criteria::{background_slices, expansion_terms};
use kinetic_halfspace::euler::{EulerInit, Profile};
use kinetic_halfspace::expansion::{
    assemble, fit_slope, interior_micro, solvability_residual, AssembleOptions, ExpansionSpec,
    ExpansionTerms, SOLVABILITY_THRESHOLD,
};
use kinetic_halfspace::macro_micro::ProjectionBasis;
use kinetic_halfspace::Error;

/// The `sweep` preset: 8^3 velocities, smooth background, viscous layer and
/// a Knudsen layer driven by an odd wall trace.
fn config() -> ExperimentConfig {
    preset("sweep").unwrap()
}

fn terms() -> &'static ExpansionTerms {
    static T: OnceLock<ExpansionTerms> = OnceLock::new();
    T.get_or_init(|| expansion_terms(&config()).unwrap())
}

#[test]
fn fit_slope_recovers_power_laws() {
    let x = [0.2, 0.1, 0.05];
    let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powf(1.5)).collect();
    assert!((fit_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(fit_slope(&[0.1], &[1.0]), None);
}

#[test]
fn maxwellian_background_has_no_deviation() {
    let mut cfg = config();
    cfg.background.init = EulerInit::constant();
    cfg.sweep.spec = ExpansionSpec {
        knudsen: cfg.sweep.spec.knudsen.clone(),
        ..ExpansionSpec::default()
    };
    let t = expansion_terms(&cfg).unwrap();
    assert!(t.knudsen.is_none());
    let a = assemble(0.1, &t, &AssembleOptions::default()).unwrap();
    let worst = a
        .deviation
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(worst <= 1e-14, "{worst}");
    assert!(a.boundary_defect <= 1e-14);
}

#[test]
fn interior_micro_parts_are_orthogonal_to_invariants() {
    let t = terms();
    let grid = &t.op0.grid;
    let field = interior_micro(
        &t.slices,
        &t.spec.f1,
        &t.burnett,
        grid,
        SOLVABILITY_THRESHOLD,
    )
    .unwrap();
    for (node, f2) in t.slices.nodes().iter().zip(&field.f2_perp).step_by(17) {
        let basis = ProjectionBasis::new(&node.state(), grid).unwrap();
        let m = basis.chi_moments(f2);
        let scale = grid.norm(f2).max(1e-300);
        assert!(m.iter().all(|x| x.abs() <= 1e-8 * scale.max(1.0)), "{m:?}");
    }
}

#[test]
fn non_euler_background_is_rejected() {
    let t = terms();
    let bad = t
        .slices
        .with_density_perturbation(&Profile::Cosine {
            amplitude: 0.05,
            wavenumber: 2.0,
        })
        .unwrap();
    let r = solvability_residual(&bad, &t.op0.grid).unwrap();
    assert!(r.relative >= 0.1, "{r:?}");
    assert!(matches!(
        interior_micro(
            &bad,
            &t.spec.f1,
            &t.burnett,
            &t.op0.grid,
            SOLVABILITY_THRESHOLD
        ),
        Err(Error::Solvability { .. })
    ));
}

#[test]
fn solvability_residual_shrinks_under_refinement() {
    // On 8^3 velocity truncation floors the residual; use the 12^3 lattice.
    let cfg = preset("criterion-7").unwrap();
    let grid = cfg.grid.build().unwrap();
    let coarse = solvability_residual(&background_slices(&cfg, 50).unwrap(), &grid).unwrap();
    let fine = solvability_residual(&background_slices(&cfg, 100).unwrap(), &grid).unwrap();
    assert!(
        fine.relative < 0.5 * coarse.relative,
        "{} vs {}",
        fine.relative,
        coarse.relative
    );
}

#[test]
fn viscous_layer_decays_away_from_the_wall() {
    let layer = terms().viscous.as_ref().expect("layer configured");
    let sup = |y: f64| layer.f1bar(y).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let wall = sup(0.0);
    assert!(wall > 0.0);
    for y in [4.0, 6.0, 8.0] {
        assert!(sup(y) <= 1e-6 * wall, "y = {y}: {}", sup(y));
    }
}

#[test]
fn composite_field_meets_the_wall_condition() {
    let t = terms();
    assert!(t.knudsen.is_some());
    for eps in [0.2, 0.1] {
        let a = assemble(eps, t, &AssembleOptions::default()).unwrap();
        assert!(
            a.boundary_defect <= 1e-8 * eps,
            "eps = {eps}: {}",
            a.boundary_defect
        );
        assert!(a.min_ratio_core > 0.0, "eps = {eps}: {}", a.min_ratio_core);
    }
    let without = assemble(
        0.1,
        t,
        &AssembleOptions {
            knudsen: false,
            ..AssembleOptions::default()
        },
    )
    .unwrap();
    assert!(
        without.boundary_defect >= 1e-4,
        "{}",
        without.boundary_defect
    );
}
