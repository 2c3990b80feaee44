use std::sync::OnceLock;

use approx::assert_relative_eq;
use kinetic_halfspace::collision::{
    assemble_k, coercivity_constant, read_operator_bin, split_cutoff, CollisionModel,
    CollisionOperator, QuadratureParams,
};
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::macro_micro::{invariant_vectors, transport_coefficients, PseudoInverse};
use kinetic_halfspace::state::FluidState;
use kinetic_halfspace::Error;
use proptest::prelude::*;

fn coarse() -> CollisionModel {
    CollisionModel::default().with_quadrature(QuadratureParams::coarse())
}

fn operator() -> &'static CollisionOperator {
    static OP: OnceLock<CollisionOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let grid = build_grid(4.5, 8).unwrap();
        assemble_k(
            &coarse(),
            &FluidState::new(1.1, [0.05, 0.0, 0.0], 0.9).unwrap(),
            &grid,
        )
        .unwrap()
    })
}

#[test]
fn symmetrized_matrix_is_exactly_symmetric() {
    let op = operator();
    assert_eq!(op.diagnostics.asymmetry, 0.0);
    for i in 0..op.len() {
        for j in 0..i {
            assert_eq!(op.k[(i, j)], op.k[(j, i)]);
        }
    }
}

#[test]
fn collision_invariants_are_annihilated() {
    let op = operator();
    assert!(
        op.diagnostics.null_residual <= 1e-10,
        "{}",
        op.diagnostics.null_residual
    );
    for chi in invariant_vectors(&op.state, &op.grid) {
        let l = op.apply_l(&chi);
        assert!(op.grid.norm(&l) <= 1e-10 * op.grid.norm(&chi));
    }
}

#[test]
fn coercive_off_the_null_space() {
    let c = coercivity_constant(operator(), 200, 3).unwrap();
    assert!(c.c0 > 0.0, "{c:?}");
}

#[test]
fn cutoff_split_adds_up_and_shrinks_with_m() {
    let op = operator();
    let a = split_cutoff(op, 0.8).unwrap();
    let b = split_cutoff(op, 0.2).unwrap();
    for i in 0..op.len() {
        for j in 0..op.len() {
            assert_relative_eq!(
                a.km[(i, j)] + a.kc[(i, j)],
                op.k[(i, j)],
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }
    assert!(b.km_sup < a.km_sup);
}

#[test]
fn binary_export_round_trips() {
    let op = operator();
    let mut buf = Vec::new();
    op.write_bin(&mut buf).unwrap();
    assert_eq!(&buf[..8], b"KHSOPv01");
    let (nodes, nu, k) = read_operator_bin(&buf[..]).unwrap();
    assert_eq!(nodes, op.grid.nodes);
    assert_eq!(nu, op.nu);
    assert_eq!(k, op.k);
    assert!(read_operator_bin(&b"NOTANOPFILE....."[..]).is_err());
}

#[test]
fn transport_coefficients_are_positive_and_isotropic() {
    let op = operator();
    let pinv = PseudoInverse::new(op, 1e12).unwrap();
    let tc = transport_coefficients(&pinv, &op.grid).unwrap();
    assert!(tc.mu_t > 0.0 && tc.kappa_t > 0.0);
    assert!(tc.isotropy_residual < 1e-2, "{tc:?}");
}

#[test]
fn kappa_outside_range_is_rejected() {
    let grid = build_grid(4.5, 8).unwrap();
    let model = CollisionModel {
        kappa: -3.0,
        ..coarse()
    };
    assert!(matches!(
        assemble_k(&model, &FluidState::unit(), &grid),
        Err(Error::InvalidParameter(_))
    ));
    assert!(CollisionModel::new(1.5, 1.0, 0.4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn quadratic_form_is_nonnegative(seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let op = operator();
        let h: Vec<f64> = (0..op.len()).map(|i| seed[i % seed.len()] * op.sqrt_mu[i] * (1.0 + (i / seed.len()) as f64 * 0.1)).collect();
        let q = op.quadratic_form(&h);
        prop_assert!(q >= -1e-12 * op.grid.dot(&h, &h), "{}", q);
    }
}
