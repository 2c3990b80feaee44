use std::sync::{Arc, OnceLock};

use kinetic_halfspace::collision::{assemble_k, CollisionModel, CollisionOperator};
use kinetic_halfspace::grid::build_grid;
use kinetic_halfspace::knudsen::{
    constraint_shift, datum_from_trace, lifted_on_mesh, limit_boundary_damping, solvable_odd_trace,
    solve_halfspace, upsilon, EtaMesh, KnudsenParams, KnudsenProblem, MeshSpec, SourceModel,
};
use kinetic_halfspace::state::{FluidState, WeightSystem};
use proptest::prelude::*;

fn operator() -> Arc<CollisionOperator> {
    static OP: OnceLock<Arc<CollisionOperator>> = OnceLock::new();
    OP.get_or_init(|| {
        Arc::new(
            assemble_k(
                &CollisionModel::default(),
                &FluidState::unit(),
                &build_grid(4.5, 8).unwrap(),
            )
            .unwrap(),
        )
    })
    .clone()
}

fn small_params() -> KnudsenParams {
    KnudsenParams {
        d_schedule: vec![10.0],
        mesh: MeshSpec::Graded {
            cells: 40,
            first: 0.05,
        },
        ..KnudsenParams::default()
    }
}

fn source() -> SourceModel {
    SourceModel::Algebraic {
        q: 6.0,
        a31: 0.5,
        b3: 1.0,
        a33: 0.3,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn zero_data_gives_zero_solution() {
    let op = operator();
    let p = KnudsenProblem::new(
        op.clone(),
        SourceModel::Zero,
        vec![0.0; op.len()],
        WeightSystem::default(),
    )
    .unwrap();
    assert!(p.has_zero_data());
    let sol = solve_halfspace(&p, &small_params()).unwrap();
    assert_eq!(max_abs(&sol.field), 0.0);
}

#[test]
fn odd_trace_datum_is_minus_twice_the_trace() {
    let op = operator();
    let t = solvable_odd_trace(&op, 0.3).unwrap();
    let f_b = datum_from_trace(&op, &t);
    for (i, v) in op.grid.nodes.iter().enumerate() {
        if v[2] < 0.0 {
            assert!((f_b[i] + 2.0 * t[i]).abs() <= 1e-14 * (1.0 + t[i].abs()));
        } else {
            assert_eq!(f_b[i], 0.0);
        }
    }
}

#[test]
fn even_trace_needs_no_layer() {
    let op = operator();
    let even: Vec<f64> = op
        .grid
        .nodes
        .iter()
        .zip(&op.sqrt_mu)
        .map(|(v, s)| (1.0 + v[0] + v[2] * v[2]) * s)
        .collect();
    assert!(datum_from_trace(&op, &even).iter().all(|&x| x == 0.0));
}

#[test]
fn flux_structure_after_shift() {
    let op = operator();
    let f_b = datum_from_trace(&op, &solvable_odd_trace(&op, 0.3).unwrap());
    let p = KnudsenProblem::new(op, source(), f_b, WeightSystem::default()).unwrap();
    let sol = solve_halfspace(&p, &small_params()).unwrap();
    assert!(sol.b3_max() <= 1e-8, "{}", sol.b3_max());
    assert!(sol.flux_orthogonality <= 1e-6, "{}", sol.flux_orthogonality);
    assert!(max_abs(&sol.shift.fluxes_after) <= 1e-8, "{:?}", sol.shift);
    assert!(sol.domains[0].decay_sups.iter().any(|p| p[0] == 4.0));

    // Shifting an already shifted field changes nothing.
    let mut f = sol.f.clone();
    let again = constraint_shift(&p.shift, &mut f, p.nv());
    assert!(again.phi.iter().all(|x| x.abs() <= 1e-8), "{:?}", again.phi);
}

#[test]
fn shift_determinant_matches_transport_coefficients() {
    let op = operator();
    let p = KnudsenProblem::new(
        op.clone(),
        source(),
        vec![0.0; op.len()],
        WeightSystem::default(),
    )
    .unwrap();
    let s = &p.shift;
    let m = &s.matrix;
    // Rows 2-4 are exact on the lattice: mu and 3 sqrt(T) kappa on the
    // diagonal, nothing coupling to the other columns.
    assert!((m[1][1] - s.mu_t).abs() <= 1e-10 * s.mu_t);
    assert!((m[2][2] - s.mu_t).abs() <= 1e-10 * s.mu_t);
    assert!((m[3][3] - 3.0 * s.kappa_t).abs() <= 1e-10 * s.kappa_t);
    for (r, row) in m.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if r != c && !(r == 0 && c == 3) {
                assert!(x.abs() <= 1e-12, "({r}, {c}) = {x}");
            }
        }
    }
    // Row 1 holds the lattice second moment of mu, short of rho T only by
    // velocity truncation; the determinant inherits exactly that factor.
    let expected = s.mu_t * s.mu_t * s.kappa_t;
    assert!((m[0][0] - 1.0).abs() <= 1e-4, "{}", m[0][0]);
    assert!(
        (s.normalized_determinant - m[0][0] * expected).abs() <= 1e-10 * expected,
        "{} vs {}",
        s.normalized_determinant,
        m[0][0] * expected
    );
}

#[test]
fn boundary_damping_converges() {
    let op = operator();
    let f_b = datum_from_trace(&op, &solvable_odd_trace(&op, 0.3).unwrap());
    let p = KnudsenProblem::new(op, source(), f_b, WeightSystem::default()).unwrap();
    let mesh = EtaMesh::graded(10.0, 40, 0.05).unwrap();
    let g = lifted_on_mesh(&p, &mesh);
    let params = KnudsenParams {
        damping_tol: 1e-6,
        ..small_params()
    };
    let lim = limit_boundary_damping(&p, &mesh, &g, 1e-2, &params).unwrap();
    let inc: Vec<f64> = lim.steps.iter().filter_map(|s| s.increment).collect();
    assert!(inc.len() >= 2);
    assert!(inc.last().unwrap() <= &1e-6);
    assert!(inc.windows(2).all(|w| w[1] < w[0]), "{inc:?}");
}

#[test]
fn domain_must_be_at_least_one() {
    let op = operator();
    let p = KnudsenProblem::new(
        op.clone(),
        source(),
        vec![0.0; op.len()],
        WeightSystem::default(),
    )
    .unwrap();
    let params = KnudsenParams {
        d_schedule: vec![0.5],
        ..small_params()
    };
    assert!(solve_halfspace(&p, &params).is_err());
}

proptest! {
    #[test]
    fn cutoff_is_a_partition_of_the_wall(eta in 0.0f64..5.0) {
        let u = upsilon(eta);
        prop_assert!((0.0..=1.0).contains(&u));
        if eta <= 1.0 { prop_assert_eq!(u, 1.0); }
        if eta >= 2.0 { prop_assert_eq!(u, 0.0); }
    }

    #[test]
    fn graded_mesh_covers_the_domain(d in 2.0f64..60.0, cells in 8usize..200, first in 0.01f64..0.2) {
        prop_assume!(first * cells as f64 <= d);
        let m = EtaMesh::graded(d, cells, first).unwrap();
        prop_assert_eq!(m.nodes[0], 0.0);
        prop_assert!((m.nodes[cells] - d).abs() <= 1e-12 * d);
        prop_assert!(m.nodes.windows(2).all(|w| w[1] > w[0]));
        let (k, s) = m.locate(0.5 * d);
        prop_assert!(k < cells && (0.0..=1.0).contains(&s));
    }
}
