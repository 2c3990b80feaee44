//! Half-space Knudsen layer `v_3 d_eta f + L_0 f = S` on `eta > 0` with
//! specular reflection at the wall.
//!
//! The boundary datum is lifted into the source with a cut-off `Upsilon`; the
//! homogeneous-reflection problem is truncated to `(0, d)`, penalized by
//! `delta` and damped at the walls by `1 - 1/n`, and the limits are taken in
//! sequence. A constant shift along the even collision invariants fixes the
//! four far-field fluxes at `eta = d`.

mod decay;
mod direct;
mod io;
mod mesh;
mod problem;
mod shift;
mod solve;
mod transport;

pub use decay::{decay_report, DecayReport, DecayRow};
pub use direct::solve_direct;
pub use io::{write_field_csv, write_history_json};
pub use mesh::EtaMesh;
pub use problem::{
    datum_from_trace, solvable_odd_trace, upsilon, upsilon_prime, KnudsenProblem, SourceModel,
    SOLVABILITY_TOL,
};
pub use shift::{constraint_shift, ShiftOutcome, ShiftSystem};
pub use solve::{
    flux_diagnostics, lifted_on_mesh, limit_boundary_damping, solve_halfspace, solve_truncated,
    weighted_sup_field, Backend, DampingLimit, DampingStep, DomainRecord, KnudsenParams,
    KnudsenSolution, MeshSpec, StageRecord, TruncatedSolution,
};
pub use transport::{Penalty, Transport};
