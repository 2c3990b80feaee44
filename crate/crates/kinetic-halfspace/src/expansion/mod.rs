//! First-order Hilbert expansion with viscous and Knudsen boundary layers
//! around a planar Euler background.
//!
//! Interior terms live at `x_3`, the viscous layer at `y = x_3 / eps`, the
//! Knudsen layer at `eta = x_3 / eps^2`. Products of macroscopic functions are
//! handled by the identity `Gamma(p, q) + Gamma(q, p) = L[(I - P)(p q / sqrt(mu))]`,
//! exact for collision invariants, so no quadratic collision integral is evaluated.

mod assemble;
mod background;
mod interior;
mod matching;
mod viscous;

pub use assemble::{
    assemble, fit_slope, residual_sweep, write_sweep_csv, AssembleOptions, AssembledSolution,
    ExpansionSpec, ExpansionTerms, SweepRow, SweepTable, CORE_RADIUS,
};
pub use background::{
    solvability_residual, transport_term, EulerSlices, NodeState, SolvabilityReport,
};
pub use interior::{
    interior_micro, interior_micro_at, macro_perturbation, macro_product, BurnettInverse,
    InteriorMicro, InteriorMicroField, MacroProfiles, SOLVABILITY_THRESHOLD,
};
pub use matching::{knudsen_matching, Matching};
pub use viscous::{LayerProfile, LayerProfiles, ViscousLayer, ViscousSlice};
