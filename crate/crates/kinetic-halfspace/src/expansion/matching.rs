use serde::{Deserialize, Serialize};

use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::knudsen::datum_from_trace;
use crate::state::maxwellian_on;

/// Boundary datum of the first Knudsen layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Matching {
    /// `t(Rv) - t(v)` on `v_3 < 0`, zero elsewhere.
    pub f_b: Vec<f64>,
    /// `<v_3 chi, f_b>` for `chi = (1, v_1 - u_1, v_2 - u_2, |v - u|^2) sqrt(mu_0)`.
    pub moments: [f64; 4],
    /// `-<v_3 chi, t>`, the same numbers computed from the full trace.
    pub trace_flux: [f64; 4],
    /// Largest `|t(v) - t(Rv)|`.
    pub mismatch: f64,
}

impl Matching {
    pub fn needs_layer(&self) -> bool {
        self.f_b.iter().any(|&x| x != 0.0)
    }
}

/// Specular mismatch of the wall trace `t` of `f_1 + f1bar`; fails when the
/// datum violates the flux solvability conditions by more than `tol` (relative).
pub fn knudsen_matching(op0: &CollisionOperator, trace: &[f64], tol: f64) -> Result<Matching> {
    let grid = &op0.grid;
    if trace.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "trace length differs from the grid".into(),
        ));
    }
    let st = op0.state;
    let f_b = datum_from_trace(op0, trace);
    let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
    let mut moments = [0.0; 4];
    let mut trace_flux = [0.0; 4];
    for i in 0..grid.len() {
        let v = grid.nodes[i];
        let d = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
        let chi = [1.0, d[0], d[1], d[0] * d[0] + d[1] * d[1] + d[2] * d[2]];
        let w = grid.quad_weights[i] * v[2] * sm[i];
        for k in 0..4 {
            moments[k] += w * chi[k] * f_b[i];
            trace_flux[k] -= w * chi[k] * trace[i];
        }
    }
    let mismatch = (0..grid.len())
        .map(|i| (trace[i] - trace[grid.reflect_map[i]]).abs())
        .fold(0.0, f64::max);
    let scale = grid.norm(&f_b);
    if moments
        .iter()
        .any(|m| m.abs() > tol * scale.max(f64::MIN_POSITIVE))
        && scale > 0.0
    {
        return Err(Error::Solvability {
            moments: moments.to_vec(),
            tol,
        });
    }
    Ok(Matching {
        f_b,
        moments,
        trace_flux,
        mismatch,
    })
}
