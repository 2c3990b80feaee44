use serde::{Deserialize, Serialize};

use super::mesh::EtaMesh;
use crate::collision::CollisionOperator;
use crate::error::Result;
use crate::state::{weight_w_on, WeightSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: f64,
    /// `sup_eta (1 + eta)^k ||w_l f(eta)||_inf`.
    pub weighted_sup: f64,
    /// `(int_0^d (1 + eta)^k ||f(eta)||_nu^2 deta)^{1/2}`.
    pub weighted_l2: f64,
    /// Velocity weights the decay estimates use at this `k`
    /// (`l + 4k + 4` for the sup norm, `l + 2k + 2` for the L2 norm).
    pub sup_weight_index: f64,
    pub l2_weight_index: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub l: f64,
    pub rows: Vec<DecayRow>,
    /// `-slope` of `log ||w_l f(eta)||_inf` against `log(1 + eta)` on the fit window.
    pub fitted_exponent: Option<f64>,
    pub fit_window: [f64; 2],
    /// `(eta, ||w_l f(eta)||_inf)` at every mesh node.
    pub profile: Vec<[f64; 2]>,
}

/// Decay table of a nodal field (node-major) on `mesh`.
pub fn decay_report(
    mesh: &EtaMesh,
    field: &[f64],
    op0: &CollisionOperator,
    ws: &WeightSystem,
    ks: &[f64],
    fit_from: f64,
) -> Result<DecayReport> {
    let nv = op0.len();
    let grid = &op0.grid;
    let w = weight_w_on(ws, &op0.state, grid)?;
    let profile: Vec<[f64; 2]> = mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(k, &eta)| {
            let s = field[k * nv..(k + 1) * nv]
                .iter()
                .zip(&w)
                .map(|(f, w)| (f * w).abs())
                .fold(0.0, f64::max);
            [eta, s]
        })
        .collect();
    let nu_norm2: Vec<f64> = (0..mesh.nodes.len())
        .map(|k| {
            let f = &field[k * nv..(k + 1) * nv];
            (0..nv)
                .map(|i| grid.quad_weights[i] * op0.nu[i] * f[i] * f[i])
                .sum()
        })
        .collect();
    let rows = ks
        .iter()
        .map(|&k| {
            let weighted_sup = profile
                .iter()
                .map(|p| (1.0 + p[0]).powf(k) * p[1])
                .fold(0.0, f64::max);
            let mut acc = 0.0;
            for c in 0..mesh.cells() {
                let (a, b) = (mesh.nodes[c], mesh.nodes[c + 1]);
                acc += 0.5
                    * (b - a)
                    * ((1.0 + a).powf(k) * nu_norm2[c] + (1.0 + b).powf(k) * nu_norm2[c + 1]);
            }
            DecayRow {
                k,
                weighted_sup,
                weighted_l2: acc.sqrt(),
                sup_weight_index: ws.l + 4.0 * k + 4.0,
                l2_weight_index: ws.l + 2.0 * k + 2.0,
            }
        })
        .collect();
    let fit_window = [fit_from, mesh.d];
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|p| p[0] >= fit_from && p[1] > 0.0)
        .map(|p| ((1.0 + p[0]).ln(), p[1].ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 3 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| -sxy / sxx)
    } else {
        None
    };
    Ok(DecayReport {
        l: ws.l,
        rows,
        fitted_exponent,
        fit_window,
        profile,
    })
}
