use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::background::{solvability_residual, EulerSlices, SolvabilityReport};
use super::interior::{interior_micro_at, macro_perturbation, BurnettInverse, MacroProfiles};
use super::matching::{knudsen_matching, Matching};
use super::viscous::{LayerProfiles, ViscousLayer};
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::knudsen::{
    solvable_odd_trace, solve_halfspace, KnudsenParams, KnudsenProblem, KnudsenSolution,
    SourceModel,
};
use crate::macro_micro::PseudoInverse;
use crate::state::{global_maxwellian, maxwellian_on, weight_varpi, FluidState, WeightSystem};

/// Which terms to build and where to evaluate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionSpec {
    pub f1: MacroProfiles,
    pub layer: Option<LayerProfiles>,
    /// `beta` of a manufactured odd wall trace (see [`solvable_odd_trace`]);
    /// its specular jump becomes prescribed wall data of size `eps`.
    pub odd_trace: Option<f64>,
    pub knudsen: KnudsenParams,
    pub ws: WeightSystem,
    /// Evaluation window `[0, x_max]`.
    pub x_max: f64,
    pub matching_tol: f64,
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        ExpansionSpec {
            f1: MacroProfiles::zero(),
            layer: None,
            odd_trace: None,
            knudsen: KnudsenParams::default(),
            ws: WeightSystem::default(),
            x_max: 0.5,
            matching_tol: 1e-8,
        }
    }
}

/// All ingredients of the composite field, independent of `eps`.
#[derive(Debug, Clone)]
pub struct ExpansionTerms {
    pub op0: Arc<CollisionOperator>,
    pub slices: EulerSlices,
    pub spec: ExpansionSpec,
    pub burnett: BurnettInverse,
    pub viscous: Option<ViscousLayer>,
    pub matching: Matching,
    /// `None` when the matching datum vanishes (no layer is needed).
    pub knudsen: Option<KnudsenSolution>,
    /// Prescribed `[F(0, v) - F(0, Rv)] / (eps sqrt(mu_0))` on `v_3 > 0`.
    pub wall_jump: Vec<f64>,
}

fn same_state(a: &FluidState, b: &FluidState) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + x.abs());
    close(a.rho, b.rho) && close(a.temp, b.temp) && (0..3).all(|i| close(a.u[i], b.u[i]))
}

impl ExpansionTerms {
    /// `op0` must be assembled at the wall state `slices.wall()`.
    pub fn build(
        op0: Arc<CollisionOperator>,
        slices: EulerSlices,
        spec: &ExpansionSpec,
    ) -> Result<Self> {
        let wall = slices.wall();
        if !same_state(&op0.state, &wall.state()) {
            return Err(Error::InvalidParameter(format!(
                "operator state {:?} differs from the wall state {:?}",
                op0.state,
                wall.state()
            )));
        }
        if !(spec.x_max > 0.0 && spec.x_max <= slices.length()) {
            return Err(Error::InvalidParameter(format!(
                "x_max must lie in (0, {}]",
                slices.length()
            )));
        }
        spec.f1.validate(slices.length())?;
        let grid = &op0.grid;
        let pinv0 = PseudoInverse::new(&op0, 1e12)?;
        let burnett = BurnettInverse::new(&op0, &pinv0);
        let f1_wall = macro_perturbation(&op0.state, grid, &spec.f1.coeffs(0.0, slices.length()));
        let viscous = match spec.layer {
            Some(p) => Some(ViscousLayer::new(&op0, &pinv0, p, &wall, &f1_wall)?),
            None => None,
        };
        let mut trace = f1_wall.clone();
        if let Some(v) = &viscous {
            trace
                .iter_mut()
                .zip(v.f1bar(0.0))
                .for_each(|(a, b)| *a += b);
        }
        let mut wall_jump = vec![0.0; grid.len()];
        if let Some(beta) = spec.odd_trace {
            let odd = solvable_odd_trace(&op0, beta)?;
            for i in 0..grid.len() {
                trace[i] += odd[i];
                if grid.nodes[i][2] > 0.0 {
                    wall_jump[i] = -(odd[i] - odd[grid.reflect_map[i]]);
                }
            }
        }
        let matching = knudsen_matching(&op0, &trace, spec.matching_tol)?;
        let knudsen = if matching.needs_layer() {
            let problem = KnudsenProblem::with_pinv(
                op0.clone(),
                &pinv0,
                SourceModel::Zero,
                matching.f_b.clone(),
                spec.ws,
            )?;
            Some(solve_halfspace(&problem, &spec.knudsen)?)
        } else {
            None
        };
        Ok(ExpansionTerms {
            op0,
            slices,
            spec: spec.clone(),
            burnett,
            viscous,
            matching,
            knudsen,
            wall_jump,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleOptions {
    pub viscous: bool,
    pub knudsen: bool,
    /// Include the micro closures `eps^2 ({I-P} f_2 + {I-P_0} f2bar)`.
    pub second_order: bool,
    /// Mesh nodes per unit `y` inside the viscous layer.
    pub viscous_points: usize,
    pub growth: f64,
    /// Largest mesh width away from the wall.
    pub interior_width: f64,
    pub max_nodes: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            viscous: true,
            knudsen: true,
            second_order: true,
            viscous_points: 16,
            growth: 1.15,
            interior_width: 0.01,
            max_nodes: 20_000,
        }
    }
}

/// Composite field at one `eps`.
#[derive(Debug, Clone)]
pub struct AssembledSolution {
    pub eps: f64,
    pub x: Vec<f64>,
    pub states: Vec<FluidState>,
    /// `(F^eps - mu) / sqrt(mu)` at every node.
    pub deviation: Vec<Vec<f64>>,
    /// `sup_{v_3 > 0} |F(0, v) - F(0, Rv) - eps sqrt(mu_0) jump(v)| / sqrt(mu_0)`.
    pub boundary_defect: f64,
    /// `min F^eps / mu` over the whole velocity grid.
    pub min_ratio: f64,
    /// `min F^eps / mu` over the thermal core `|v - u| <= CORE_RADIUS sqrt(T)`.
    pub min_ratio_core: f64,
}

/// Radius, in thermal units, of the velocity ball on which positivity is asserted.
/// Outside it the `eps^2` micro terms grow polynomially against a Gaussian.
pub const CORE_RADIUS: f64 = 3.0;

impl AssembledSolution {
    /// `||(F - mu)/sqrt(mu)||` in `L^2([0, x_max] x R^3)` (trapezoid in `x`).
    pub fn deviation_l2(&self, op0: &CollisionOperator) -> f64 {
        let g = &op0.grid;
        let n2: Vec<f64> = self.deviation.iter().map(|d| g.dot(d, d)).collect();
        let s: f64 = self
            .x
            .windows(2)
            .zip(n2.windows(2))
            .map(|(x, n)| 0.5 * (x[1] - x[0]) * (n[0] + n[1]))
            .sum();
        s.sqrt()
    }

    /// `sup |varpi_k (F - mu) / sqrt(mu_M)|`.
    pub fn deviation_linf(&self, op0: &CollisionOperator, ws: &WeightSystem) -> f64 {
        let g = &op0.grid;
        let weight: Vec<f64> = g
            .nodes
            .iter()
            .map(|v| weight_varpi(ws, v) / global_maxwellian(ws.t_m, v).sqrt())
            .collect();
        self.states
            .iter()
            .zip(&self.deviation)
            .map(|(s, d)| {
                let sm = maxwellian_on(s, g);
                d.iter()
                    .zip(&sm)
                    .zip(&weight)
                    .map(|((a, m), w)| (a * m.sqrt() * w).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn composite_mesh(
    eps: f64,
    eta_nodes: Option<&[f64]>,
    x_max: f64,
    o: &AssembleOptions,
) -> Result<Vec<f64>> {
    let e2 = eps * eps;
    let target = |x: f64| {
        if x < 10.0 * eps {
            (eps / o.viscous_points.max(1) as f64).min(o.interior_width)
        } else {
            o.interior_width
        }
    };
    let mut x: Vec<f64> = match eta_nodes {
        Some(n) => n.iter().map(|e| e2 * e).collect(),
        None => vec![0.0],
    };
    if let Some(n) = eta_nodes {
        let end = e2 * n[n.len() - 1];
        if end >= x_max {
            return Err(Error::Resolution(format!(
                "Knudsen layer reaches x = {end:.3e}, beyond the window {x_max}"
            )));
        }
        let widest = e2 * n.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if widest > target(0.0) * (1.0 + 1e-9) {
            return Err(Error::Resolution(format!(
                "Knudsen cells of width {widest:.3e} exceed the viscous-layer spacing {:.3e}",
                target(0.0)
            )));
        }
    }
    let mut w = if x.len() >= 2 {
        x[x.len() - 1] - x[x.len() - 2]
    } else {
        0.05 * e2
    };
    loop {
        let last = x[x.len() - 1];
        if last >= x_max - 1e-14 {
            break;
        }
        w = (w * o.growth).min(target(last));
        let next = last + w;
        if next >= x_max || x_max - next < 0.25 * w {
            x.push(x_max);
            break;
        }
        x.push(next);
        if x.len() > o.max_nodes {
            return Err(Error::Resolution(format!(
                "more than {} nodes needed for eps = {eps}",
                o.max_nodes
            )));
        }
    }
    Ok(x)
}

/// Composite field `mu + eps (F_1 + F1bar + F1hat) + eps^2 ({I-P} F_2 + {I-P_0} F2bar)`
/// at the middle Euler slice: interior terms at `x_3`, viscous at `y = x_3/eps`,
/// Knudsen at `eta = x_3/eps^2`.
pub fn assemble(
    eps: f64,
    terms: &ExpansionTerms,
    o: &AssembleOptions,
) -> Result<AssembledSolution> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 0.5], got {eps}"
        )));
    }
    let op0 = &*terms.op0;
    let grid = &op0.grid;
    let nv = grid.len();
    let knudsen = if o.knudsen {
        terms.knudsen.as_ref()
    } else {
        None
    };
    let viscous = if o.viscous {
        terms.viscous.as_ref()
    } else {
        None
    };
    let x = composite_mesh(
        eps,
        knudsen.map(|k| k.mesh.nodes.as_slice()),
        terms.spec.x_max,
        o,
    )?;
    let len = terms.slices.length();
    let sm0: Vec<f64> = op0.sqrt_mu.clone();
    let e2 = eps * eps;
    let nodes: Vec<(FluidState, Vec<f64>, f64, f64)> = x
        .par_iter()
        .map(|&xk| -> Result<(FluidState, Vec<f64>, f64, f64)> {
            let node = terms.slices.sample(xk);
            let s = node.state();
            let smx: Vec<f64> = maxwellian_on(&s, grid).iter().map(|m| m.sqrt()).collect();
            let f1 = macro_perturbation(&s, grid, &terms.spec.f1.coeffs(xk, len));
            let mut dev: Vec<f64> = f1.iter().map(|a| eps * a).collect();
            if o.second_order && !(terms.spec.f1.is_zero() && node.dx.iter().all(|&d| d == 0.0)) {
                let m = interior_micro_at(&node, &f1, &terms.burnett, grid)?;
                dev.iter_mut()
                    .zip(&m.f2_perp)
                    .for_each(|(a, b)| *a += e2 * b);
            }
            let mut layer = vec![0.0; nv];
            if let Some(v) = viscous {
                let sl = v.slice(xk / eps);
                for i in 0..nv {
                    layer[i] += eps * sl.f1bar[i]
                        + if o.second_order {
                            e2 * sl.f2bar_perp[i]
                        } else {
                            0.0
                        };
                }
            }
            if let Some(k) = knudsen {
                let eta = xk / e2;
                if eta <= k.mesh.d {
                    let f = k.field_at(eta);
                    layer.iter_mut().zip(&f).for_each(|(a, b)| *a += eps * b);
                }
            }
            for i in 0..nv {
                if layer[i] != 0.0 && smx[i] > 0.0 {
                    dev[i] += layer[i] * sm0[i] / smx[i];
                }
            }
            let mut min_ratio = f64::INFINITY;
            let mut min_core = f64::INFINITY;
            let r2 = CORE_RADIUS * CORE_RADIUS * s.temp;
            for i in 0..nv {
                if smx[i] > 0.0 {
                    let r = 1.0 + dev[i] / smx[i];
                    min_ratio = min_ratio.min(r);
                    let v = grid.nodes[i];
                    if (0..3).map(|j| (v[j] - s.u[j]).powi(2)).sum::<f64>() <= r2 {
                        min_core = min_core.min(r);
                    }
                }
            }
            Ok((s, dev, min_ratio, min_core))
        })
        .collect::<Result<_>>()?;
    let dev0 = &nodes[0].1;
    let boundary_defect = (0..nv)
        .filter(|&i| grid.nodes[i][2] > 0.0)
        .map(|i| (dev0[i] - dev0[grid.reflect_map[i]] - eps * terms.wall_jump[i]).abs())
        .fold(0.0, f64::max);
    let min_ratio = nodes.iter().map(|n| n.2).fold(f64::INFINITY, f64::min);
    let min_ratio_core = nodes.iter().map(|n| n.3).fold(f64::INFINITY, f64::min);
    let (states, deviation) = nodes.into_iter().map(|(s, d, _, _)| (s, d)).unzip();
    Ok(AssembledSolution {
        eps,
        x,
        states,
        deviation,
        boundary_defect,
        min_ratio,
        min_ratio_core,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub nodes: usize,
    pub deviation_l2: f64,
    pub deviation_linf: f64,
    pub boundary_defect: f64,
    pub min_ratio: f64,
    pub min_ratio_core: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub options: AssembleOptions,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log deviation_l2` against `log eps`.
    pub slope_l2: Option<f64>,
    pub slope_linf: Option<f64>,
    /// Order-one interior residual `P[(d_t + v . grad) mu / sqrt(mu)]` of the background.
    pub solvability: SolvabilityReport,
    pub knudsen_layer: bool,
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than two
/// usable points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Assembles at every `eps` and tabulates the deviation norms and the wall defect.
pub fn residual_sweep(
    terms: &ExpansionTerms,
    eps_list: &[f64],
    o: &AssembleOptions,
) -> Result<SweepTable> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty eps list".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let a = assemble(eps, terms, o)?;
        rows.push(SweepRow {
            eps,
            nodes: a.x.len(),
            deviation_l2: a.deviation_l2(&terms.op0),
            deviation_linf: a.deviation_linf(&terms.op0, &terms.spec.ws),
            boundary_defect: a.boundary_defect,
            min_ratio: a.min_ratio,
            min_ratio_core: a.min_ratio_core,
        });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.deviation_l2).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r.deviation_linf).collect();
    Ok(SweepTable {
        options: *o,
        slope_l2: fit_slope(&eps, &l2),
        slope_linf: fit_slope(&eps, &linf),
        rows,
        solvability: solvability_residual(&terms.slices, &terms.op0.grid)?,
        knudsen_layer: o.knudsen && terms.knudsen.is_some(),
    })
}

/// `eps, nodes, deviation_l2, deviation_linf, boundary_defect, min_ratio, min_ratio_core` rows.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in &table.rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
