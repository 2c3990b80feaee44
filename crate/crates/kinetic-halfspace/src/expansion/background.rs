use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{init_euler, EulerField, EulerInit, EulerParams, Primitive, Profile};
use crate::grid::VelocityGrid;
use crate::macro_micro::ProjectionBasis;
use crate::state::{maxwellian_on, FluidState};

/// Parity of `(rho, u_1, u_2, u_3, T)` under the wall reflection.
const PARITY: [f64; 5] = [1.0, 1.0, 1.0, -1.0, 1.0];

/// Primitive variables `q = (rho, u_1, u_2, u_3, T)` and their `x_3` and `t`
/// derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub x: f64,
    pub q: [f64; 5],
    pub dx: [f64; 5],
    pub dt: [f64; 5],
}

impl NodeState {
    pub fn state(&self) -> FluidState {
        FluidState {
            rho: self.q[0],
            u: [self.q[1], self.q[2], self.q[3]],
            temp: self.q[4],
        }
    }

    /// A uniform, steady state at `x`.
    pub fn uniform(state: &FluidState, x: f64) -> Self {
        NodeState {
            x,
            q: [state.rho, state.u[0], state.u[1], state.u[2], state.temp],
            dx: [0.0; 5],
            dt: [0.0; 5],
        }
    }

    fn mirrored(&self, about: f64) -> Self {
        let mut m = *self;
        m.x = 2.0 * about - self.x;
        for c in 0..5 {
            m.q[c] *= PARITY[c];
            m.dx[c] *= -PARITY[c];
            m.dt[c] *= PARITY[c];
        }
        m
    }

    fn blend(a: &Self, b: &Self, s: f64) -> Self {
        let mix = |p: &[f64; 5], q: &[f64; 5]| {
            let mut o = [0.0; 5];
            for c in 0..5 {
                o[c] = (1.0 - s) * p[c] + s * q[c];
            }
            o
        };
        NodeState {
            x: (1.0 - s) * a.x + s * b.x,
            q: mix(&a.q, &b.q),
            dx: mix(&a.dx, &b.dx),
            dt: mix(&a.dt, &b.dt),
        }
    }
}

fn prim(p: &Primitive) -> [f64; 5] {
    [p.rho, p.u[0], p.u[1], p.u[2], p.temp]
}

/// Three Euler snapshots at `t - tau, t, t + tau`; derivatives are centered
/// differences (mirror ghosts at the walls).
#[derive(Debug, Clone)]
pub struct EulerSlices {
    pub prev: EulerField,
    pub mid: EulerField,
    pub next: EulerField,
    pub tau: f64,
    nodes: Vec<NodeState>,
}

impl EulerSlices {
    pub fn run(init: &EulerInit, params: EulerParams, t: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && t - tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau <= t, got t = {t}, tau = {tau}"
            )));
        }
        let mut f = init_euler(init, params)?;
        f.solve_to(t - tau)?;
        let prev = f.clone();
        f.solve_to(t)?;
        let mid = f.clone();
        f.solve_to(t + tau)?;
        Self::from_fields(prev, mid, f)
    }

    pub fn from_fields(prev: EulerField, mid: EulerField, next: EulerField) -> Result<Self> {
        let n = mid.cells.len();
        if prev.cells.len() != n
            || next.cells.len() != n
            || prev.length != mid.length
            || next.length != mid.length
        {
            return Err(Error::InvalidParameter(
                "Euler slices live on different meshes".into(),
            ));
        }
        let tau = mid.t - prev.t;
        if !(tau > 0.0) || (next.t - mid.t - tau).abs() > 1e-12 * tau.max(1.0) {
            return Err(Error::InvalidParameter(
                "Euler slices must be equally spaced in time".into(),
            ));
        }
        let dx = mid.dx();
        let q: Vec<[f64; 5]> = mid.cells.iter().map(prim).collect();
        let at = |k: isize| -> [f64; 5] {
            let j = k.clamp(0, n as isize - 1) as usize;
            let mut v = q[j];
            if k < 0 || k >= n as isize {
                for c in 0..5 {
                    v[c] *= PARITY[c];
                }
            }
            v
        };
        let centers = mid.centers();
        let nodes = (0..n)
            .map(|k| {
                let (l, r) = (at(k as isize - 1), at(k as isize + 1));
                let (a, b) = (prim(&prev.cells[k]), prim(&next.cells[k]));
                let mut node = NodeState {
                    x: centers[k],
                    q: q[k],
                    dx: [0.0; 5],
                    dt: [0.0; 5],
                };
                for c in 0..5 {
                    node.dx[c] = (r[c] - l[c]) / (2.0 * dx);
                    node.dt[c] = (b[c] - a[c]) / (2.0 * tau);
                }
                node
            })
            .collect();
        Ok(EulerSlices {
            prev,
            mid,
            next,
            tau,
            nodes,
        })
    }

    /// Multiplies the density of every slice by `1 + p(x)`. The result is not
    /// an Euler solution; it serves as a negative control.
    pub fn with_density_perturbation(&self, p: &Profile) -> Result<Self> {
        let bump = |f: &EulerField| {
            let mut g = f.clone();
            for (c, x) in g.cells.iter_mut().zip(f.centers()) {
                c.rho *= 1.0 + p.eval(x, f.length);
            }
            g
        };
        Self::from_fields(bump(&self.prev), bump(&self.mid), bump(&self.next))
    }

    pub fn t(&self) -> f64 {
        self.mid.t
    }

    pub fn length(&self) -> f64 {
        self.mid.length
    }

    /// Node data at the cell centers.
    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// Linear interpolation of the node data, mirrored across the walls.
    pub fn sample(&self, x: f64) -> NodeState {
        let n = self.nodes.len();
        let len = self.length();
        let x = x.clamp(0.0, len);
        let s = x / self.mid.dx() - 0.5;
        let k = (s.floor() as isize).clamp(-1, n as isize - 1);
        let node = |j: isize| -> NodeState {
            if j < 0 {
                self.nodes[0].mirrored(0.0)
            } else if j >= n as isize {
                self.nodes[n - 1].mirrored(len)
            } else {
                self.nodes[j as usize]
            }
        };
        let mut out = NodeState::blend(&node(k), &node(k + 1), (s - k as f64).clamp(0.0, 1.0));
        out.x = x;
        out
    }

    /// The wall state `x_3 = 0` (exactly `u_3 = 0`).
    pub fn wall(&self) -> NodeState {
        self.sample(0.0)
    }
}

/// `(d_t + v_3 d_3) mu / sqrt(mu)` on the grid.
pub fn transport_term(node: &NodeState, grid: &VelocityGrid) -> Vec<f64> {
    let s = node.state();
    let sm = maxwellian_on(&s, grid);
    let t = s.temp;
    grid.nodes
        .iter()
        .zip(&sm)
        .map(|(v, m)| {
            let c = [v[0] - s.u[0], v[1] - s.u[1], v[2] - s.u[2]];
            let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            let dlog = |d: &[f64; 5]| {
                d[0] / s.rho
                    + (c[0] * d[1] + c[1] * d[2] + c[2] * d[3]) / t
                    + (0.5 * c2 / (t * t) - 1.5 / t) * d[4]
            };
            (dlog(&node.dt) + v[2] * dlog(&node.dx)) * m.sqrt()
        })
        .collect()
}

/// Size of `P[(d_t + v . grad) mu / sqrt(mu)]`, whose vanishing is the Euler system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub cells: usize,
    /// `||P T||` in `L^2(x, v)`.
    pub residual_l2: f64,
    /// `||T||` in `L^2(x, v)`.
    pub transport_l2: f64,
    pub relative: f64,
    /// Largest invariant moment of `T` over the cells.
    pub max_moment: f64,
}

pub fn solvability_residual(
    slices: &EulerSlices,
    grid: &VelocityGrid,
) -> Result<SolvabilityReport> {
    let dx = slices.mid.dx();
    let per: Vec<(f64, f64, f64)> = slices
        .nodes()
        .par_iter()
        .map(|node| -> Result<(f64, f64, f64)> {
            let basis = ProjectionBasis::new(&node.state(), grid)?;
            let t = transport_term(node, grid);
            let pt = basis.apply_p(&t);
            let m = basis
                .chi_moments(&t)
                .iter()
                .fold(0.0_f64, |a, b| a.max(b.abs()));
            Ok((grid.dot(&pt, &pt), grid.dot(&t, &t), m))
        })
        .collect::<Result<_>>()?;
    let r2: f64 = per.iter().map(|p| p.0).sum::<f64>() * dx;
    let t2: f64 = per.iter().map(|p| p.1).sum::<f64>() * dx;
    let residual_l2 = r2.sqrt();
    let transport_l2 = t2.sqrt();
    Ok(SolvabilityReport {
        cells: per.len(),
        residual_l2,
        transport_l2,
        relative: if transport_l2 > 0.0 {
            residual_l2 / transport_l2
        } else {
            0.0
        },
        max_moment: per.iter().map(|p| p.2).fold(0.0, f64::max),
    })
}
