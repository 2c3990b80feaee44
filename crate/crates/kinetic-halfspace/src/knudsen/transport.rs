//! Step-characteristic discretization of `delta f + v_3 d_eta f + nu f - K f = g`
//! on an [`EtaMesh`] with damped specular reflection at both ends.
//!
//! Unknowns are nodal values `f_k(v)`. In cell `k` the equation
//! `v_3 (f_{k+1} - f_k) / dk + sigma fbar_k - (K fbar)_k = gbar_k` is closed by
//! `fbar = theta f_in + (1 - theta) f_out` with `theta = 1/tau - 1/(e^tau - 1)`,
//! `tau = sigma dk / |v_3|`, which is exact for a cell-constant right-hand side.
//! The face fluxes `<v_3 chi, f_k>` of the collision invariants are then
//! conserved from cell to cell whenever `delta = 0` and `<chi, g> = 0`.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef};

use super::mesh::EtaMesh;
use crate::collision::CollisionOperator;
use crate::error::Result;
use crate::krylov::{gmres, GmresParams, GmresReport};

/// Penalization `delta` and boundary damping `1 - 1/n` (`n = None` is exact reflection).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub delta: f64,
    pub n: Option<f64>,
}

impl Penalty {
    pub fn exact() -> Self {
        Penalty {
            delta: 0.0,
            n: None,
        }
    }

    pub fn reflectivity(&self) -> f64 {
        self.n.map_or(1.0, |n| 1.0 - 1.0 / n)
    }
}

fn theta_of(tau: f64) -> f64 {
    if tau < 1e-3 {
        0.5 - tau / 12.0 + tau.powi(3) / 720.0
    } else {
        1.0 / tau - 1.0 / tau.exp_m1()
    }
}

/// Per-cell transport coefficients, cell-major (`k * nv + i`).
pub struct Transport<'a> {
    pub op: &'a CollisionOperator,
    pub mesh: &'a EtaMesh,
    pub penalty: Penalty,
    pub nv: usize,
    pairs: Vec<(usize, usize)>,
    decay: Vec<f64>,
    gain: Vec<f64>,
    theta: Vec<f64>,
    sigma: Vec<f64>,
    /// Closure factor of the bounce series for each pair.
    closure: Vec<f64>,
}

impl<'a> Transport<'a> {
    /// `bounce_cap = Some(k0)` truncates the bounce series after
    /// `ceil(k0 |v_3| (1 + |v|^2)^{|kappa|/2})` round trips.
    pub fn new(
        op: &'a CollisionOperator,
        mesh: &'a EtaMesh,
        penalty: Penalty,
        bounce_cap: Option<f64>,
    ) -> Self {
        let nv = op.len();
        let grid = &op.grid;
        let cells = mesh.cells();
        let sigma: Vec<f64> = op.nu.iter().map(|n| n + penalty.delta).collect();
        let mut decay = vec![0.0; cells * nv];
        let mut gain = vec![0.0; cells * nv];
        let mut theta = vec![0.0; cells * nv];
        for k in 0..cells {
            let dk = mesh.width(k);
            for i in 0..nv {
                let tau = sigma[i] * dk / grid.nodes[i][2].abs();
                decay[k * nv + i] = (-tau).exp();
                gain[k * nv + i] = -(-tau).exp_m1() / sigma[i];
                theta[k * nv + i] = theta_of(tau);
            }
        }
        let rho = penalty.reflectivity();
        let mut pairs = Vec::with_capacity(nv / 2);
        let mut closure = Vec::with_capacity(nv / 2);
        for i in 0..nv {
            if grid.nodes[i][2] <= 0.0 {
                continue;
            }
            let j = grid.reflect_map[i];
            let tau_i: f64 =
                (0..cells).map(|k| sigma[i] * mesh.width(k)).sum::<f64>() / grid.nodes[i][2].abs();
            let tau_j: f64 =
                (0..cells).map(|k| sigma[j] * mesh.width(k)).sum::<f64>() / grid.nodes[j][2].abs();
            let c = rho * rho * (-(tau_i + tau_j)).exp();
            let full = 1.0 / (1.0 - c);
            let factor = match bounce_cap {
                None => full,
                Some(k0) => {
                    let v = grid.nodes[i];
                    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                    let cap = (k0 * v[2].abs() * (1.0 + r2).powf(0.5 * op.model.kappa.abs()))
                        .ceil()
                        .max(1.0);
                    (1.0 - c.powf(cap)) * full
                }
            };
            pairs.push((i, j));
            closure.push(factor);
        }
        Transport {
            op,
            mesh,
            penalty,
            nv,
            pairs,
            decay,
            gain,
            theta,
            sigma,
            closure,
        }
    }

    pub fn cells(&self) -> usize {
        self.mesh.cells()
    }

    pub fn theta(&self, k: usize, i: usize) -> f64 {
        self.theta[k * self.nv + i]
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.sigma[i]
    }

    /// Cell averages `(gbar)` from nodal values.
    pub fn node_average(&self, g_nodes: &[f64]) -> Vec<f64> {
        let nv = self.nv;
        (0..self.cells() * nv)
            .map(|x| 0.5 * (g_nodes[x] + g_nodes[x + nv]))
            .collect()
    }

    /// Transport solve with cell source `q`: writes cell averages and,
    /// optionally, nodal values.
    pub fn sweep(&self, q: &[f64], avg: &mut [f64], mut nodes: Option<&mut [f64]>) {
        let nv = self.nv;
        let cells = self.cells();
        let rho = self.penalty.reflectivity();
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            // Response to a zero wall value, up then down.
            let mut bu = 0.0;
            for k in 0..cells {
                let x = k * nv + i;
                bu = self.decay[x] * bu + self.gain[x] * q[x];
            }
            let (mut bd, mut ad) = (0.0, 1.0);
            for k in (0..cells).rev() {
                let x = k * nv + j;
                bd = self.decay[x] * bd + self.gain[x] * q[x];
                ad *= self.decay[x];
            }
            let wall = (rho * rho * ad * bu + rho * bd) * self.closure[p];
            let mut f = wall;
            if let Some(n) = nodes.as_deref_mut() {
                n[i] = f;
            }
            for k in 0..cells {
                let x = k * nv + i;
                let out = self.decay[x] * f + self.gain[x] * q[x];
                avg[x] = self.theta[x] * f + (1.0 - self.theta[x]) * out;
                f = out;
                if let Some(n) = nodes.as_deref_mut() {
                    n[(k + 1) * nv + i] = f;
                }
            }
            f *= rho;
            if let Some(n) = nodes.as_deref_mut() {
                n[cells * nv + j] = f;
            }
            for k in (0..cells).rev() {
                let x = k * nv + j;
                let out = self.decay[x] * f + self.gain[x] * q[x];
                avg[x] = self.theta[x] * f + (1.0 - self.theta[x]) * out;
                f = out;
                if let Some(n) = nodes.as_deref_mut() {
                    n[k * nv + j] = f;
                }
            }
        }
    }

    /// `(K fbar_k)` for every cell at once.
    pub fn apply_k(&self, f: &[f64]) -> Vec<f64> {
        let nv = self.nv;
        let rows = f.len() / nv;
        let mut out = vec![0.0; f.len()];
        let fm = MatRef::from_row_major_slice(f, rows, nv);
        let om = MatMut::from_row_major_slice_mut(&mut out, rows, nv);
        matmul(
            om,
            Accum::Replace,
            fm,
            self.op.k.transpose(),
            1.0,
            faer::get_global_parallelism(),
        );
        out
    }

    /// One lagged fixed-point step `S(gbar + K fbar)`.
    pub fn fixed_point(&self, gbar: &[f64], fbar: &[f64], nodes: Option<&mut [f64]>) -> Vec<f64> {
        let mut q = self.apply_k(fbar);
        q.iter_mut().zip(gbar).for_each(|(a, b)| *a += b);
        let mut avg = vec![0.0; q.len()];
        self.sweep(&q, &mut avg, nodes);
        avg
    }

    /// Solves `(I - S K) fbar = S gbar` by GMRES; returns nodal values.
    pub fn solve_krylov(
        &self,
        gbar: &[f64],
        warm: Option<&[f64]>,
        params: GmresParams,
    ) -> Result<(Vec<f64>, Vec<f64>, GmresReport)> {
        let n = gbar.len();
        let mut rhs = vec![0.0; n];
        self.sweep(gbar, &mut rhs, None);
        let mut x = warm.map_or_else(|| rhs.clone(), |w| w.to_vec());
        let apply = |v: &[f64]| {
            let kv = self.apply_k(v);
            let mut s = vec![0.0; n];
            self.sweep(&kv, &mut s, None);
            v.iter().zip(&s).map(|(a, b)| a - b).collect::<Vec<f64>>()
        };
        let report = gmres(apply, &rhs, &mut x, params)?;
        let mut nodes = vec![0.0; n + self.nv];
        let avg = self.fixed_point(gbar, &x, Some(&mut nodes));
        Ok((nodes, avg, report))
    }

    /// Plain lagged iteration until the `w`-weighted sup of the update is
    /// below `tol`.
    pub fn solve_picard(
        &self,
        gbar: &[f64],
        w: &[f64],
        warm: Option<&[f64]>,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, usize, f64)> {
        let n = gbar.len();
        let nv = self.nv;
        let mut x = warm.map_or_else(|| vec![0.0; n], |v| v.to_vec());
        let mut last = f64::INFINITY;
        for it in 1..=max_iter {
            let next = self.fixed_point(gbar, &x, None);
            last = next
                .iter()
                .zip(&x)
                .enumerate()
                .map(|(p, (a, b))| w[p % nv] * (a - b).abs())
                .fold(0.0, f64::max);
            x = next;
            if last <= tol {
                let mut nodes = vec![0.0; n + nv];
                let avg = self.fixed_point(gbar, &x, Some(&mut nodes));
                return Ok((nodes, avg, it, last));
            }
        }
        Err(crate::error::Error::NoConvergence {
            iterations: max_iter,
            last,
        })
    }

    /// Cell averages implied by nodal values.
    pub fn averages_from_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        let nv = self.nv;
        let grid = &self.op.grid;
        let mut avg = vec![0.0; self.cells() * nv];
        for k in 0..self.cells() {
            for i in 0..nv {
                let x = k * nv + i;
                let (fin, fout) = if grid.nodes[i][2] > 0.0 {
                    (nodes[x], nodes[x + nv])
                } else {
                    (nodes[x + nv], nodes[x])
                };
                avg[x] = self.theta[x] * fin + (1.0 - self.theta[x]) * fout;
            }
        }
        avg
    }

    /// Sup of the cell residuals and of the boundary-row residuals.
    pub fn residual(&self, nodes: &[f64], gbar: &[f64]) -> (f64, f64) {
        let nv = self.nv;
        let grid = &self.op.grid;
        let avg = self.averages_from_nodes(nodes);
        let kf = self.apply_k(&avg);
        let mut cell: f64 = 0.0;
        for k in 0..self.cells() {
            let dk = self.mesh.width(k);
            for i in 0..nv {
                let x = k * nv + i;
                let r = grid.nodes[i][2] * (nodes[x + nv] - nodes[x]) / dk + self.sigma[i] * avg[x]
                    - kf[x]
                    - gbar[x];
                cell = cell.max(r.abs());
            }
        }
        let rho = self.penalty.reflectivity();
        let last = self.cells() * nv;
        let mut wall: f64 = 0.0;
        for i in 0..nv {
            let j = grid.reflect_map[i];
            let r = if grid.nodes[i][2] > 0.0 {
                nodes[i] - rho * nodes[j]
            } else {
                nodes[last + i] - rho * nodes[last + j]
            };
            wall = wall.max(r.abs());
        }
        (cell, wall)
    }
}
