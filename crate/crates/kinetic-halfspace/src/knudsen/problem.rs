use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::shift::ShiftSystem;
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::macro_micro::{BurnettFunctions, PseudoInverse};
use crate::quadrature::{smoothstep, smoothstep_prime};
use crate::state::{maxwellian_on, WeightSystem};

/// Analytic or tabulated source `S(eta, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceModel {
    Zero,
    /// `(1 + eta)^{-q} (a31 A_31 + b3 B_3 + a33 A_33)`.
    Algebraic {
        q: f64,
        a31: f64,
        b3: f64,
        a33: f64,
    },
    /// Rows of `S` at increasing `eta`, linear in between, zero beyond the last row.
    Tabulated {
        eta: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

/// Boundary cut-off `Upsilon`: one on `[0, 1]`, zero on `[2, inf)`.
pub fn upsilon(eta: f64) -> f64 {
    1.0 - smoothstep(eta - 1.0)
}

pub fn upsilon_prime(eta: f64) -> f64 {
    -smoothstep_prime(eta - 1.0)
}

/// The half-space problem `v_3 d_eta f + L_0 f = S` with specular reflection
/// and boundary datum `f_b`.
#[derive(Clone)]
pub struct KnudsenProblem {
    pub op0: Arc<CollisionOperator>,
    pub source: SourceModel,
    /// Boundary datum, supported on `v_3 < 0`.
    pub f_b: Vec<f64>,
    pub ws: WeightSystem,
    pub shift: Arc<ShiftSystem>,
    burnett: [Vec<f64>; 3],
    l0_fb: Vec<f64>,
}

impl std::fmt::Debug for KnudsenProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KnudsenProblem")
            .field("nv", &self.op0.len())
            .field("source", &self.source)
            .field("ws", &self.ws)
            .finish()
    }
}

/// Tolerance of the solvability checks, relative to the data size.
pub const SOLVABILITY_TOL: f64 = 1e-8;

impl KnudsenProblem {
    /// Factorizes the pseudo-inverse needed by the constraint shift.
    pub fn new(
        op0: Arc<CollisionOperator>,
        source: SourceModel,
        f_b: Vec<f64>,
        ws: WeightSystem,
    ) -> Result<Self> {
        let pinv = PseudoInverse::new(&op0, 1e12)?;
        Self::with_pinv(op0, &pinv, source, f_b, ws)
    }

    pub fn with_pinv(
        op0: Arc<CollisionOperator>,
        pinv: &PseudoInverse,
        source: SourceModel,
        f_b: Vec<f64>,
        ws: WeightSystem,
    ) -> Result<Self> {
        ws.validate()?;
        let grid = &op0.grid;
        if f_b.len() != grid.len() {
            return Err(Error::InvalidParameter(
                "f_b length differs from the grid".into(),
            ));
        }
        if let Some(i) = (0..grid.len()).find(|&i| grid.nodes[i][2] > 0.0 && f_b[i] != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "f_b must vanish for v3 > 0 (node {i})"
            )));
        }
        if op0.state.u[2] != 0.0 {
            return Err(Error::InvalidParameter(
                "boundary state needs u3 = 0".into(),
            ));
        }
        let bf = BurnettFunctions::new(&op0.state, grid);
        let burnett = [
            bf.a_ij(2, 0).to_vec(),
            bf.b[2].clone(),
            bf.a_ij(2, 2).to_vec(),
        ];
        if let SourceModel::Tabulated { eta, values } = &source {
            if eta.len() != values.len()
                || eta.is_empty()
                || values.iter().any(|r| r.len() != grid.len())
            {
                return Err(Error::InvalidParameter(
                    "tabulated source has inconsistent shape".into(),
                ));
            }
            if eta.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(
                    "tabulated source eta must increase".into(),
                ));
            }
        }
        let l0_fb = op0.apply_l(&f_b);
        let shift = Arc::new(ShiftSystem::new(&op0, pinv)?);
        let p = KnudsenProblem {
            op0,
            source,
            f_b,
            ws,
            shift,
            burnett,
            l0_fb,
        };
        p.check_solvability()?;
        Ok(p)
    }

    pub fn nv(&self) -> usize {
        self.op0.len()
    }

    /// `(1, v_1 - u_1, v_2 - u_2, |v - u|^2) sqrt(mu_0)`.
    fn solvability_vectors(&self) -> Vec<Vec<f64>> {
        let st = self.op0.state;
        let grid = &self.op0.grid;
        let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
        let mut out = vec![Vec::with_capacity(grid.len()); 4];
        for (v, s) in grid.nodes.iter().zip(&sm) {
            let d = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
            out[0].push(*s);
            out[1].push(d[0] * s);
            out[2].push(d[1] * s);
            out[3].push((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * s);
        }
        out
    }

    /// Moments of `S` at `eta` and the `v_3`-weighted moments of `f_b`.
    pub fn solvability_moments(&self, eta: f64) -> ([f64; 4], [f64; 4]) {
        let grid = &self.op0.grid;
        let vecs = self.solvability_vectors();
        let s = self.source_at(eta);
        let v3fb: Vec<f64> = self
            .f_b
            .iter()
            .zip(&grid.nodes)
            .map(|(f, v)| v[2] * f)
            .collect();
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        for k in 0..4 {
            a[k] = grid.dot(&vecs[k], &s);
            b[k] = grid.dot(&vecs[k], &v3fb);
        }
        (a, b)
    }

    fn check_solvability(&self) -> Result<()> {
        let grid = &self.op0.grid;
        let etas: Vec<f64> = match &self.source {
            SourceModel::Tabulated { eta, .. } => eta.clone(),
            _ => vec![0.0],
        };
        let mut bad = Vec::new();
        for &e in &etas {
            let (a, b) = self.solvability_moments(e);
            let s = self.source_at(e);
            let scale_s = grid.norm(&s).max(1e-300);
            let scale_b = grid.norm(&self.f_b).max(1e-300);
            if a.iter().any(|m| m.abs() > SOLVABILITY_TOL * scale_s) {
                bad.extend_from_slice(&a);
            }
            if b.iter().any(|m| m.abs() > SOLVABILITY_TOL * scale_b) {
                bad.extend_from_slice(&b);
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Solvability {
                moments: bad,
                tol: SOLVABILITY_TOL,
            })
        }
    }

    pub fn source_at(&self, eta: f64) -> Vec<f64> {
        let nv = self.nv();
        match &self.source {
            SourceModel::Zero => vec![0.0; nv],
            SourceModel::Algebraic { q, a31, b3, a33 } => {
                let s = (1.0 + eta).powf(-q);
                (0..nv)
                    .map(|i| {
                        s * (a31 * self.burnett[0][i]
                            + b3 * self.burnett[1][i]
                            + a33 * self.burnett[2][i])
                    })
                    .collect()
            }
            SourceModel::Tabulated { eta: es, values } => {
                if eta > *es.last().unwrap() {
                    return vec![0.0; nv];
                }
                if eta <= es[0] {
                    return values[0].clone();
                }
                let k = es.partition_point(|&x| x <= eta) - 1;
                let t = (eta - es[k]) / (es[k + 1] - es[k]);
                values[k]
                    .iter()
                    .zip(&values[k + 1])
                    .map(|(a, b)| (1.0 - t) * a + t * b)
                    .collect()
            }
        }
    }

    /// `g = S - v_3 Upsilon' f_b - Upsilon L_0 f_b` at `eta`.
    pub fn lifted_source(&self, eta: f64) -> Vec<f64> {
        let mut g = self.source_at(eta);
        let (u, up) = (upsilon(eta), upsilon_prime(eta));
        if u != 0.0 || up != 0.0 {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi -= self.op0.grid.nodes[i][2] * up * self.f_b[i] + u * self.l0_fb[i];
            }
        }
        g
    }

    pub fn has_zero_data(&self) -> bool {
        matches!(self.source, SourceModel::Zero) && self.f_b.iter().all(|&x| x == 0.0)
    }
}

/// `f_b(v) = t(Rv) - t(v)` on `v_3 < 0`, zero elsewhere: the datum for which
/// the specular jump of the layer cancels that of the trace `t`.
pub fn datum_from_trace(op0: &CollisionOperator, t: &[f64]) -> Vec<f64> {
    let g = &op0.grid;
    (0..g.len())
        .map(|i| {
            if g.nodes[i][2] < 0.0 {
                t[g.reflect_map[i]] - t[i]
            } else {
                0.0
            }
        })
        .collect()
}

/// Odd trace `v_3 (alpha + beta v_3^2 + gamma |v - u|^2 + a_1 (v_1 - u_1) + a_2 (v_2 - u_2)) sqrt(mu_0)`
/// with `alpha, gamma, a_1, a_2` chosen on the grid so that the datum of
/// [`datum_from_trace`] has vanishing mass, tangential momentum and energy fluxes.
pub fn solvable_odd_trace(op0: &CollisionOperator, beta: f64) -> Result<Vec<f64>> {
    let st = op0.state;
    let grid = &op0.grid;
    let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
    let rel = |v: &[f64; 3]| [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
    // c = (alpha, beta, gamma, a_1, a_2)
    let shape = |c: [f64; 5]| -> Vec<f64> {
        grid.nodes
            .iter()
            .zip(&sm)
            .map(|(v, s)| {
                let d = rel(v);
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                d[2] * (c[0] + c[1] * d[2] * d[2] + c[2] * r2 + c[3] * d[0] + c[4] * d[1]) * s
            })
            .collect()
    };
    // Fluxes of the datum against (1, v_1 - u_1, v_2 - u_2, |v - u|^2) sqrt(mu), linear in c.
    let flux = |t: &[f64]| -> [f64; 4] {
        let fb = datum_from_trace(op0, t);
        let mut m = [0.0; 4];
        for i in 0..grid.len() {
            let d = rel(&grid.nodes[i]);
            let w = grid.quad_weights[i] * grid.nodes[i][2] * fb[i] * sm[i];
            m[0] += w;
            m[1] += w * d[0];
            m[2] += w * d[1];
            m[3] += w * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        }
        m
    };
    let unit = |k: usize| {
        let mut c = [0.0; 5];
        c[k] = 1.0;
        flux(&shape(c))
    };
    let free = [0usize, 2, 3, 4];
    let cols: Vec<[f64; 4]> = free.iter().map(|&k| unit(k)).collect();
    let fbeta = unit(1);
    let m = Mat::from_fn(4, 4, |i, j| cols[j][i]);
    let det = m.determinant();
    if !(det.abs() > 1e-14) {
        return Err(Error::Singular("odd-trace solvability system".into()));
    }
    let mut rhs = Mat::from_fn(4, 1, |i, _| -beta * fbeta[i]);
    m.partial_piv_lu().solve_in_place(rhs.as_mut());
    Ok(shape([
        rhs[(0, 0)],
        beta,
        rhs[(1, 0)],
        rhs[(2, 0)],
        rhs[(3, 0)],
    ]))
}
