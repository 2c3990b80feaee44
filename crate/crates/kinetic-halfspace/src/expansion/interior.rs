use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::background::{solvability_residual, EulerSlices, NodeState, SolvabilityReport};
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::euler::Profile;
use crate::grid::VelocityGrid;
use crate::interp::stencil;
use crate::macro_micro::{BurnettFunctions, ProjectionBasis, PseudoInverse};
use crate::state::{maxwellian, maxwellian_on, FluidState};

/// Default bound on the relative solvability residual accepted by [`interior_micro`].
pub const SOLVABILITY_THRESHOLD: f64 = 1e-2;

/// Manufactured first-order macro coefficients `(rho_1, u_1, theta_1)(x_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroProfiles {
    pub rho: Profile,
    pub u: [Profile; 3],
    pub theta: Profile,
}

impl MacroProfiles {
    pub fn zero() -> Self {
        MacroProfiles {
            rho: Profile::Zero,
            u: [Profile::Zero; 3],
            theta: Profile::Zero,
        }
    }

    /// The normal velocity must vanish at the wall.
    pub fn validate(&self, length: f64) -> Result<()> {
        let u3 = self.u[2].eval(0.0, length);
        if u3.abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "first-order normal velocity is {u3:.3e} at the wall"
            )));
        }
        Ok(())
    }

    pub fn coeffs(&self, x: f64, length: f64) -> [f64; 5] {
        [
            self.rho.eval(x, length),
            self.u[0].eval(x, length),
            self.u[1].eval(x, length),
            self.u[2].eval(x, length),
            self.theta.eval(x, length),
        ]
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

/// `[rho_1/rho + u_1.(v-u)/T + theta_1/(2T) (|v-u|^2/T - 3)] sqrt(mu)`: the
/// first variation of `mu` in direction `c = (rho_1, u_1, theta_1)`, divided by `sqrt(mu)`.
pub fn macro_perturbation(state: &FluidState, grid: &VelocityGrid, c: &[f64; 5]) -> Vec<f64> {
    let t = state.temp;
    grid.nodes
        .iter()
        .map(|v| {
            let d = [v[0] - state.u[0], v[1] - state.u[1], v[2] - state.u[2]];
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let poly = c[0] / state.rho
                + (c[1] * d[0] + c[2] * d[1] + c[3] * d[2]) / t
                + c[4] / (2.0 * t) * (d2 / t - 3.0);
            poly * maxwellian(state, v).sqrt()
        })
        .collect()
}

/// `(I - P) (p q / sqrt(mu))`, which equals `L^{-1} [Gamma(p, q) + Gamma(q, p)]`
/// when `p, q` are macroscopic.
pub fn macro_product(
    basis: &ProjectionBasis,
    sqrt_mu: &[f64],
    p: &[f64],
    q: &[f64],
    scale: f64,
) -> Vec<f64> {
    let h: Vec<f64> = (0..p.len())
        .map(|i| {
            if sqrt_mu[i] > 0.0 {
                scale * p[i] * q[i] / sqrt_mu[i]
            } else {
                0.0
            }
        })
        .collect();
    let ph = basis.apply_p(&h);
    h.iter().zip(&ph).map(|(a, b)| a - b).collect()
}

/// `L^{-1} A_{i3}` and `L^{-1} B_3` around the wall state, transported to any
/// other state by the scaling of the power-law kernel:
/// `L_s h(v) = (rho/rho_0) (T/T_0)^{kappa/2} (L_0 h~)(w)`, `w = u_0 + sqrt(T_0/T) (v - u)`.
#[derive(Debug, Clone)]
pub struct BurnettInverse {
    state0: FluidState,
    kappa: f64,
    grid: VelocityGrid,
    /// `L_0^{-1} A_13, L_0^{-1} A_23, L_0^{-1} A_33, L_0^{-1} B_3` divided by `sqrt(mu_0)`.
    psi: [Vec<f64>; 4],
    points: usize,
}

impl BurnettInverse {
    pub fn new(op0: &CollisionOperator, pinv0: &PseudoInverse) -> Self {
        let st = op0.state;
        let grid = &op0.grid;
        let bf = BurnettFunctions::new(&st, grid);
        let rhs = vec![
            bf.a_ij(0, 2).to_vec(),
            bf.a_ij(1, 2).to_vec(),
            bf.a_ij(2, 2).to_vec(),
            bf.b[2].clone(),
        ];
        let sol = pinv0.apply_many(&rhs);
        let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
        let scaled = |f: &Vec<f64>| f.iter().zip(&sm).map(|(a, s)| a / s).collect::<Vec<f64>>();
        BurnettInverse {
            state0: st,
            kappa: op0.model.kappa,
            grid: grid.clone(),
            psi: [
                scaled(&sol[0]),
                scaled(&sol[1]),
                scaled(&sol[2]),
                scaled(&sol[3]),
            ],
            points: 4.min(grid.n_axis),
        }
    }

    /// `L_s^{-1} (I - P_s) [(d_t + v_3 d_3) mu / sqrt(mu)]`
    /// `= sum_i d_3 u_i L_s^{-1} A_i3 + (d_3 T / sqrt T) L_s^{-1} B_3` at the node.
    pub fn apply(&self, node: &NodeState) -> Vec<f64> {
        let s = node.state();
        let s0 = self.state0;
        let coef = [
            node.dx[1],
            node.dx[2],
            node.dx[3],
            node.dx[4] / s.temp.sqrt(),
        ];
        let nv = self.grid.len();
        if coef.iter().all(|&c| c == 0.0) {
            return vec![0.0; nv];
        }
        let amp = (s.rho / s0.rho).sqrt() * (s0.temp / s.temp).powf(0.75);
        let lambda = (s.rho / s0.rho) * (s.temp / s0.temp).powf(0.5 * self.kappa);
        let r = (s0.temp / s.temp).sqrt();
        let n = self.grid.n_axis;
        self.grid
            .nodes
            .par_iter()
            .map(|v| {
                let w = [
                    s0.u[0] + r * (v[0] - s.u[0]),
                    s0.u[1] + r * (v[1] - s.u[1]),
                    s0.u[2] + r * (v[2] - s.u[2]),
                ];
                let Some(st) = stencil(&self.grid, &w, self.points) else {
                    return 0.0;
                };
                let mut acc = 0.0;
                st.for_each(n, |j, wt| {
                    acc += wt
                        * (coef[0] * self.psi[0][j]
                            + coef[1] * self.psi[1][j]
                            + coef[2] * self.psi[2][j]
                            + coef[3] * self.psi[3][j]);
                });
                acc * maxwellian(&s0, &w).sqrt() * amp / lambda
            })
            .collect()
    }
}

/// Micro part of `f_2` at one node.
#[derive(Debug, Clone)]
pub struct InteriorMicro {
    pub f2_perp: Vec<f64>,
    /// `||P T||_{L^2_v}` at the node.
    pub solvability: f64,
}

/// `{I - P} f_2 = L^{-1}[Gamma(f_1, f_1) - (I - P) T]` at one node, with `f_1` macroscopic.
pub fn interior_micro_at(
    node: &NodeState,
    f1: &[f64],
    burnett: &BurnettInverse,
    grid: &VelocityGrid,
) -> Result<InteriorMicro> {
    let s = node.state();
    let basis = ProjectionBasis::new(&s, grid)?;
    let sm: Vec<f64> = maxwellian_on(&s, grid).iter().map(|m| m.sqrt()).collect();
    let quad = macro_product(&basis, &sm, f1, f1, 0.5);
    let tr = burnett.apply(node);
    let mut f2: Vec<f64> = quad.iter().zip(&tr).map(|(a, b)| a - b).collect();
    let pf = basis.apply_p(&f2);
    f2.iter_mut().zip(&pf).for_each(|(a, b)| *a -= b);
    let t = super::background::transport_term(node, grid);
    let pt = basis.apply_p(&t);
    Ok(InteriorMicro {
        f2_perp: f2,
        solvability: grid.norm(&pt),
    })
}

/// Interior micro parts at every Euler cell center.
#[derive(Debug, Clone)]
pub struct InteriorMicroField {
    pub x: Vec<f64>,
    pub f2_perp: Vec<Vec<f64>>,
    pub solvability: SolvabilityReport,
}

/// Nodewise micro closure; fails when the background is not (discretely)
/// an Euler solution, i.e. when the relative residual exceeds `threshold`.
pub fn interior_micro(
    slices: &EulerSlices,
    f1: &MacroProfiles,
    burnett: &BurnettInverse,
    grid: &VelocityGrid,
    threshold: f64,
) -> Result<InteriorMicroField> {
    f1.validate(slices.length())?;
    let solvability = solvability_residual(slices, grid)?;
    if solvability.relative > threshold {
        return Err(Error::Solvability {
            moments: vec![solvability.relative],
            tol: threshold,
        });
    }
    let len = slices.length();
    let f2_perp = slices
        .nodes()
        .iter()
        .map(|node| {
            let f1v = macro_perturbation(&node.state(), grid, &f1.coeffs(node.x, len));
            interior_micro_at(node, &f1v, burnett, grid).map(|m| m.f2_perp)
        })
        .collect::<Result<_>>()?;
    Ok(InteriorMicroField {
        x: slices.nodes().iter().map(|n| n.x).collect(),
        f2_perp,
        solvability,
    })
}
