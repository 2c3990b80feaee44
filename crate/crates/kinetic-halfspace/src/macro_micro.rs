//! Collision invariants, macro/micro projections, Burnett functions, the
//! constrained pseudo-inverse of `L` and the transport coefficients.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::state::{maxwellian_on, FluidState};

/// Orthonormal collision invariants
/// `chi_0 = sqrt(mu/rho)`, `chi_i = (v_i - u_i) sqrt(mu/(rho T))`,
/// `chi_4 = (|v - u|^2/T - 3) sqrt(mu/(6 rho))`.
pub fn invariant_vectors(state: &FluidState, grid: &VelocityGrid) -> Vec<Vec<f64>> {
    let sm: Vec<f64> = maxwellian_on(state, grid)
        .iter()
        .map(|m| m.sqrt())
        .collect();
    let (rho, t) = (state.rho, state.temp);
    let mut out = vec![Vec::with_capacity(grid.len()); 5];
    for (v, s) in grid.nodes.iter().zip(&sm) {
        let d = [v[0] - state.u[0], v[1] - state.u[1], v[2] - state.u[2]];
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        out[0].push(s / rho.sqrt());
        for k in 0..3 {
            out[k + 1].push(d[k] * s / (rho * t).sqrt());
        }
        out[4].push((d2 / t - 3.0) * s / (6.0 * rho).sqrt());
    }
    out
}

/// Macroscopic coordinates: `P h = [a + b.(v - u) + c(|v - u|^2 - 3T)] sqrt(mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroCoeffs {
    pub a: f64,
    pub b: [f64; 3],
    pub c: f64,
}

impl MacroCoeffs {
    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b[0], self.b[1], self.b[2], self.c]
    }
}

/// Null-space basis of `L` around one state.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    pub state: FluidState,
    /// Orthonormal (analytically) invariants `chi_0..chi_4`.
    pub chi: Vec<Vec<f64>>,
    /// Gram matrix of `chi` under grid quadrature.
    pub gram: [[f64; 5]; 5],
    /// Macroscopic polynomials `(1, v - u, |v - u|^2 - 3T) sqrt(mu)`.
    pub phi: Vec<Vec<f64>>,
    phi_gram_inv: [[f64; 5]; 5],
    chi_gram_inv: [[f64; 5]; 5],
    weights: Vec<f64>,
}

impl ProjectionBasis {
    pub fn new(state: &FluidState, grid: &VelocityGrid) -> Result<Self> {
        state.validate()?;
        let chi = invariant_vectors(state, grid);
        let sm: Vec<f64> = maxwellian_on(state, grid)
            .iter()
            .map(|m| m.sqrt())
            .collect();
        let mut phi = vec![Vec::with_capacity(grid.len()); 5];
        for (v, s) in grid.nodes.iter().zip(&sm) {
            let d = [v[0] - state.u[0], v[1] - state.u[1], v[2] - state.u[2]];
            phi[0].push(*s);
            for k in 0..3 {
                phi[k + 1].push(d[k] * s);
            }
            phi[4].push((d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - 3.0 * state.temp) * s);
        }
        let gram_of = |b: &[Vec<f64>]| {
            let mut g = [[0.0; 5]; 5];
            for i in 0..5 {
                for j in 0..5 {
                    g[i][j] = grid.dot(&b[i], &b[j]);
                }
            }
            g
        };
        let gram = gram_of(&chi);
        let chi_gram_inv = invert5(&gram)?;
        let phi_gram_inv = invert5(&gram_of(&phi))?;
        Ok(ProjectionBasis {
            state: *state,
            chi,
            gram,
            phi,
            phi_gram_inv,
            chi_gram_inv,
            weights: grid.quad_weights.clone(),
        })
    }

    fn moments(&self, basis: &[Vec<f64>], h: &[f64]) -> [f64; 5] {
        let mut m = [0.0; 5];
        for (k, b) in basis.iter().enumerate() {
            m[k] = b
                .iter()
                .zip(h)
                .zip(&self.weights)
                .map(|((x, y), w)| x * y * w)
                .sum();
        }
        m
    }

    /// Quadrature moments `<h, chi_k>`.
    pub fn chi_moments(&self, h: &[f64]) -> [f64; 5] {
        self.moments(&self.chi, h)
    }

    /// `(a, b, c)` of `P h`.
    pub fn macro_coeffs(&self, h: &[f64]) -> MacroCoeffs {
        let m = self.moments(&self.phi, h);
        let c = mul5(&self.phi_gram_inv, &m);
        MacroCoeffs {
            a: c[0],
            b: [c[1], c[2], c[3]],
            c: c[4],
        }
    }

    /// `sum_k coeff_k phi_k`.
    pub fn macro_field(&self, c: &MacroCoeffs) -> Vec<f64> {
        let a = c.as_array();
        (0..self.weights.len())
            .map(|i| (0..5).map(|k| a[k] * self.phi[k][i]).sum())
            .collect()
    }

    /// `P h` with the Gram correction.
    pub fn apply_p(&self, h: &[f64]) -> Vec<f64> {
        let m = self.chi_moments(h);
        let c = mul5(&self.chi_gram_inv, &m);
        (0..h.len())
            .map(|i| (0..5).map(|k| c[k] * self.chi[k][i]).sum())
            .collect()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                e = e.max((self.gram[i][j] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        e
    }
}

/// Returns `(P h, h - P h)`.
pub fn project(basis: &ProjectionBasis, h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ph = basis.apply_p(h);
    let perp = h.iter().zip(&ph).map(|(a, b)| a - b).collect();
    (ph, perp)
}

fn mul5(a: &[[f64; 5]; 5], x: &[f64; 5]) -> [f64; 5] {
    let mut y = [0.0; 5];
    for i in 0..5 {
        y[i] = (0..5).map(|j| a[i][j] * x[j]).sum();
    }
    y
}

fn invert5(g: &[[f64; 5]; 5]) -> Result<[[f64; 5]; 5]> {
    let m = Mat::from_fn(5, 5, |i, j| g[i][j]);
    let lu = m.partial_piv_lu();
    let mut inv = Mat::<f64>::identity(5, 5);
    lu.solve_in_place(inv.as_mut());
    let mut out = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            out[i][j] = inv[(i, j)];
            if !out[i][j].is_finite() {
                return Err(Error::Singular("Gram matrix of the invariants".into()));
            }
        }
    }
    Ok(out)
}

/// Burnett functions around one state. `a` is ordered `11, 12, 13, 22, 23, 33`.
#[derive(Debug, Clone)]
pub struct BurnettFunctions {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl BurnettFunctions {
    pub fn new(state: &FluidState, grid: &VelocityGrid) -> Self {
        let sm: Vec<f64> = maxwellian_on(state, grid)
            .iter()
            .map(|m| m.sqrt())
            .collect();
        let t = state.temp;
        let mut a = vec![Vec::with_capacity(grid.len()); 6];
        let mut b = vec![Vec::with_capacity(grid.len()); 3];
        for (v, s) in grid.nodes.iter().zip(&sm) {
            let d = [v[0] - state.u[0], v[1] - state.u[1], v[2] - state.u[2]];
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let mut k = 0;
            for i in 0..3 {
                for j in i..3 {
                    let delta = if i == j { d2 / (3.0 * t) } else { 0.0 };
                    a[k].push((d[i] * d[j] / t - delta) * s);
                    k += 1;
                }
            }
            for i in 0..3 {
                b[i].push(d[i] / (2.0 * t.sqrt()) * (d2 / t - 5.0) * s);
            }
        }
        BurnettFunctions { a, b }
    }

    /// `A_ij` for any `i, j` in `0..3`.
    pub fn a_ij(&self, i: usize, j: usize) -> &[f64] {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = match (i, j) {
            (0, 0) => 0,
            (0, 1) => 1,
            (0, 2) => 2,
            (1, 1) => 3,
            (1, 2) => 4,
            _ => 5,
        };
        &self.a[k]
    }
}

/// Factorized augmented system `[[L, X], [X^T, 0]]` with `X` the invariants.
pub struct PseudoInverse {
    lu: PartialPivLu<f64>,
    basis: ProjectionBasis,
    n: usize,
    /// Hager estimate of the 1-norm condition number.
    pub condition: f64,
    op_nu: Vec<f64>,
    op_k: Mat<f64>,
}

/// Result of one pseudo-inverse solve.
#[derive(Debug, Clone)]
pub struct PinvSolution {
    pub f: Vec<f64>,
    /// Norm of `P g` removed before solving.
    pub removed: f64,
    /// `||L f - (I - P) g||_2`.
    pub residual: f64,
}

impl PseudoInverse {
    /// Factorizes; fails when the condition estimate exceeds `max_condition`.
    pub fn new(op: &CollisionOperator, max_condition: f64) -> Result<Self> {
        let n = op.len();
        let basis = ProjectionBasis::new(&op.state, &op.grid)?;
        let q = crate::collision::orthonormal_columns(&basis.chi);
        let m = n + q.len();
        let aug = Mat::from_fn(m, m, |i, j| {
            if i < n && j < n {
                if i == j {
                    op.nu[i] - op.k[(i, j)]
                } else {
                    -op.k[(i, j)]
                }
            } else if i < n {
                q[j - n][i]
            } else if j < n {
                q[i - n][j]
            } else {
                0.0
            }
        });
        let norm1 = (0..m)
            .map(|j| (0..m).map(|i| aug[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let lu = aug.partial_piv_lu();
        let inv_norm = hager_inverse_norm(&lu, m);
        let condition = norm1 * inv_norm;
        if !(condition.is_finite() && condition <= max_condition) {
            return Err(Error::IllConditioned(condition));
        }
        Ok(PseudoInverse {
            lu,
            basis,
            n,
            condition,
            op_nu: op.nu.clone(),
            op_k: op.k.clone(),
        })
    }

    pub fn basis(&self) -> &ProjectionBasis {
        &self.basis
    }

    /// Solves `L f = (I - P) g`, `P f = 0`.
    pub fn solve(&self, g: &[f64]) -> PinvSolution {
        let (pg, gp) = project(&self.basis, g);
        let removed = pg.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rhs = Mat::<f64>::zeros(self.lu_dim(), 1);
        for i in 0..self.n {
            rhs[(i, 0)] = gp[i];
        }
        self.lu.solve_in_place(rhs.as_mut());
        let mut f: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)]).collect();
        // The multiplier block is zero for consistent data; strip residual null components.
        let pf = self.basis.apply_p(&f);
        f.iter_mut().zip(&pf).for_each(|(a, b)| *a -= b);
        let kf = crate::collision::matvec(&self.op_k, &f);
        let residual = (0..self.n)
            .map(|i| (self.op_nu[i] * f[i] - kf[i] - gp[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        PinvSolution {
            f,
            removed,
            residual,
        }
    }

    /// Shorthand returning only `L^{-1} g`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.solve(g).f
    }

    /// Solves for many right-hand sides (columns) at once; no diagnostics.
    pub fn apply_many(&self, gs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let m = self.lu_dim();
        let mut rhs = Mat::<f64>::zeros(m, gs.len());
        for (c, g) in gs.iter().enumerate() {
            let gp = project(&self.basis, g).1;
            for i in 0..self.n {
                rhs[(i, c)] = gp[i];
            }
        }
        self.lu.solve_in_place(rhs.as_mut());
        (0..gs.len())
            .map(|c| {
                let mut f: Vec<f64> = (0..self.n).map(|i| rhs[(i, c)]).collect();
                let pf = self.basis.apply_p(&f);
                f.iter_mut().zip(&pf).for_each(|(a, b)| *a -= b);
                f
            })
            .collect()
    }

    fn lu_dim(&self) -> usize {
        self.n + 5
    }
}

/// Hager's estimator of `||A^{-1}||_1` (the augmented matrix is symmetric).
fn hager_inverse_norm(lu: &PartialPivLu<f64>, m: usize) -> f64 {
    let mut x = Mat::<f64>::from_fn(m, 1, |_, _| 1.0 / m as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let mut y = x.clone();
        lu.solve_in_place(y.as_mut());
        est = (0..m).map(|i| y[(i, 0)].abs()).sum::<f64>();
        let mut z = Mat::<f64>::from_fn(m, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        lu.solve_in_place(z.as_mut());
        let (jmax, zmax) =
            (0..m)
                .map(|i| (i, z[(i, 0)].abs()))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = (0..m).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::<f64>::zeros(m, 1);
        x[(jmax, 0)] = 1.0;
    }
    est
}

/// `mu(T0)`, `kappa(T0)` and the identities they satisfy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCoefficients {
    pub mu_t: f64,
    pub kappa_t: f64,
    /// `T0 <A_33, L^{-1} A_33>`.
    pub a33_form: f64,
    /// `|T0 <A_33, L^{-1} A_33> - 4/3 mu| / mu`.
    pub identity_43_residual: f64,
    /// `|<A_12, L^{-1} A_12> - <A_31, L^{-1} A_31>| / <A_31, L^{-1} A_31>`.
    pub isotropy_residual: f64,
    /// Spread of `<B_i, L^{-1} B_i>` over `i`, relative.
    pub heat_isotropy_residual: f64,
}

/// Transport coefficients around the state of `pinv`'s operator.
pub fn transport_coefficients(
    pinv: &PseudoInverse,
    grid: &VelocityGrid,
) -> Result<TransportCoefficients> {
    let st = pinv.basis.state;
    let bf = BurnettFunctions::new(&st, grid);
    let rhs = vec![
        bf.a_ij(2, 0).to_vec(),
        bf.a_ij(0, 1).to_vec(),
        bf.a_ij(2, 2).to_vec(),
        bf.b[0].clone(),
        bf.b[1].clone(),
        bf.b[2].clone(),
    ];
    let sol = pinv.apply_many(&rhs);
    let form = |k: usize| grid.dot(&rhs[k], &sol[k]);
    let a31 = form(0);
    let a12 = form(1);
    let a33 = form(2);
    let bs = [form(3), form(4), form(5)];
    let t0 = st.temp;
    let mu_t = t0 * a31;
    let kappa_t = 2.0 / 3.0 * t0 * bs[2];
    if !(mu_t > 0.0 && kappa_t > 0.0) {
        return Err(Error::Coercivity(format!(
            "transport coefficients must be positive (mu = {mu_t:.3e}, kappa = {kappa_t:.3e})"
        )));
    }
    let bmax = bs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bmin = bs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(TransportCoefficients {
        mu_t,
        kappa_t,
        a33_form: t0 * a33,
        identity_43_residual: (t0 * a33 - 4.0 / 3.0 * mu_t).abs() / mu_t,
        isotropy_residual: (a12 - a31).abs() / a31,
        heat_isotropy_residual: (bmax - bmin) / bs[2],
    })
}

/// `sup_v mu^{-q/2} |f|` on the grid.
pub fn weighted_sup(state: &FluidState, grid: &VelocityGrid, f: &[f64], q: f64) -> f64 {
    maxwellian_on(state, grid)
        .iter()
        .zip(f)
        .map(|(m, x)| m.powf(-0.5 * q) * x.abs())
        .fold(0.0, f64::max)
}
