use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::macro_micro::{BurnettFunctions, PseudoInverse};
use crate::state::maxwellian_on;

/// The 4x4 system fixing the far-field fluxes at `eta = d` by adding
/// `[phi_0 + phi_1 (v_1 - u_1) + phi_2 (v_2 - u_2) + phi_3 (|v - u|^2 - 3T)] sqrt(mu_0)`.
///
/// Row `r` is the flux `<v_3 f, test_r>` with tests
/// `v_3 sqrt(mu_0), L^{-1} A_31, L^{-1} A_32, L^{-1} B_3`.
#[derive(Debug, Clone)]
pub struct ShiftSystem {
    /// `v_3 test_r` on the grid.
    pub tests: [Vec<f64>; 4],
    pub columns: [Vec<f64>; 4],
    pub matrix: [[f64; 4]; 4],
    pub determinant: f64,
    /// `det / (3 rho T^{3/2})`, equal to `mu^2 kappa` in exact arithmetic.
    pub normalized_determinant: f64,
    pub mu_t: f64,
    pub kappa_t: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftOutcome {
    pub phi: [f64; 4],
    pub fluxes_before: [f64; 4],
    pub fluxes_after: [f64; 4],
}

impl ShiftSystem {
    pub fn new(op0: &CollisionOperator, pinv: &PseudoInverse) -> Result<Self> {
        let st = op0.state;
        let grid = &op0.grid;
        let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
        let bf = BurnettFunctions::new(&st, grid);
        let rhs = vec![
            bf.a_ij(2, 0).to_vec(),
            bf.a_ij(2, 1).to_vec(),
            bf.b[2].clone(),
        ];
        let sol = pinv.apply_many(&rhs);
        let mu_t = st.temp * grid.dot(&rhs[0], &sol[0]);
        let kappa_t = 2.0 / 3.0 * st.temp * grid.dot(&rhs[2], &sol[2]);
        let v3: Vec<f64> = grid.nodes.iter().map(|v| v[2]).collect();
        let times_v3 = |f: &[f64]| -> Vec<f64> { f.iter().zip(&v3).map(|(a, b)| a * b).collect() };
        let tests = [
            times_v3(&times_v3(&sm)),
            times_v3(&sol[0]),
            times_v3(&sol[1]),
            times_v3(&sol[2]),
        ];
        let mut columns: [Vec<f64>; 4] = Default::default();
        for (v, s) in grid.nodes.iter().zip(&sm) {
            let d = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
            columns[0].push(*s);
            columns[1].push(d[0] * s);
            columns[2].push(d[1] * s);
            columns[3].push((d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - 3.0 * st.temp) * s);
        }
        let mut matrix = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                matrix[r][c] = grid.dot(&tests[r], &columns[c]);
            }
        }
        let m = Mat::from_fn(4, 4, |i, j| matrix[i][j]);
        let determinant = m.determinant();
        let normalized_determinant = determinant / (3.0 * st.rho * st.temp.powf(1.5));
        if !(determinant.is_finite() && determinant.abs() > 1e-14) {
            return Err(Error::Singular(format!(
                "constraint-shift matrix, det = {determinant:.3e}"
            )));
        }
        Ok(ShiftSystem {
            tests,
            columns,
            matrix,
            determinant,
            normalized_determinant,
            mu_t,
            kappa_t,
            weights: grid.quad_weights.clone(),
        })
    }

    /// The four fluxes of `f` (one velocity slice).
    pub fn fluxes(&self, f: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (r, t) in self.tests.iter().enumerate() {
            out[r] = t
                .iter()
                .zip(f)
                .zip(&self.weights)
                .map(|((a, b), w)| a * b * w)
                .sum();
        }
        out
    }

    /// Constants `phi` zeroing the fluxes of `f + sum phi_c column_c`.
    pub fn solve_phi(&self, f: &[f64]) -> [f64; 4] {
        let fl = self.fluxes(f);
        let m = Mat::from_fn(4, 4, |i, j| self.matrix[i][j]);
        let mut rhs = Mat::from_fn(4, 1, |i, _| -fl[i]);
        m.partial_piv_lu().solve_in_place(rhs.as_mut());
        [rhs[(0, 0)], rhs[(1, 0)], rhs[(2, 0)], rhs[(3, 0)]]
    }

    /// `sum_c phi_c column_c`.
    pub fn correction(&self, phi: &[f64; 4]) -> Vec<f64> {
        (0..self.weights.len())
            .map(|i| (0..4).map(|c| phi[c] * self.columns[c][i]).sum())
            .collect()
    }
}

/// Shifts every `eta` slice of `f` (node-major, `nv` per slice) by the same
/// constants chosen at the last slice, `eta = d`.
pub fn constraint_shift(system: &ShiftSystem, f: &mut [f64], nv: usize) -> ShiftOutcome {
    let last = f.len() / nv - 1;
    let fd = &f[last * nv..];
    let fluxes_before = system.fluxes(fd);
    let phi = system.solve_phi(fd);
    let corr = system.correction(&phi);
    for slice in f.chunks_mut(nv) {
        slice.iter_mut().zip(&corr).for_each(|(a, b)| *a += b);
    }
    let fluxes_after = system.fluxes(&f[last * nv..]);
    ShiftOutcome {
        phi,
        fluxes_before,
        fluxes_after,
    }
}
