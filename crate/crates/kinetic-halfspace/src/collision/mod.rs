//! Linearized collision operator `L = nu - K` for cutoff power-law kernels
//! `B = |v - u|^kappa beta0 |cos theta|`.

mod assembly;
mod gamma;
mod io;
pub mod kernel;
pub mod quadrature;
mod spectrum;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::state::FluidState;

pub(crate) use assembly::orthonormal_columns;
pub use assembly::{
    assemble_k, assemble_k_with, collision_frequency, collocation_frequency, row_sup, split_cutoff,
    AssemblyOptions, AssemblyScheme, CutoffSplit,
};
pub use gamma::{apply_gamma, gamma_rows};
pub use io::read_operator_bin;
pub use quadrature::{QuadratureParams, RadialMode};
pub use spectrum::{coercivity_constant, Coercivity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionModel {
    pub kappa: f64,
    pub beta0: f64,
    /// Cutoff radius of the `K^m / K^c` split.
    pub m: f64,
    #[serde(default)]
    pub quad: QuadratureParams,
}

impl Default for CollisionModel {
    fn default() -> Self {
        CollisionModel {
            kappa: -1.0,
            beta0: 1.0,
            m: 0.4,
            quad: QuadratureParams::default(),
        }
    }
}

impl CollisionModel {
    pub fn new(kappa: f64, beta0: f64, m: f64) -> Result<Self> {
        let model = CollisionModel {
            kappa,
            beta0,
            m,
            quad: QuadratureParams::default(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_quadrature(mut self, quad: QuadratureParams) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > -3.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (-3, 1], got {}",
                self.kappa
            )));
        }
        if !(self.beta0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta0 must be positive, got {}",
                self.beta0
            )));
        }
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "m must lie in (0, 1], got {}",
                self.m
            )));
        }
        let q = &self.quad;
        if !(3..=5).contains(&q.stencil_points) {
            return Err(Error::InvalidParameter(
                "stencil_points must be 3, 4 or 5".into(),
            ));
        }
        if q.radial_points == 0
            || q.polar_points == 0
            || q.azimuth_points == 0
            || q.omega_polar == 0
            || q.omega_azimuth == 0
        {
            return Err(Error::InvalidParameter(
                "quadrature point counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Numbers describing how faithful the assembled operator is.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AssemblyDiagnostics {
    /// `||K - K^T||_F / ||K||_F` of the raw quadrature matrix.
    pub raw_asymmetry: f64,
    /// Same quantity after symmetrization and projection.
    pub asymmetry: f64,
    /// `max_i ||L chi_i|| / ||chi_i||` of the raw (unsymmetrized) operator.
    pub raw_null_residual: f64,
    /// Null-space residual of `(K + K^T)/2` before the conservative projection.
    pub symmetrized_null_residual: f64,
    /// Null-space residual of the final operator.
    pub null_residual: f64,
    pub orbit_rows: usize,
    pub symmetry_order: usize,
    pub samples_per_row: usize,
}

/// `L = diag(nu) - K` on a velocity grid, built around `state`.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    pub model: CollisionModel,
    pub state: FluidState,
    pub grid: VelocityGrid,
    pub nu: Vec<f64>,
    pub k: Mat<f64>,
    pub sqrt_mu: Vec<f64>,
    pub diagnostics: AssemblyDiagnostics,
    /// Unsymmetrized quadrature matrix, kept on request.
    pub k_raw: Option<Mat<f64>>,
}

impl CollisionOperator {
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// `K h`.
    pub fn apply_k(&self, h: &[f64]) -> Vec<f64> {
        matvec(&self.k, h)
    }

    /// `L h = nu h - K h`.
    pub fn apply_l(&self, h: &[f64]) -> Vec<f64> {
        let mut out = self.apply_k(h);
        for ((o, &n), &x) in out.iter_mut().zip(&self.nu).zip(h) {
            *o = n * x - *o;
        }
        out
    }

    /// `L` applied with the raw quadrature matrix, if it was kept.
    pub fn apply_l_raw(&self, h: &[f64]) -> Option<Vec<f64>> {
        let k = self.k_raw.as_ref()?;
        let mut out = matvec(k, h);
        for ((o, &n), &x) in out.iter_mut().zip(&self.nu).zip(h) {
            *o = n * x - *o;
        }
        Some(out)
    }

    /// Dense `L` as a matrix.
    pub fn l_matrix(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.nu[i] - self.k[(i, j)]
            } else {
                -self.k[(i, j)]
            }
        })
    }

    /// Quadratic form `<L h, h>` (grid quadrature).
    pub fn quadratic_form(&self, h: &[f64]) -> f64 {
        let lh = self.apply_l(h);
        self.grid.dot(&lh, h)
    }
}

/// Free-function form of [`CollisionOperator::apply_l`].
pub fn apply_l(op: &CollisionOperator, h: &[f64]) -> Vec<f64> {
    op.apply_l(h)
}

pub(crate) fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), x.len());
    let xc = faer::ColRef::from_slice(x);
    let mut y = faer::Col::<f64>::zeros(n);
    faer::linalg::matmul::matmul(
        y.as_mut(),
        faer::Accum::Replace,
        a.as_ref(),
        xc,
        1.0,
        faer::get_global_parallelism(),
    );
    (0..n).map(|i| y[i]).collect()
}
