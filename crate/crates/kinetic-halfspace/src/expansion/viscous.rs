use serde::{Deserialize, Serialize};

use super::background::NodeState;
use super::interior::macro_product;
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::macro_micro::{ProjectionBasis, PseudoInverse};
use crate::state::maxwellian_on;

/// Decaying boundary-layer profile in `y = x_3 / eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerProfile {
    Zero,
    /// `amplitude exp(-(y/width)^2)`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `amplitude exp(-rate y)`.
    Exponential {
        amplitude: f64,
        rate: f64,
    },
}

impl LayerProfile {
    pub fn value(&self, y: f64) -> f64 {
        match *self {
            LayerProfile::Zero => 0.0,
            LayerProfile::Gaussian { amplitude, width } => amplitude * (-(y / width).powi(2)).exp(),
            LayerProfile::Exponential { amplitude, rate } => amplitude * (-rate * y).exp(),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match *self {
            LayerProfile::Zero => 0.0,
            LayerProfile::Gaussian { width, .. } => -2.0 * y / (width * width) * self.value(y),
            LayerProfile::Exponential { rate, .. } => -rate * self.value(y),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LayerProfile::Zero => true,
            LayerProfile::Gaussian { amplitude, width } => {
                amplitude.is_finite() && width > 0.0 && width.is_finite()
            }
            LayerProfile::Exponential { amplitude, rate } => {
                amplitude.is_finite() && rate > 0.0 && rate.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "layer profile {self:?} does not decay"
            )))
        }
    }
}

/// Macroscopic viscous-layer profiles with `b_3 = 0`. The density defaults to
/// the pressure-free choice `rho = -rho_0 theta / T_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerProfiles {
    pub u1: LayerProfile,
    pub u2: LayerProfile,
    pub theta: LayerProfile,
    #[serde(default)]
    pub rho: Option<LayerProfile>,
}

impl LayerProfiles {
    pub fn zero() -> Self {
        LayerProfiles {
            u1: LayerProfile::Zero,
            u2: LayerProfile::Zero,
            theta: LayerProfile::Zero,
            rho: None,
        }
    }
}

/// One `y` slice of the viscous layer.
#[derive(Debug, Clone)]
pub struct ViscousSlice {
    pub f1bar: Vec<f64>,
    pub f2bar_perp: Vec<f64>,
    /// `P_0`-moments of the order-one right-hand side, `<-v_3 d_y f1bar, chi_i>`.
    pub solvability: [f64; 5],
}

/// First viscous layer `f1bar(y)` and its order-one micro closure
/// `{I - P_0} f2bar = L_0^{-1} (I - P_0) [-v_3 d_y f1bar]
///   + (I - P_0) [y g_1 f1bar + f_1(0) f1bar + f1bar^2 / 2] / sqrt(mu_0)`
/// with `g_1 = d_3 mu_0 / sqrt(mu_0)` the first Taylor coefficient of the background.
#[derive(Debug, Clone)]
pub struct ViscousLayer {
    pub profiles: LayerProfiles,
    /// `P_0`-form basis for `(rho, u_1, u_2, theta)`.
    phi: [Vec<f64>; 4],
    /// `L_0^{-1} (I - P_0) (v_3 phi_k)`.
    psi: [Vec<f64>; 4],
    g1: Vec<f64>,
    f1_wall: Vec<f64>,
    sqrt_mu: Vec<f64>,
    v3: Vec<f64>,
    basis: ProjectionBasis,
    rho_over_t: f64,
}

impl ViscousLayer {
    pub fn new(
        op0: &CollisionOperator,
        pinv0: &PseudoInverse,
        profiles: LayerProfiles,
        wall: &NodeState,
        f1_wall: &[f64],
    ) -> Result<Self> {
        for p in [
            Some(profiles.u1),
            Some(profiles.u2),
            Some(profiles.theta),
            profiles.rho,
        ]
        .into_iter()
        .flatten()
        {
            p.validate()?;
        }
        let st = op0.state;
        let grid = &op0.grid;
        if f1_wall.len() != grid.len() {
            return Err(Error::InvalidParameter(
                "wall trace of f_1 has the wrong length".into(),
            ));
        }
        let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
        let t = st.temp;
        let mut phi: [Vec<f64>; 4] = Default::default();
        let mut g1 = Vec::with_capacity(grid.len());
        for (v, s) in grid.nodes.iter().zip(&sm) {
            let c = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
            let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            phi[0].push(s / st.rho);
            phi[1].push(c[0] / t * s);
            phi[2].push(c[1] / t * s);
            phi[3].push((0.5 * c2 / t - 1.5) / t * s);
            let d = &wall.dx;
            g1.push(
                (d[0] / st.rho
                    + (c[0] * d[1] + c[1] * d[2] + c[2] * d[3]) / t
                    + (0.5 * c2 / (t * t) - 1.5 / t) * d[4])
                    * s,
            );
        }
        let v3phi: Vec<Vec<f64>> = phi
            .iter()
            .map(|p| p.iter().zip(&grid.nodes).map(|(a, v)| a * v[2]).collect())
            .collect();
        let sol = pinv0.apply_many(&v3phi);
        let psi = [
            sol[0].clone(),
            sol[1].clone(),
            sol[2].clone(),
            sol[3].clone(),
        ];
        Ok(ViscousLayer {
            profiles,
            phi,
            psi,
            g1,
            f1_wall: f1_wall.to_vec(),
            sqrt_mu: sm,
            v3: grid.nodes.iter().map(|v| v[2]).collect(),
            basis: ProjectionBasis::new(&st, grid)?,
            rho_over_t: st.rho / st.temp,
        })
    }

    /// `(rho, u_1, u_2, theta)` and their `y` derivatives.
    fn coeffs(&self, y: f64) -> ([f64; 4], [f64; 4]) {
        let p = &self.profiles;
        let th = (p.theta.value(y), p.theta.derivative(y));
        let rho = match p.rho {
            Some(r) => (r.value(y), r.derivative(y)),
            None => (-self.rho_over_t * th.0, -self.rho_over_t * th.1),
        };
        (
            [rho.0, p.u1.value(y), p.u2.value(y), th.0],
            [rho.1, p.u1.derivative(y), p.u2.derivative(y), th.1],
        )
    }

    pub fn f1bar(&self, y: f64) -> Vec<f64> {
        let (c, _) = self.coeffs(y);
        (0..self.sqrt_mu.len())
            .map(|i| (0..4).map(|k| c[k] * self.phi[k][i]).sum())
            .collect()
    }

    pub fn slice(&self, y: f64) -> ViscousSlice {
        let (_, dc) = self.coeffs(y);
        let nv = self.sqrt_mu.len();
        let f1bar = self.f1bar(y);
        let rhs: Vec<f64> = (0..nv)
            .map(|i| -self.v3[i] * (0..4).map(|k| dc[k] * self.phi[k][i]).sum::<f64>())
            .collect();
        let mut micro: Vec<f64> = (0..nv)
            .map(|i| -(0..4).map(|k| dc[k] * self.psi[k][i]).sum::<f64>())
            .collect();
        let prod: Vec<f64> = (0..nv)
            .map(|i| y * self.g1[i] + self.f1_wall[i] + 0.5 * f1bar[i])
            .collect();
        let nonlinear = macro_product(&self.basis, &self.sqrt_mu, &prod, &f1bar, 1.0);
        micro.iter_mut().zip(&nonlinear).for_each(|(a, b)| *a += b);
        ViscousSlice {
            solvability: self.basis.chi_moments(&rhs),
            f1bar,
            f2bar_perp: micro,
        }
    }
}
