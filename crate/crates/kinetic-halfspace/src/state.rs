//! Fluid states, Maxwellians and the velocity weights used in the solver norms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

/// Macroscopic state `(rho, u, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub rho: f64,
    pub u: [f64; 3],
    #[serde(rename = "T")]
    pub temp: f64,
}

impl FluidState {
    pub fn new(rho: f64, u: [f64; 3], temp: f64) -> Result<Self> {
        let s = FluidState { rho, u, temp };
        s.validate()?;
        Ok(s)
    }

    /// The reference state `(1, 0, 1)`.
    pub fn unit() -> Self {
        FluidState {
            rho: 1.0,
            u: [0.0; 3],
            temp: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0)
            || !(self.temp > 0.0)
            || !self.rho.is_finite()
            || !self.temp.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "state needs rho > 0 and T > 0 (rho = {}, T = {})",
                self.rho, self.temp
            )));
        }
        Ok(())
    }

    pub fn pressure(&self) -> f64 {
        self.rho * self.temp
    }
}

/// `rho (2 pi T)^{-3/2} exp(-|v - u|^2 / (2T))`.
pub fn maxwellian(state: &FluidState, v: &[f64; 3]) -> f64 {
    let d2 =
        (v[0] - state.u[0]).powi(2) + (v[1] - state.u[1]).powi(2) + (v[2] - state.u[2]).powi(2);
    state.rho * (2.0 * PI * state.temp).powf(-1.5) * (-d2 / (2.0 * state.temp)).exp()
}

/// Maxwellian sampled on a grid.
pub fn maxwellian_on(state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    grid.map(|v| maxwellian(state, v))
}

/// Global Maxwellian `mu_M` with temperature `t_m` (unit density, zero velocity).
pub fn global_maxwellian(t_m: f64, v: &[f64; 3]) -> f64 {
    maxwellian(
        &FluidState {
            rho: 1.0,
            u: [0.0; 3],
            temp: t_m,
        },
        v,
    )
}

/// Parameters of the weights `w_l` and `varpi_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSystem {
    pub t_m: f64,
    pub alpha: f64,
    pub frak_a: f64,
    pub l: f64,
    pub frak_k: f64,
}

impl Default for WeightSystem {
    fn default() -> Self {
        WeightSystem {
            t_m: 0.75,
            alpha: 0.75,
            frak_a: 0.0,
            l: 3.0,
            frak_k: 16.0,
        }
    }
}

impl WeightSystem {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.frak_a) {
            return Err(Error::InvalidParameter(format!(
                "frak_a must lie in [0, 1/2), got {}",
                self.frak_a
            )));
        }
        Ok(())
    }
}

/// `w_l(v) = (1 + |v|^2)^{l/2} mu_0^{-a}`.
pub fn weight_w(ws: &WeightSystem, state0: &FluidState, v: &[f64; 3]) -> Result<f64> {
    ws.validate()?;
    Ok(weight_w_unchecked(ws.l, ws.frak_a, state0, v))
}

pub(crate) fn weight_w_unchecked(l: f64, frak_a: f64, state0: &FluidState, v: &[f64; 3]) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let poly = (1.0 + r2).powf(0.5 * l);
    if frak_a == 0.0 {
        poly
    } else {
        poly * maxwellian(state0, v).powf(-frak_a)
    }
}

/// `w_l` on every grid node.
pub fn weight_w_on(
    ws: &WeightSystem,
    state0: &FluidState,
    grid: &VelocityGrid,
) -> Result<Vec<f64>> {
    ws.validate()?;
    Ok(grid.map(|v| weight_w_unchecked(ws.l, ws.frak_a, state0, v)))
}

/// `varpi_k(v) = (1 + |v|^2)^{k/2}`.
pub fn weight_varpi(ws: &WeightSystem, v: &[f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).powf(0.5 * ws.frak_k)
}

/// Outcome of an envelope check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    pub alpha: f64,
    pub c: f64,
    pub min_t: f64,
    pub max_t: f64,
}

/// Checks `T_M < min T <= max T < 2 T_M` and finds the smallest `C` (over a scan
/// of feasible `alpha`) with `mu_M / C <= mu <= C mu_M^alpha` on the grid.
pub fn check_envelope(
    ws: &WeightSystem,
    states: &[FluidState],
    grid: &VelocityGrid,
) -> Result<Envelope> {
    if states.is_empty() {
        return Err(Error::InvalidParameter("no states supplied".into()));
    }
    let min_t = states.iter().map(|s| s.temp).fold(f64::INFINITY, f64::min);
    let max_t = states
        .iter()
        .map(|s| s.temp)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(ws.t_m < min_t) || !(max_t < 2.0 * ws.t_m) {
        return Err(Error::Envelope(format!(
            "need T_M < min T <= max T < 2 T_M, got T_M = {}, T in [{min_t}, {max_t}]",
            ws.t_m
        )));
    }
    // On all of R^3 the upper bound needs alpha <= T_M / max T; the lower bound
    // needs only T > T_M. The grid scan picks the best alpha in that window.
    let alpha_hi = (ws.t_m / max_t).min(1.0 - 1e-9);
    let mu_m = grid.map(|v| global_maxwellian(ws.t_m, v));
    let c_for = |alpha: f64| -> f64 {
        let mut c = 1.0f64;
        for s in states {
            for (v, &mm) in grid.nodes.iter().zip(&mu_m) {
                let mu = maxwellian(s, v);
                // Ratios are taken in log space: tail values underflow.
                let lmu = mu.ln();
                let lmm = mm.ln();
                c = c.max((lmm - lmu).exp()).max((lmu - alpha * lmm).exp());
            }
        }
        c
    };
    let mut best = (alpha_hi, c_for(alpha_hi));
    for k in 1..40 {
        let a = 0.5 + (alpha_hi - 0.5) * k as f64 / 40.0;
        let c = c_for(a);
        if c < best.1 {
            best = (a, c);
        }
    }
    Ok(Envelope {
        alpha: best.0,
        c: best.1,
        min_t,
        max_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn maxwellian_peak_value() {
        let s = FluidState::unit();
        let m = maxwellian(&s, &[0.0; 3]);
        assert!((m - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn global_maxwellian_integrates_to_one() {
        let g = build_grid(6.0, 24).unwrap();
        let f = g.map(|v| global_maxwellian(1.0, v));
        assert!((g.integrate(&f) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn moments_of_shifted_maxwellian() {
        let s = FluidState::new(1.3, [0.2, -0.1, 0.3], 0.9).unwrap();
        let g = build_grid(6.0, 24).unwrap();
        let m = maxwellian_on(&s, &g);
        let mass = g.integrate(&m);
        assert!((mass - 1.3).abs() < 1e-6);
        let e: Vec<f64> = g
            .nodes
            .iter()
            .zip(&m)
            .map(|(v, mu)| {
                let d2: f64 = (0..3).map(|k| (v[k] - s.u[k]).powi(2)).sum();
                d2 * mu
            })
            .collect();
        assert!((g.integrate(&e) - 3.0 * 1.3 * 0.9).abs() < 1e-5);
    }

    #[test]
    fn weights_trivial_values() {
        let ws = WeightSystem {
            l: 0.0,
            frak_a: 0.0,
            ..Default::default()
        };
        let s = FluidState::unit();
        assert_eq!(weight_w(&ws, &s, &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(weight_varpi(&ws, &[0.0; 3]), 1.0);
        let bad = WeightSystem {
            frak_a: 0.5,
            ..Default::default()
        };
        assert!(weight_w(&bad, &s, &[0.0; 3]).is_err());
    }

    #[test]
    fn weight_monotone_on_ray() {
        let ws = WeightSystem {
            l: 3.0,
            frak_a: 0.2,
            ..Default::default()
        };
        let s = FluidState::unit();
        let dir = [0.48, 0.6, 0.64];
        let mut prev = 0.0;
        for k in 0..100 {
            let r = 0.08 * k as f64;
            let w = weight_w(&ws, &s, &[r * dir[0], r * dir[1], r * dir[2]]).unwrap();
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn envelope_cases() {
        let g = build_grid(5.0, 10).unwrap();
        let ws = WeightSystem {
            t_m: 0.75,
            ..Default::default()
        };
        let env = check_envelope(&ws, &[FluidState::unit()], &g).unwrap();
        assert!(env.alpha > 0.5 && env.alpha < 1.0 && env.c.is_finite());
        let hot = WeightSystem {
            t_m: 1.2,
            ..Default::default()
        };
        assert!(check_envelope(&hot, &[FluidState::unit()], &g).is_err());
        let states: Vec<_> = [0.9, 1.0, 1.1]
            .iter()
            .map(|&t| FluidState::new(1.0, [0.0; 3], t).unwrap())
            .collect();
        let ws6 = WeightSystem {
            t_m: 0.6,
            ..Default::default()
        };
        let env = check_envelope(&ws6, &states, &g).unwrap();
        assert!(env.c >= 1.0 && env.alpha <= 0.6 / 1.1 + 1e-12);
    }
}
