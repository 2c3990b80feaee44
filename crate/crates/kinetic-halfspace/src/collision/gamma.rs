use rayon::prelude::*;

use super::quadrature::{RadialMode, SampleRule};
use super::CollisionModel;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::interp::stencil;
use crate::state::{maxwellian_on, FluidState};

/// `Gamma(h, g) = mu^{-1/2} Q(sqrt(mu) h, sqrt(mu) g)` by direct quadrature of
/// the gain and loss terms.
///
/// Off-grid values of `sqrt(mu) h` are represented as `mu psi_h` with
/// `psi_h = h / sqrt(mu)` interpolated, and the same samples as the operator
/// assembly are used, so `-Gamma(sqrt(mu), h) - Gamma(h, sqrt(mu))`
/// reproduces the raw (unsymmetrized) `L h` up to roundoff.
pub fn apply_gamma(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
    h: &[f64],
    g: &[f64],
) -> Result<Vec<f64>> {
    let rows: Vec<usize> = (0..grid.len()).collect();
    gamma_rows(model, state, grid, h, g, &rows)
}

/// [`apply_gamma`] evaluated only at the listed nodes (other entries zero).
pub fn gamma_rows(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
    h: &[f64],
    g: &[f64],
    rows: &[usize],
) -> Result<Vec<f64>> {
    model.validate()?;
    state.validate()?;
    if h.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "Gamma arguments must live on the grid".into(),
        ));
    }
    let rule = SampleRule::new(*state, model.kappa, model.beta0, model.quad);
    let sqrt_mu: Vec<f64> = maxwellian_on(state, grid)
        .iter()
        .map(|m| m.sqrt())
        .collect();
    let psi = |f: &[f64]| -> Vec<f64> { f.iter().zip(&sqrt_mu).map(|(a, s)| a / s).collect() };
    let (ph, pg) = (psi(h), psi(g));
    let n = grid.n_axis;
    let p = model.quad.stencil_points;
    let vals: Vec<(usize, f64)> = rows
        .par_iter()
        .map(|&i| {
            let v = grid.nodes[i];
            let mut acc = 0.0;
            rule.for_each_u(&v, RadialMode::Full, |u, wu, r, ghat| {
                let Some(su) = stencil(grid, u, p) else {
                    return;
                };
                let hu = su.eval(n, &ph);
                rule.for_each_omega(&v, u, r, ghat, |vp, up, wo| {
                    let (Some(sv), Some(sp)) = (stencil(grid, vp, p), stencil(grid, up, p)) else {
                        return;
                    };
                    let gain = sp.eval(n, &ph) * sv.eval(n, &pg);
                    let loss = hu * pg[i];
                    acc += wu * wo * (gain - loss);
                });
            });
            (i, sqrt_mu[i] * acc)
        })
        .collect();
    let mut out = vec![0.0; grid.len()];
    for (i, x) in vals {
        out[i] = x;
    }
    Ok(out)
}
