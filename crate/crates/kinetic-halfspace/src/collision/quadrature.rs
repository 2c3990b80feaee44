//! Sample generator for the collision integrals.
//!
//! For a fixed row velocity `v` the `u` integral is taken in spherical
//! coordinates `u = v + r sigma` with the polar axis along `bulk - v`, so the
//! singular factor `r^kappa` is absorbed by `r^2 dr` and the Gaussian peak
//! of `mu(u)` in the polar cosine is resolved by an exponential change of
//! variables. The scattering direction `omega` is integrated over the
//! hemisphere `omega . (v - u) > 0` (the integrand is even in `omega`).

use serde::{Deserialize, Serialize};

use crate::quadrature::{composite, gauss_legendre, smoothstep, trapezoid_periodic, Rule};
use crate::state::{maxwellian, FluidState};

/// Resolution of the collision quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureParams {
    /// Gauss–Legendre points per radial panel.
    pub radial_points: usize,
    /// Radial panel width in units of `sqrt(T)`.
    pub panel_width: f64,
    /// Number of geometrically shrinking panels toward `r = 0`.
    pub refine_levels: usize,
    /// Points in the polar cosine of `sigma`.
    pub polar_points: usize,
    /// Trapezoid points in the azimuth of `sigma`.
    pub azimuth_points: usize,
    /// Gauss points in `cos(theta)` on the scattering hemisphere.
    pub omega_polar: usize,
    /// Trapezoid points in the scattering azimuth.
    pub omega_azimuth: usize,
    /// Lagrange points per axis used to evaluate `h / sqrt(mu)` off the grid.
    pub stencil_points: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            radial_points: 6,
            panel_width: 0.5,
            refine_levels: 6,
            polar_points: 10,
            azimuth_points: 16,
            omega_polar: 4,
            omega_azimuth: 8,
            stencil_points: 3,
        }
    }
}

impl QuadratureParams {
    /// Cheap settings for small grids and tests.
    pub fn coarse() -> Self {
        QuadratureParams {
            radial_points: 4,
            panel_width: 0.75,
            refine_levels: 4,
            polar_points: 6,
            azimuth_points: 8,
            omega_polar: 3,
            omega_azimuth: 6,
            stencil_points: 3,
        }
    }

    /// Number of scattering directions per `u` sample.
    pub fn angular_nodes(&self) -> usize {
        self.omega_polar * self.omega_azimuth
    }
}

/// Which part of the relative-velocity range is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialMode {
    Full,
    /// Only `|v - u| <= 2m`, weighted by `1 - chi_m(|v - u|)`.
    Cutoff(f64),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct OmegaNode {
    c: f64,
    s: f64,
    cphi: f64,
    sphi: f64,
    w: f64,
}

/// Precomputed pieces shared by every row.
#[derive(Debug, Clone)]
pub struct SampleRule {
    pub state: FluidState,
    pub kappa: f64,
    pub beta0: f64,
    pub q: QuadratureParams,
    omega: Vec<OmegaNode>,
    azimuth: Rule,
    polar_plain: Rule,
    polar_unit: Rule,
}

/// Cosine argument above which the polar rule switches to the exponential map.
const PEAK_SWITCH: f64 = 4.0;

impl SampleRule {
    pub fn new(state: FluidState, kappa: f64, beta0: f64, q: QuadratureParams) -> Self {
        let oc = gauss_legendre(q.omega_polar, 0.0, 1.0);
        let oa = trapezoid_periodic(q.omega_azimuth, 0.5);
        let mut omega = Vec::with_capacity(q.angular_nodes());
        for (&c, &wc) in oc.nodes.iter().zip(&oc.weights) {
            for (&phi, &wp) in oa.nodes.iter().zip(&oa.weights) {
                omega.push(OmegaNode {
                    c,
                    s: (1.0 - c * c).max(0.0).sqrt(),
                    cphi: phi.cos(),
                    sphi: phi.sin(),
                    // |cos theta| weight, doubled for the opposite hemisphere.
                    w: 2.0 * beta0 * c * wc * wp,
                });
            }
        }
        SampleRule {
            state,
            kappa,
            beta0,
            q,
            omega,
            azimuth: trapezoid_periodic(q.azimuth_points, 0.0),
            polar_plain: gauss_legendre(q.polar_points, -1.0, 1.0),
            polar_unit: gauss_legendre(q.polar_points, 0.0, 1.0),
        }
    }

    /// Radial nodes with weights `r^{2 + kappa} dr` (times the cutoff weight).
    pub fn radial_rule(&self, dist: f64, mode: RadialMode) -> Rule {
        let st = self.state.temp.sqrt();
        let q = &self.q;
        let mut breaks = Vec::new();
        match mode {
            RadialMode::Full => {
                let hi = dist + 8.0 * st;
                let lo = if dist > 8.0 * st {
                    dist - 8.0 * st
                } else {
                    0.0
                };
                let pw = q.panel_width * st;
                if lo == 0.0 {
                    breaks.push(0.0);
                    for k in (1..=q.refine_levels).rev() {
                        breaks.push(pw * 0.5f64.powi(k as i32));
                    }
                }
                let mut r = if lo == 0.0 { pw } else { lo };
                breaks.push(r);
                let n = ((hi - r) / pw).ceil().max(1.0) as usize;
                let step = (hi - r) / n as f64;
                for _ in 0..n {
                    r += step;
                    breaks.push(r);
                }
            }
            RadialMode::Cutoff(m) => {
                breaks.push(0.0);
                for k in (1..=q.refine_levels).rev() {
                    breaks.push(m * 0.5f64.powi(k as i32));
                }
                breaks.push(m);
                breaks.push(1.5 * m);
                breaks.push(2.0 * m);
            }
        }
        let mut rule = composite(&breaks, q.radial_points);
        for (r, w) in rule.nodes.iter().zip(rule.weights.iter_mut()) {
            *w *= r.powf(2.0 + self.kappa);
            if let RadialMode::Cutoff(m) = mode {
                *w *= 1.0 - smoothstep((r - m) / m);
            }
        }
        rule
    }

    /// Rule in `c = cos(angle(sigma, bulk - v))` for Gaussian peak strength `a`.
    fn polar_rule(&self, a: f64) -> Rule {
        if a <= PEAK_SWITCH {
            return self.polar_plain.clone();
        }
        // t = 1 - c, s = 1 - exp(-a t): the factor exp(-a t) becomes flat.
        let t_max = (36.0 / a).min(2.0);
        let s_max = -(-a * t_max).exp_m1();
        let mut r = Rule::default();
        for (&x, &w) in self.polar_unit.nodes.iter().zip(&self.polar_unit.weights) {
            let s = x * s_max;
            let t = -(-s).ln_1p() / a;
            r.nodes.push(1.0 - t);
            r.weights.push(w * s_max / (a * (1.0 - s)));
        }
        r
    }

    /// Visits every `u` sample of the row at `v`: `f(u, w_u, r, ghat)` where
    /// `w_u = |v - u|^kappa mu(u) du` and `ghat = (v - u) / |v - u|`.
    pub fn for_each_u<F: FnMut(&[f64; 3], f64, f64, &[f64; 3])>(
        &self,
        v: &[f64; 3],
        mode: RadialMode,
        mut f: F,
    ) {
        let st = &self.state;
        let axis = [st.u[0] - v[0], st.u[1] - v[1], st.u[2] - v[2]];
        let dist = norm(&axis);
        let ez = if dist > 1e-12 {
            scale(&axis, 1.0 / dist)
        } else {
            [0.0, 0.0, 1.0]
        };
        let (ex, ey) = frame(&ez);
        let radial = self.radial_rule(dist, mode);
        for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
            let a = r * dist / st.temp;
            let polar = self.polar_rule(a);
            for (&c, &wc) in polar.nodes.iter().zip(&polar.weights) {
                let s = (1.0 - c * c).max(0.0).sqrt();
                for (&phi, &wp) in self.azimuth.nodes.iter().zip(&self.azimuth.weights) {
                    let (sp, cp) = phi.sin_cos();
                    let sigma = [
                        c * ez[0] + s * (cp * ex[0] + sp * ey[0]),
                        c * ez[1] + s * (cp * ex[1] + sp * ey[1]),
                        c * ez[2] + s * (cp * ex[2] + sp * ey[2]),
                    ];
                    let u = [
                        v[0] + r * sigma[0],
                        v[1] + r * sigma[1],
                        v[2] + r * sigma[2],
                    ];
                    let w = wr * wc * wp * maxwellian(st, &u);
                    if w == 0.0 {
                        continue;
                    }
                    f(&u, w, r, &[-sigma[0], -sigma[1], -sigma[2]]);
                }
            }
        }
    }

    /// Visits the post-collision pairs `(v', u', w_omega)` for one `u` sample.
    #[inline]
    pub fn for_each_omega<F: FnMut(&[f64; 3], &[f64; 3], f64)>(
        &self,
        v: &[f64; 3],
        u: &[f64; 3],
        r: f64,
        ghat: &[f64; 3],
        mut f: F,
    ) {
        let (ex, ey) = frame(ghat);
        for o in &self.omega {
            let mut om = [0.0; 3];
            for k in 0..3 {
                om[k] = o.c * ghat[k] + o.s * (o.cphi * ex[k] + o.sphi * ey[k]);
            }
            let p = r * o.c;
            let vp = [v[0] - p * om[0], v[1] - p * om[1], v[2] - p * om[2]];
            let up = [u[0] + p * om[0], u[1] + p * om[1], u[2] + p * om[2]];
            f(&vp, &up, o.w);
        }
    }

    /// `sum_omega w_omega`; equals `2 pi beta0` up to roundoff.
    pub fn omega_total(&self) -> f64 {
        self.omega.iter().map(|o| o.w).sum()
    }
}

#[inline]
fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[inline]
fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Two unit vectors completing `e` to a right-handed orthonormal frame.
#[inline]
pub(crate) fn frame(e: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let t = if e[0].abs() < 0.6 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = t[0] * e[0] + t[1] * e[1] + t[2] * e[2];
    let x = [t[0] - d * e[0], t[1] - d * e[1], t[2] - d * e[2]];
    let x = scale(&x, 1.0 / norm(&x));
    let y = [
        e[1] * x[2] - e[2] * x[1],
        e[2] * x[0] - e[0] * x[2],
        e[0] * x[1] - e[1] * x[0],
    ];
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn omega_weights_total() {
        let r = SampleRule::new(FluidState::unit(), -1.0, 1.3, QuadratureParams::default());
        assert!((r.omega_total() - 2.0 * PI * 1.3).abs() < 1e-12);
    }

    #[test]
    fn u_integral_of_maxwellian_is_density() {
        // kappa = 0 turns the u weights into mu(u) du.
        let st = FluidState::new(1.4, [0.3, 0.0, -0.2], 0.8).unwrap();
        let rule = SampleRule::new(st, 0.0, 1.0, QuadratureParams::default());
        for v in [[0.0, 0.0, 0.0], [2.5, -1.0, 0.5], [5.0, 4.0, -3.0]] {
            let mut s = 0.0;
            rule.for_each_u(&v, RadialMode::Full, |_, w, _, _| s += w);
            assert!((s - 1.4).abs() < 1e-8, "v = {v:?}: {s}");
        }
    }

    #[test]
    fn post_collision_conserves_energy() {
        let rule = SampleRule::new(FluidState::unit(), -1.0, 1.0, QuadratureParams::coarse());
        let v = [0.4, -1.2, 0.9];
        let u = [1.0, 0.5, -0.3];
        let g = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
        let r = norm(&g);
        rule.for_each_omega(&v, &u, r, &scale(&g, 1.0 / r), |vp, up, _| {
            let e0: f64 = v.iter().chain(&u).map(|x| x * x).sum();
            let e1: f64 = vp.iter().chain(up).map(|x| x * x).sum();
            assert!((e0 - e1).abs() < 1e-12);
            for k in 0..3 {
                assert!((v[k] + u[k] - vp[k] - up[k]).abs() < 1e-14);
            }
        });
    }

    #[test]
    fn frame_is_orthonormal() {
        for e in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [-1.0, 0.0, 0.0]] {
            let (x, y) = frame(&e);
            let d = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(d(&x, &e).abs() < 1e-15 && d(&y, &e).abs() < 1e-15 && d(&x, &y).abs() < 1e-15);
            assert!((d(&x, &x) - 1.0).abs() < 1e-15 && (d(&y, &y) - 1.0).abs() < 1e-15);
        }
    }
}
