//! Closed-form kernels of `K = K_2 - K_1` for `B = beta0 |v - u|^kappa |cos theta|`.
//!
//! `K_1` has the explicit kernel `2 pi beta0 |v - w|^kappa sqrt(mu(v) mu(w))`.
//! In Carleman variables both gain terms of `K_2` share one kernel,
//!
//! ```text
//! k_2(v, w) = (4 beta0 / |v - w|) sqrt(mu(v)/mu(w))
//!             * int_{z . (v - w) = 0} (|v - w|^2 + |z|^2)^{(kappa - 1)/2} mu(w + z) d^2 z,
//! ```
//!
//! and the plane integral reduces to one radial integral with a modified
//! Bessel function. Both kernels are symmetric in `(v, w)`.

use std::f64::consts::PI;

use crate::quadrature::{composite, gauss_legendre, Rule};
use crate::state::{maxwellian, FluidState};

/// `exp(-x) I_0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x < 15.0 {
        let q = 0.25 * x * x;
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        let mut k = 1.0f64;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        let mut k = 1.0f64;
        loop {
            let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * x);
            if next < 1e-17 * sum || next > term {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Evaluator for the collision kernels around one state.
#[derive(Debug, Clone)]
pub struct KernelEval {
    pub state: FluidState,
    pub kappa: f64,
    pub beta0: f64,
    gl: Rule,
    norm: f64,
}

impl KernelEval {
    pub fn new(state: FluidState, kappa: f64, beta0: f64) -> Self {
        KernelEval {
            state,
            kappa,
            beta0,
            gl: gauss_legendre(8, 0.0, 1.0),
            norm: state.rho * (2.0 * PI * state.temp).powf(-1.5),
        }
    }

    fn rule_on(&self, breaks: &[f64]) -> Rule {
        let mut r = Rule::default();
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            for (&x, &q) in self.gl.nodes.iter().zip(&self.gl.weights) {
                r.nodes.push(w[0] + len * x);
                r.weights.push(len * q);
            }
        }
        r
    }

    /// `2 pi int_0^inf (eps^2 + r^2)^{(kappa-1)/2} exp(-(r - b)^2 / 2T) I0e(b r / T) r dr`.
    fn plane_radial(&self, eps: f64, b: f64) -> f64 {
        let t = self.state.temp;
        let st = t.sqrt();
        let lo = (b - 8.0 * st).max(0.0);
        let hi = b + 8.0 * st;
        let mut breaks = vec![lo, hi];
        let n = 16;
        for k in 1..n {
            breaks.push(lo + (hi - lo) * k as f64 / n as f64);
        }
        // Resolve the scale eps of the algebraic factor.
        let mut s = eps / 16.0;
        while s < hi {
            if s > lo {
                breaks.push(s);
            }
            s *= 2.0;
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let e = 0.5 * (self.kappa - 1.0);
        let rule = self.rule_on(&breaks);
        let mut acc = 0.0;
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let g = (-(r - b) * (r - b) / (2.0 * t)).exp() * bessel_i0_scaled(b * r / t);
            acc += w * (eps * eps + r * r).powf(e) * g * r;
        }
        2.0 * PI * acc
    }

    /// Gain kernel in the `h` representation, `v != w`.
    pub fn k2(&self, v: &[f64; 3], w: &[f64; 3]) -> f64 {
        let st = &self.state;
        let d = [v[0] - w[0], v[1] - w[1], v[2] - w[2]];
        let eps = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let e = [d[0] / eps, d[1] / eps, d[2] / eps];
        let c = [w[0] - st.u[0], w[1] - st.u[1], w[2] - st.u[2]];
        let a = c[0] * e[0] + c[1] * e[1] + c[2] * e[2];
        let bv = [c[0] - a * e[0], c[1] - a * e[1], c[2] - a * e[2]];
        let b = (bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2]).sqrt();
        let plane = self.norm * (-a * a / (2.0 * st.temp)).exp() * self.plane_radial(eps, b);
        let ratio = (0.5 * (maxwellian(st, v).ln() - maxwellian(st, w).ln())).exp();
        4.0 * self.beta0 / eps * plane * ratio
    }

    /// Loss kernel `2 pi beta0 |v - w|^kappa sqrt(mu(v) mu(w))`, `v != w`.
    pub fn k1(&self, v: &[f64; 3], w: &[f64; 3]) -> f64 {
        let d2 = (v[0] - w[0]).powi(2) + (v[1] - w[1]).powi(2) + (v[2] - w[2]).powi(2);
        2.0 * PI
            * self.beta0
            * d2.powf(0.5 * self.kappa)
            * (maxwellian(&self.state, v) * maxwellian(&self.state, w)).sqrt()
    }

    /// True when `k(v, w) sqrt(mu(w)) / sqrt(mu(v))` is below `e^-40`.
    pub fn negligible(&self, v: &[f64; 3], w: &[f64; 3]) -> bool {
        let st = &self.state;
        let t = st.temp;
        let d = [v[0] - w[0], v[1] - w[1], v[2] - w[2]];
        let eps = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let c = [w[0] - st.u[0], w[1] - st.u[1], w[2] - st.u[2]];
        let a = (c[0] * d[0] + c[1] * d[1] + c[2] * d[2]) / eps;
        let cw2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        a * a / (2.0 * t) > 40.0 && cw2 / (2.0 * t) > 40.0
    }

    /// `k_2 - k_1`.
    pub fn k(&self, v: &[f64; 3], w: &[f64; 3]) -> f64 {
        self.k2(v, w) - self.k1(v, w)
    }

    /// `nu(v) = 2 pi beta0 int |v - u|^kappa mu(u) du` by a radial rule.
    pub fn nu(&self, v: &[f64; 3]) -> f64 {
        let st = &self.state;
        let t = st.temp;
        let sq = t.sqrt();
        let dd =
            ((v[0] - st.u[0]).powi(2) + (v[1] - st.u[1]).powi(2) + (v[2] - st.u[2]).powi(2)).sqrt();
        let lo = (dd - 9.0 * sq).max(0.0);
        let hi = dd + 9.0 * sq;
        let mut breaks = vec![lo, hi];
        for k in 1..24 {
            breaks.push(lo + (hi - lo) * k as f64 / 24.0);
        }
        if lo == 0.0 {
            let mut s = (hi / 24.0) * 0.5;
            for _ in 0..12 {
                breaks.push(s);
                s *= 0.5;
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rule = composite(&breaks, 8);
        let mut acc = 0.0;
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            // Angular average of exp(-|v - bulk + r sigma|^2 / 2T) over the sphere.
            let x = r * dd / t;
            let ang = if x < 1e-6 {
                4.0 * PI * (-(dd * dd + r * r) / (2.0 * t)).exp() * (1.0 + x * x / 6.0)
            } else {
                2.0 * PI * t / (r * dd)
                    * (-(r - dd) * (r - dd) / (2.0 * t)).exp()
                    * (-(-2.0 * x).exp_m1())
            };
            acc += w * r.powf(2.0 + self.kappa) * ang;
        }
        2.0 * PI * self.beta0 * self.norm * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i0_reference_values() {
        // I0(1) = 1.2660658777520082, I0(20) = 4.355828255955353e7.
        assert!((bessel_i0_scaled(1.0) * 1f64.exp() - 1.2660658777520082).abs() < 1e-14);
        let v = bessel_i0_scaled(20.0) * 20f64.exp();
        assert!((v / 4.355828255955353e7 - 1.0).abs() < 1e-13);
        let a = bessel_i0_scaled(14.999999);
        let b = bessel_i0_scaled(15.000001);
        assert!((a / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nu_for_kappa_zero_is_two_pi_rho() {
        let st = FluidState::new(1.7, [0.2, 0.0, 0.0], 0.9).unwrap();
        let k = KernelEval::new(st, 0.0, 1.0);
        for v in [[0.0; 3], [3.0, -2.0, 1.0]] {
            assert!((k.nu(&v) / (2.0 * PI * 1.7) - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn kernels_are_symmetric() {
        let st = FluidState::new(1.0, [0.1, -0.2, 0.0], 1.1).unwrap();
        let k = KernelEval::new(st, -1.0, 1.0);
        let v = [0.3, 1.2, -0.7];
        let w = [-1.1, 0.4, 2.0];
        assert!((k.k2(&v, &w) / k.k2(&w, &v) - 1.0).abs() < 1e-10);
        assert!((k.k1(&v, &w) - k.k1(&w, &v)).abs() < 1e-15);
    }
}
