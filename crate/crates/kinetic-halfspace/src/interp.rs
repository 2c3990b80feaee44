//! Tensor-product Lagrange stencils on the velocity lattice.

use crate::grid::VelocityGrid;

pub const MAX_POINTS: usize = 5;

/// Interpolation stencil of `p` points per axis at an off-grid velocity.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub p: usize,
    pub start: [usize; 3],
    pub w: [[f64; MAX_POINTS]; 3],
}

impl Stencil {
    /// Calls `f(node_index, weight)` for each of the `p^3` stencil points.
    #[inline]
    pub fn for_each<F: FnMut(usize, f64)>(&self, n_axis: usize, mut f: F) {
        let p = self.p;
        for a in 0..p {
            let ia = (self.start[0] + a) * n_axis;
            let wa = self.w[0][a];
            for b in 0..p {
                let iab = (ia + self.start[1] + b) * n_axis + self.start[2];
                let wab = wa * self.w[1][b];
                for c in 0..p {
                    f(iab + c, wab * self.w[2][c]);
                }
            }
        }
    }

    /// Interpolated value of nodal data `psi`.
    #[inline]
    pub fn eval(&self, n_axis: usize, psi: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each(n_axis, |j, w| s += w * psi[j]);
        s
    }
}

/// Builds the stencil at `x`, or `None` if `x` lies outside the velocity box.
///
/// Odd `p` centres the stencil on the nearest node; stencils are shifted
/// inward near the box faces. Polynomials of degree `< p` per axis are
/// reproduced exactly.
#[inline]
pub fn stencil(grid: &VelocityGrid, x: &[f64; 3], p: usize) -> Option<Stencil> {
    debug_assert!((2..=MAX_POINTS).contains(&p) && p <= grid.n_axis);
    let n = grid.n_axis;
    let mut st = Stencil {
        p,
        start: [0; 3],
        w: [[0.0; MAX_POINTS]; 3],
    };
    for k in 0..3 {
        if x[k].abs() > grid.v_max {
            return None;
        }
        // Fractional node coordinate: node k sits at s = k.
        let s = (x[k] + grid.v_max) / grid.h - 0.5;
        let first = if p % 2 == 1 {
            s.round() as isize - (p as isize - 1) / 2
        } else {
            s.floor() as isize - (p as isize / 2 - 1)
        };
        let first = first.clamp(0, (n - p) as isize) as usize;
        st.start[k] = first;
        let t = s - first as f64;
        for a in 0..p {
            let mut l = 1.0;
            for m in 0..p {
                if m != a {
                    l *= (t - m as f64) / (a as f64 - m as f64);
                }
            }
            st.w[k][a] = l;
        }
    }
    Some(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn reproduces_quadratics() {
        let g = build_grid(3.0, 8).unwrap();
        let f = |v: &[f64; 3]| 1.0 + v[0] - 2.0 * v[1] * v[2] + v[0] * v[0] + 0.3 * v[2] * v[2];
        let psi = g.map(f);
        for x in [[0.1, -0.2, 0.33], [2.9, -2.95, 1.7], [-0.01, 0.0, 2.5]] {
            let st = stencil(&g, &x, 3).unwrap();
            assert!((st.eval(8, &psi) - f(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_values_exact() {
        let g = build_grid(2.0, 6).unwrap();
        let psi: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        for p in [3, 5] {
            for i in [0, 17, 100, 215] {
                let st = stencil(&g, &g.nodes[i], p).unwrap();
                assert!((st.eval(6, &psi) - psi[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn outside_box_is_none() {
        let g = build_grid(2.0, 6).unwrap();
        assert!(stencil(&g, &[2.01, 0.0, 0.0], 3).is_none());
    }
}
