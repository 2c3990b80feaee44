//! Truncated Cartesian velocity lattice with midpoint quadrature.
//!
//! Nodes sit at cell centres of a uniform partition of `[-v_max, v_max]^3`,
//! so with an even number of cells per axis no node lies on `v_3 = 0` and the
//! specular map `(v_1, v_2, v_3) -> (v_1, v_2, -v_3)` permutes the nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub v_max: f64,
    pub n_axis: usize,
    /// Cell width `2 v_max / n_axis`.
    pub h: f64,
    pub nodes: Vec<[f64; 3]>,
    pub quad_weights: Vec<f64>,
    pub reflect_map: Vec<usize>,
}

impl VelocityGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Coordinate of the `k`-th node along one axis.
    pub fn axis_coord(&self, k: usize) -> f64 {
        self.axis_coord_at(k as isize)
    }

    /// Lattice coordinate, also for indices outside the box.
    pub fn axis_coord_at(&self, k: isize) -> f64 {
        -self.v_max + (k as f64 + 0.5) * self.h
    }

    /// Flat index of the node with axis indices `(i1, i2, i3)`; `i3` runs fastest.
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n_axis + i2) * self.n_axis + i3
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 3] {
        let n = self.n_axis;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Quadrature of a grid function.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.quad_weights).map(|(a, w)| a * w).sum()
    }

    /// Quadrature inner product `sum_i w_i f_i g_i`.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.quad_weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.dot(f, f).sqrt()
    }

    /// Evaluates `f(v)` at every node.
    pub fn map<F: Fn(&[f64; 3]) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    /// `h∘R` for a grid function `h`.
    pub fn reflect(&self, f: &[f64]) -> Vec<f64> {
        self.reflect_map.iter().map(|&j| f[j]).collect()
    }

    /// Indices of nodes with `v_3 > 0`.
    pub fn outgoing(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i][2] > 0.0)
            .collect()
    }

    /// Writes `index, v1, v2, v3, weight` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "v1", "v2", "v3", "weight"])?;
        for (i, (v, q)) in self.nodes.iter().zip(&self.quad_weights).enumerate() {
            wr.write_record(&[
                i.to_string(),
                format!("{:.17e}", v[0]),
                format!("{:.17e}", v[1]),
                format!("{:.17e}", v[2]),
                format!("{:.17e}", q),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Builds the midpoint lattice with `n_axis` cells per axis on `[-v_max, v_max]^3`.
pub fn build_grid(v_max: f64, n_axis: usize) -> Result<VelocityGrid> {
    if !(v_max > 0.0) || !v_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "v_max must be positive, got {v_max}"
        )));
    }
    if n_axis % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "n_axis must be even (odd {n_axis} puts nodes on v3 = 0)"
        )));
    }
    if n_axis < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_axis must be at least 2, got {n_axis}"
        )));
    }
    let h = 2.0 * v_max / n_axis as f64;
    let coord = |k: usize| -v_max + (k as f64 + 0.5) * h;
    let n = n_axis;
    let mut nodes = Vec::with_capacity(n * n * n);
    let mut reflect_map = Vec::with_capacity(n * n * n);
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                nodes.push([coord(i1), coord(i2), coord(i3)]);
                reflect_map.push((i1 * n + i2) * n + (n - 1 - i3));
            }
        }
    }
    let quad_weights = vec![h * h * h; nodes.len()];
    Ok(VelocityGrid {
        v_max,
        n_axis,
        h,
        nodes,
        quad_weights,
        reflect_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_grid_has_unit_weights() {
        let g = build_grid(1.0, 2).unwrap();
        assert_eq!(g.len(), 8);
        for (v, w) in g.nodes.iter().zip(&g.quad_weights) {
            assert!(v.iter().all(|c| (c.abs() - 0.5).abs() < 1e-15));
            assert_eq!(*w, 1.0);
        }
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = build_grid(6.0, 16).unwrap();
        for i in 0..g.len() {
            let j = g.reflect_map[i];
            assert_eq!(g.reflect_map[j], i);
            assert_ne!(i, j);
            assert_eq!(g.nodes[j][2], -g.nodes[i][2]);
            assert_eq!(g.nodes[j][0], g.nodes[i][0]);
        }
    }

    #[test]
    fn odd_axis_count_rejected() {
        assert!(build_grid(1.0, 5).is_err());
        assert!(build_grid(0.0, 4).is_err());
    }

    #[test]
    fn weights_sum_to_box_volume() {
        let g = build_grid(3.0, 10).unwrap();
        let s: f64 = g.quad_weights.iter().sum();
        assert!((s - 216.0).abs() < 1e-10);
    }

    #[test]
    fn midpoint_rule_exact_for_linear_per_axis() {
        let g = build_grid(2.0, 6).unwrap();
        let f = g.map(|v| 1.0 + 2.0 * v[0] - v[1] + 0.5 * v[0] * v[1] * v[2]);
        assert!((g.integrate(&f) - 64.0).abs() < 1e-11);
    }

    #[test]
    fn reflection_preserves_integrals() {
        let g = build_grid(4.0, 8).unwrap();
        let f = g.map(|v| (v[2] + 0.3).exp() * (1.0 + v[0]));
        assert!((g.integrate(&f) - g.integrate(&g.reflect(&f))).abs() < 1e-12);
    }
}
