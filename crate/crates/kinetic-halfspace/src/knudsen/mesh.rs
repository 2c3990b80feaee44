use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mesh on `[0, d]` refined towards the wall `eta = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaMesh {
    pub d: f64,
    pub nodes: Vec<f64>,
}

impl EtaMesh {
    /// `cells` cells with geometrically growing widths and first width `first`
    /// (uniform when `cells * first >= d`).
    pub fn graded(d: f64, cells: usize, first: f64) -> Result<Self> {
        if !(d > 0.0 && first > 0.0) || cells == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad mesh: d = {d}, cells = {cells}, first = {first}"
            )));
        }
        let n = cells as f64;
        let widths: Vec<f64> = if first * n >= d {
            vec![d / n; cells]
        } else {
            // first * (r^n - 1) / (r - 1) = d
            let total = |r: f64| first * ((n * r.ln()).exp_m1() / (r - 1.0));
            let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
            while total(hi) < d {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) < d {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            (0..cells).map(|k| first * r.powi(k as i32)).collect()
        };
        Ok(Self::from_widths(d, &widths))
    }

    /// Widths grow by `growth` from `first` up to `max_width`, then stay
    /// uniform. Meshes for different `d` share all nodes below the smaller `d`.
    pub fn nested(d: f64, first: f64, max_width: f64, growth: f64) -> Result<Self> {
        if !(d > 0.0 && first > 0.0 && max_width >= first && growth >= 1.0) {
            return Err(Error::InvalidParameter("bad nested mesh parameters".into()));
        }
        let mut widths = Vec::new();
        let (mut x, mut w) = (0.0, first);
        while x + 1e-12 < d {
            let step = w.min(d - x);
            // Avoid a sliver as the last cell.
            if d - x - step < 0.25 * w && d - x - step > 0.0 {
                widths.push(d - x);
                break;
            }
            widths.push(step);
            x += step;
            w = (w * growth).min(max_width);
        }
        Ok(Self::from_widths(d, &widths))
    }

    fn from_widths(d: f64, widths: &[f64]) -> Self {
        let mut nodes = Vec::with_capacity(widths.len() + 1);
        let mut x = 0.0;
        nodes.push(0.0);
        for w in widths {
            x += w;
            nodes.push(x);
        }
        *nodes.last_mut().unwrap() = d;
        EtaMesh { d, nodes }
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn first_width(&self) -> f64 {
        self.width(0)
    }

    /// Cell index and the local coordinate in `[0, 1]` of `eta`.
    pub fn locate(&self, eta: f64) -> (usize, f64) {
        let eta = eta.clamp(0.0, self.d);
        let k = match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&eta).unwrap())
        {
            Ok(i) => i.min(self.cells() - 1),
            Err(i) => i.saturating_sub(1).min(self.cells() - 1),
        };
        (k, (eta - self.nodes[k]) / self.width(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_hits_first_width_and_length() {
        let m = EtaMesh::graded(20.0, 128, 0.05).unwrap();
        assert_eq!(m.cells(), 128);
        assert!((m.first_width() - 0.05).abs() < 1e-12);
        assert_eq!(*m.nodes.last().unwrap(), 20.0);
        assert!(m.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn nested_meshes_share_nodes() {
        let a = EtaMesh::nested(10.0, 0.05, 0.5, 1.2).unwrap();
        let b = EtaMesh::nested(20.0, 0.05, 0.5, 1.2).unwrap();
        for x in &a.nodes[..a.nodes.len() - 1] {
            assert!(b.nodes.iter().any(|y| (x - y).abs() < 1e-12));
        }
        let (k, s) = b.locate(a.nodes[3]);
        assert!(s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9, "{k} {s}");
    }
}
