//! One-dimensional quadrature rules.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Concatenates rules on adjacent panels.
    pub fn append(&mut self, other: &Rule) {
        self.nodes.extend_from_slice(&other.nodes);
        self.weights.extend_from_slice(&other.weights);
    }
}

/// Gauss–Legendre rule with `n` points on `[a, b]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1, "Gauss-Legendre needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    Rule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule over consecutive breakpoints.
pub fn composite(breaks: &[f64], per_panel: usize) -> Rule {
    let mut r = Rule::default();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            r.append(&gauss_legendre(per_panel, w[0], w[1]));
        }
    }
    r
}

/// Periodic trapezoid rule with `n` points on `[0, 2 pi)`.
pub fn trapezoid_periodic(n: usize, offset: f64) -> Rule {
    let h = 2.0 * PI / n as f64;
    Rule {
        nodes: (0..n).map(|k| (k as f64 + offset) * h).collect(),
        weights: vec![h; n],
    }
}

/// Quintic smoothstep: 0 below 0, 1 above 1, `C^2` in between.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// Derivative of [`smoothstep`].
pub fn smoothstep_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (1.0 - x) * (1.0 - x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_high_degree() {
        for n in [1usize, 2, 5, 8, 13] {
            let r = gauss_legendre(n, -1.0, 2.0);
            for deg in 0..(2 * n) {
                let exact =
                    (2f64.powi(deg as i32 + 1) - (-1f64).powi(deg as i32 + 1)) / (deg + 1) as f64;
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!(
                    (got - exact).abs() < 1e-12 * exact.abs().max(1.0),
                    "n={n} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn gl_nodes_sorted_inside() {
        let r = gauss_legendre(20, 0.0, 1.0);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes[0] > 0.0 && r.nodes[19] < 1.0);
    }

    #[test]
    fn trapezoid_exact_for_trig() {
        let r = trapezoid_periodic(8, 0.5);
        assert!((r.integrate(|x| x.cos().powi(2)) - PI).abs() < 1e-13);
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        let g = gauss_legendre(6, 0.0, 1.0);
        assert!((g.integrate(smoothstep_prime) - 1.0).abs() < 1e-14);
    }
}
