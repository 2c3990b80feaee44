//! Restarted GMRES for the matrix-free transport systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresParams {
    pub restart: usize,
    pub max_iter: usize,
    /// Relative residual target `||b - A x|| / ||b||`.
    pub tol: f64,
}

impl Default for GmresParams {
    fn default() -> Self {
        GmresParams {
            restart: 40,
            max_iter: 800,
            tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from the content of `x`.
///
/// Consistent singular systems are fine: the iteration stays in the Krylov
/// space of the initial residual.
pub fn gmres<A>(apply: A, b: &[f64], x: &mut [f64], p: GmresParams) -> Result<GmresReport>
where
    A: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresReport {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = p.restart.max(1);
    let mut total = 0;
    let mut rel;
    loop {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / bn;
        if rel <= p.tol {
            return Ok(GmresReport {
                iterations: total,
                relative_residual: rel,
            });
        }
        if total >= p.max_iter {
            return Err(Error::NoConvergence {
                iterations: total,
                last: rel,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut s = vec![0.0; m + 1];
        s[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&basis[k]);
            for (j, vj) in basis.iter().enumerate() {
                let hj = dot(&w, vj);
                h[j][k] = hj;
                w.iter_mut().zip(vj).for_each(|(a, b)| *a -= hj * b);
            }
            // One reorthogonalization pass keeps the basis clean near convergence.
            for (j, vj) in basis.iter().enumerate() {
                let c = dot(&w, vj);
                h[j][k] += c;
                w.iter_mut().zip(vj).for_each(|(a, b)| *a -= c * b);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let den = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if den == 0.0 {
                break;
            }
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = 0.0;
            s[k + 1] = -sn[k] * s[k];
            s[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            let done = s[k + 1].abs() / bn <= p.tol || total >= p.max_iter;
            if wn == 0.0 || done {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = s[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i];
            }
        }
        if k_used == 0 {
            return Err(Error::NoConvergence {
                iterations: total,
                last: rel,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [2.0, 5.0, 1.0], [0.0, -1.0, 3.0]];
        let apply = |x: &[f64]| {
            (0..3)
                .map(|i| (0..3).map(|j| a[i][j] * x[j]).sum())
                .collect()
        };
        let b = [1.0, 2.0, 3.0];
        let mut x = vec![0.0; 3];
        let rep = gmres(
            apply,
            &b,
            &mut x,
            GmresParams {
                restart: 2,
                max_iter: 50,
                tol: 1e-13,
            },
        )
        .unwrap();
        assert!(rep.relative_residual <= 1e-13);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn consistent_singular_system() {
        // diag(1, 2, 0) with b in its range.
        let apply = |x: &[f64]| vec![x[0], 2.0 * x[1], 0.0];
        let mut x = vec![0.0; 3];
        gmres(apply, &[1.0, 1.0, 0.0], &mut x, GmresParams::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12 && x[2] == 0.0);
    }
}
