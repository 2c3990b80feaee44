use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assembly::orthonormal_columns;
use super::CollisionOperator;
use crate::error::{Error, Result};
use crate::macro_micro::invariant_vectors;

/// Smallest `nu`-weighted Rayleigh quotient of `L` off the null space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coercivity {
    pub c0: f64,
    pub iterations: usize,
    /// Change of the smallest Ritz value over the last iteration.
    pub last_change: f64,
}

/// `c0 = min <L h, h> / ||h||_nu^2` over `h` orthogonal to the collision
/// invariants, from Lanczos on `nu^{-1/2} L nu^{-1/2}` restricted to the
/// complement of `nu^{-1/2} span(chi)`, with full reorthogonalization.
pub fn coercivity_constant(
    op: &CollisionOperator,
    max_iter: usize,
    seed: u64,
) -> Result<Coercivity> {
    let n = op.len();
    let chi = invariant_vectors(&op.state, &op.grid);
    let isq: Vec<f64> = op.nu.iter().map(|x| 1.0 / x.sqrt()).collect();
    let z = orthonormal_columns(
        &chi.iter()
            .map(|c| c.iter().zip(&isq).map(|(a, b)| a * b).collect())
            .collect::<Vec<Vec<f64>>>(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q0: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let orth = |w: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for b in basis {
            let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    };
    orth(&mut q0, &z);
    orth(&mut q0, &z);
    normalize(&mut q0);
    let apply = |y: &[f64]| -> Vec<f64> {
        let h: Vec<f64> = y.iter().zip(&isq).map(|(a, b)| a * b).collect();
        let lh = op.apply_l(&h);
        lh.iter().zip(&isq).map(|(a, b)| a * b).collect()
    };
    let max_iter = max_iter.min(n.saturating_sub(z.len())).max(1);
    let mut qs: Vec<Vec<f64>> = vec![q0];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev = f64::INFINITY;
    let mut last_change = f64::INFINITY;
    let mut theta = f64::INFINITY;
    for it in 0..max_iter {
        let q = &qs[it];
        let mut w = apply(q);
        let a: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for _ in 0..2 {
            orth(&mut w, &z);
            orth(&mut w, &qs);
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        theta = smallest_tridiag(&alpha, &beta)?;
        last_change = (theta - prev).abs();
        prev = theta;
        if (it >= 20 && last_change <= 1e-12 * theta.abs().max(1.0)) || b < 1e-12 {
            return Ok(Coercivity {
                c0: theta,
                iterations: it + 1,
                last_change,
            });
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        qs.push(w);
    }
    if last_change > 1e-6 * theta.abs().max(1e-12) {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            last: last_change,
        });
    }
    Ok(Coercivity {
        c0: theta,
        iterations: max_iter,
        last_change,
    })
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

fn smallest_tridiag(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let ev = t
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Singular(format!("tridiagonal eigensolve failed: {e:?}")))?;
    Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
}
