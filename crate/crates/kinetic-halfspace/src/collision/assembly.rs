use faer::Mat;
use rayon::prelude::*;

use super::kernel::KernelEval;
use super::quadrature::{RadialMode, SampleRule};
use super::{AssemblyDiagnostics, CollisionModel, CollisionOperator};
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::interp::stencil;
use crate::macro_micro::invariant_vectors;
use crate::state::{maxwellian_on, FluidState};
use crate::symmetry::{orbits, stabilizer, Orbits};

/// How the matrix of `K` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyScheme {
    /// Collocation of the `(u, omega)` quadrature, post-collision values
    /// interpolated from `h / sqrt(mu)`. Exact on the invariants before
    /// symmetrization.
    #[default]
    Collocation,
    /// Point values of the closed-form symmetric kernel off the diagonal;
    /// diagonal fixed so that `K sqrt(mu) = nu sqrt(mu)` on the lattice
    /// extended past the box. Symmetric by construction but only
    /// `O(h^2)`-accurate near the kernel singularity.
    Nystrom,
}

/// Options for [`assemble_k_with`].
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub scheme: AssemblyScheme,
    /// Keep the unsymmetrized matrix in [`CollisionOperator::k_raw`].
    pub keep_raw: bool,
    /// Fail when the raw relative asymmetry exceeds this.
    pub asymmetry_threshold: f64,
    /// Symmetrize before and after the conservative projection.
    pub symmetrize: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            scheme: AssemblyScheme::Collocation,
            keep_raw: false,
            asymmetry_threshold: 0.6,
            symmetrize: true,
        }
    }
}

impl AssemblyOptions {
    pub fn nystrom() -> Self {
        AssemblyOptions {
            scheme: AssemblyScheme::Nystrom,
            asymmetry_threshold: 1e-6,
            ..Default::default()
        }
    }
}

struct RowOut {
    nu: f64,
    row: Vec<f64>,
    samples: usize,
}

/// One row of the raw kernel: `K(i, j) = sum_s w_s sqrt(mu_i)/sqrt(mu_j)
/// [I_j(v') + I_j(u') - I_j(u)]` with `I_j` the stencil weights, so that
/// `K h` interpolates `h / sqrt(mu)`. Samples with any of `u, v', u'` outside
/// the box are dropped from every term, which keeps the collision
/// invariants in the null space exactly.
fn kernel_row(
    rule: &SampleRule,
    grid: &VelocityGrid,
    sqrt_mu: &[f64],
    i: usize,
    mode: RadialMode,
) -> RowOut {
    let n = grid.n_axis;
    let p = rule.q.stencil_points;
    let v = grid.nodes[i];
    let mut acc = vec![0.0; grid.len()];
    let mut nu = 0.0;
    let mut samples = 0usize;
    rule.for_each_u(&v, mode, |u, wu, r, ghat| {
        let Some(su) = stencil(grid, u, p) else {
            return;
        };
        let mut wsum = 0.0;
        rule.for_each_omega(&v, u, r, ghat, |vp, up, wo| {
            samples += 1;
            let (Some(sv), Some(sp)) = (stencil(grid, vp, p), stencil(grid, up, p)) else {
                return;
            };
            let w = wu * wo;
            wsum += w;
            sv.for_each(n, |j, x| acc[j] += w * x);
            sp.for_each(n, |j, x| acc[j] += w * x);
        });
        nu += wsum;
        su.for_each(n, |j, x| acc[j] -= wsum * x);
    });
    let si = sqrt_mu[i];
    for (a, &sj) in acc.iter_mut().zip(sqrt_mu) {
        *a = if sj > 0.0 { *a * si / sj } else { 0.0 };
    }
    RowOut {
        nu,
        row: acc,
        samples,
    }
}

/// Nystrom row `K(i, j) = h^3 k(v_i, v_j)`, `j != i`. The diagonal makes the
/// row reproduce `nu_i sqrt(mu_i)` on `sqrt(mu)` summed over the lattice
/// extended by `ghost` layers, which absorbs the lattice error of the
/// integrable singularity at `w = v_i`.
fn nystrom_row(
    kev: &KernelEval,
    grid: &VelocityGrid,
    nu_i: f64,
    i: usize,
    ghost: usize,
) -> Vec<f64> {
    let n = grid.n_axis as isize;
    let h3 = grid.h.powi(3);
    let v = grid.nodes[i];
    let mut row = vec![0.0; grid.len()];
    let sqrt_mu = |w: &[f64; 3]| crate::state::maxwellian(&kev.state, w).sqrt();
    let si = sqrt_mu(&v);
    let mut sum = 0.0;
    let g = ghost as isize;
    for a in -g..n + g {
        for b in -g..n + g {
            for c in -g..n + g {
                let inside = (0..n).contains(&a) && (0..n).contains(&b) && (0..n).contains(&c);
                let w = [
                    grid.axis_coord_at(a),
                    grid.axis_coord_at(b),
                    grid.axis_coord_at(c),
                ];
                if inside {
                    let j = grid.index(a as usize, b as usize, c as usize);
                    if j == i {
                        continue;
                    }
                    let x = h3 * kev.k(&v, &w);
                    row[j] = x;
                    sum += x * sqrt_mu(&w);
                } else if !kev.negligible(&v, &w) {
                    sum += h3 * kev.k(&v, &w) * sqrt_mu(&w);
                }
            }
        }
    }
    row[i] = nu_i - sum / si;
    row
}

fn assemble_nystrom(kev: &KernelEval, grid: &VelocityGrid) -> (Vec<f64>, Mat<f64>, usize, usize) {
    let group = stabilizer(&kev.state.u);
    let orb = orbits(grid, &group);
    let n = grid.len();
    let ghost = (4.0 * kev.state.temp.sqrt() / grid.h).ceil() as usize;
    let mut k = Mat::<f64>::zeros(n, n);
    let mut nu = vec![0.0; n];
    for chunk in orb.reps.chunks(256) {
        let rows: Vec<(usize, f64, Vec<f64>)> = chunk
            .par_iter()
            .map(|&i| {
                let nu_i = kev.nu(&grid.nodes[i]);
                let row = nystrom_row(kev, grid, nu_i, i, ghost);
                (i, nu_i, symmetrize_row(&orb, i, &row))
            })
            .collect();
        for (i, nu_i, row) in rows {
            for p in &orb.perms {
                let gi = p[i];
                nu[gi] = nu_i;
                for (j, &x) in row.iter().enumerate() {
                    k[(gi, p[j])] = x;
                }
            }
        }
    }
    (nu, k, orb.reps.len(), group.len())
}

/// Averages a representative row over the stabilizer of its node so that
/// the filled matrix commutes exactly with the symmetry group.
fn symmetrize_row(orb: &Orbits, i: usize, row: &[f64]) -> Vec<f64> {
    let stab: Vec<&Vec<usize>> = orb.perms.iter().filter(|p| p[i] == i).collect();
    let mut out = vec![0.0; row.len()];
    for p in &stab {
        for (j, &x) in row.iter().enumerate() {
            out[p[j]] += x;
        }
    }
    let s = 1.0 / stab.len() as f64;
    out.iter_mut().for_each(|x| *x *= s);
    out
}

/// Assembles `(nu, K)` for a radial mode, exploiting the cube symmetries
/// that fix the bulk velocity.
fn assemble_raw(
    rule: &SampleRule,
    grid: &VelocityGrid,
    mode: RadialMode,
) -> (Vec<f64>, Mat<f64>, usize, usize, usize) {
    let sqrt_mu: Vec<f64> = maxwellian_on(&rule.state, grid)
        .iter()
        .map(|m| m.sqrt())
        .collect();
    let group = stabilizer(&rule.state.u);
    let orb = orbits(grid, &group);
    let n = grid.len();
    let mut k = Mat::<f64>::zeros(n, n);
    let mut nu = vec![0.0; n];
    let mut samples = 0;
    for chunk in orb.reps.chunks(256) {
        let rows: Vec<(usize, RowOut)> = chunk
            .par_iter()
            .map(|&i| {
                let mut r = kernel_row(rule, grid, &sqrt_mu, i, mode);
                r.row = symmetrize_row(&orb, i, &r.row);
                (i, r)
            })
            .collect();
        for (i, r) in rows {
            samples = samples.max(r.samples);
            for p in &orb.perms {
                let gi = p[i];
                nu[gi] = r.nu;
                for (j, &x) in r.row.iter().enumerate() {
                    k[(gi, p[j])] = x;
                }
            }
        }
    }
    (nu, k, orb.reps.len(), group.len(), samples)
}

/// Collision frequency `nu(v_i) = 2 pi beta0 int |v_i - u|^kappa mu(u) du`.
pub fn collision_frequency(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
) -> Result<Vec<f64>> {
    model.validate()?;
    state.validate()?;
    let kev = KernelEval::new(*state, model.kappa, model.beta0);
    Ok(grid.nodes.par_iter().map(|v| kev.nu(v)).collect())
}

/// Collision frequency restricted to the collocation samples that stay in
/// the box; this is the `nu` consistent with the collocation matrix.
pub fn collocation_frequency(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
) -> Result<Vec<f64>> {
    model.validate()?;
    state.validate()?;
    let rule = SampleRule::new(*state, model.kappa, model.beta0, model.quad);
    let p = model.quad.stencil_points;
    let group = stabilizer(&state.u);
    let orb = orbits(grid, &group);
    let reps: Vec<(usize, f64)> = orb
        .reps
        .par_iter()
        .map(|&i| {
            let v = grid.nodes[i];
            let mut nu = 0.0;
            rule.for_each_u(&v, RadialMode::Full, |u, wu, r, ghat| {
                if stencil(grid, u, p).is_none() {
                    return;
                }
                rule.for_each_omega(&v, u, r, ghat, |vp, up, wo| {
                    if stencil(grid, vp, p).is_some() && stencil(grid, up, p).is_some() {
                        nu += wu * wo;
                    }
                });
            });
            (i, nu)
        })
        .collect();
    let mut nu = vec![0.0; grid.len()];
    for (i, x) in reps {
        for p in &orb.perms {
            nu[p[i]] = x;
        }
    }
    Ok(nu)
}

/// Assembles the operator with default options.
pub fn assemble_k(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
) -> Result<CollisionOperator> {
    assemble_k_with(model, state, grid, AssemblyOptions::default())
}

/// Assembles `L = nu - K` around `state`.
///
/// The raw matrix is symmetrized and then projected,
/// `L <- (I - Pi) L (I - Pi)` with `Pi` the orthogonal projector onto the
/// collision invariants, so the final operator is symmetric and annihilates
/// the invariants to roundoff. Both defects of the raw matrix are reported.
pub fn assemble_k_with(
    model: &CollisionModel,
    state: &FluidState,
    grid: &VelocityGrid,
    opts: AssemblyOptions,
) -> Result<CollisionOperator> {
    model.validate()?;
    state.validate()?;
    if grid.n_axis < model.quad.stencil_points {
        return Err(Error::InvalidParameter(
            "grid smaller than interpolation stencil".into(),
        ));
    }
    let (nu, mut k, reps, order, samples) = match opts.scheme {
        AssemblyScheme::Collocation => {
            let rule = SampleRule::new(*state, model.kappa, model.beta0, model.quad);
            assemble_raw(&rule, grid, RadialMode::Full)
        }
        AssemblyScheme::Nystrom => {
            let kev = KernelEval::new(*state, model.kappa, model.beta0);
            let (nu, k, reps, order) = assemble_nystrom(&kev, grid);
            (nu, k, reps, order, 0)
        }
    };
    let n = grid.len();
    let chi = invariant_vectors(state, grid);
    let null_res = |k: &Mat<f64>| -> f64 {
        chi.iter()
            .map(|c| {
                let kc = super::matvec(k, c);
                let r: f64 = kc
                    .iter()
                    .zip(c)
                    .zip(&nu)
                    .map(|((a, b), m)| (m * b - a).powi(2))
                    .sum();
                let s: f64 = c.iter().map(|x| x * x).sum();
                (r / s).sqrt()
            })
            .fold(0.0, f64::max)
    };
    let mut diag = AssemblyDiagnostics {
        raw_asymmetry: asymmetry(&k),
        raw_null_residual: null_res(&k),
        orbit_rows: reps,
        symmetry_order: order,
        samples_per_row: samples,
        ..Default::default()
    };
    if !(diag.raw_asymmetry <= opts.asymmetry_threshold) {
        return Err(Error::Asymmetry {
            asymmetry: diag.raw_asymmetry,
            threshold: opts.asymmetry_threshold,
        });
    }
    let k_raw = opts.keep_raw.then(|| k.clone());
    if opts.symmetrize {
        symmetrize(&mut k);
    }
    diag.symmetrized_null_residual = null_res(&k);
    conservative_projection(&mut k, &nu, &chi);
    if opts.symmetrize {
        symmetrize(&mut k);
    }
    diag.asymmetry = asymmetry(&k);
    diag.null_residual = null_res(&k);
    let sqrt_mu = maxwellian_on(state, grid)
        .iter()
        .map(|m| m.sqrt())
        .collect();
    debug_assert_eq!(k.nrows(), n);
    Ok(CollisionOperator {
        model: *model,
        state: *state,
        grid: grid.clone(),
        nu,
        k,
        sqrt_mu,
        diagnostics: diag,
        k_raw,
    })
}

/// `||A - A^T||_F / ||A||_F`.
pub(crate) fn asymmetry(a: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let (mut d, mut s) = (0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let x = a[(i, j)];
            s += x * x;
            if i < j {
                d += 2.0 * (x - a[(j, i)]).powi(2);
            }
        }
    }
    if s == 0.0 {
        0.0
    } else {
        (d / s).sqrt()
    }
}

pub(crate) fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

/// Replaces `K` by `nu - (I - Pi)(nu - K)(I - Pi)`.
fn conservative_projection(k: &mut Mat<f64>, nu: &[f64], chi: &[Vec<f64>]) {
    let n = nu.len();
    let q = orthonormal_columns(chi);
    let r = q.len();
    // Y = L Q with L = nu - K; C = Q^T Y.
    let mut y = Vec::with_capacity(r);
    for qc in &q {
        let kq = super::matvec(k, qc);
        y.push((0..n).map(|i| nu[i] * qc[i] - kq[i]).collect::<Vec<f64>>());
    }
    let mut c = vec![vec![0.0; r]; r];
    for a in 0..r {
        for b in 0..r {
            c[a][b] = q[a].iter().zip(&y[b]).map(|(x, z)| x * z).sum();
        }
    }
    // qc[a][j] = sum_b C[a][b] Q_b(j), so Q C Q^T (i, j) = sum_a Q_a(i) qc[a][j].
    let qc: Vec<Vec<f64>> = (0..r)
        .map(|a| {
            (0..n)
                .map(|j| (0..r).map(|b| c[a][b] * q[b][j]).sum())
                .collect()
        })
        .collect();
    for j in 0..n {
        for i in 0..n {
            let mut t = 0.0;
            for a in 0..r {
                t += y[a][i] * q[a][j] + q[a][i] * y[a][j] - q[a][i] * qc[a][j];
            }
            k[(i, j)] += t;
        }
    }
}

/// Euclidean modified Gram–Schmidt (twice, for stability).
pub(crate) fn orthonormal_columns(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &q {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-300 {
            w.iter_mut().for_each(|x| *x /= nrm);
            q.push(w);
        }
    }
    q
}

/// `K = K^m + K^c`, with `K^m` the part of the kernel with `|v - u| <= 2m`.
#[derive(Debug, Clone)]
pub struct CutoffSplit {
    pub m: f64,
    pub km: Mat<f64>,
    pub kc: Mat<f64>,
    /// `max_i sum_j |K^m_ij|`.
    pub km_sup: f64,
    pub kc_sup: f64,
}

/// Reassembles the short-range part with the weight `1 - chi_m(|v - u|)`
/// and returns `(K^m, K - K^m)`.
pub fn split_cutoff(op: &CollisionOperator, m: f64) -> Result<CutoffSplit> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "m must lie in (0, 1], got {m}"
        )));
    }
    let rule = SampleRule::new(op.state, op.model.kappa, op.model.beta0, op.model.quad);
    let (_, mut km, _, _, _) = assemble_raw(&rule, &op.grid, RadialMode::Cutoff(m));
    symmetrize(&mut km);
    let n = op.len();
    let kc = Mat::from_fn(n, n, |i, j| op.k[(i, j)] - km[(i, j)]);
    let km_sup = row_sup(&km);
    let kc_sup = row_sup(&kc);
    Ok(CutoffSplit {
        m,
        km,
        kc,
        km_sup,
        kc_sup,
    })
}

/// Induced sup-norm `max_i sum_j |A_ij|`.
pub fn row_sup(a: &Mat<f64>) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    for j in 0..a.ncols() {
        for (i, r) in rows.iter_mut().enumerate() {
            *r += a[(i, j)].abs();
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}
