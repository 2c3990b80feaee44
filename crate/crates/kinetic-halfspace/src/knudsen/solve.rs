use serde::{Deserialize, Serialize};

use super::decay::{decay_report, DecayReport};
use super::direct::solve_direct;
use super::mesh::EtaMesh;
use super::problem::{upsilon, KnudsenProblem};
use super::shift::{constraint_shift, ShiftOutcome};
use super::transport::{Penalty, Transport};
use crate::error::{Error, Result};
use crate::krylov::GmresParams;
use crate::macro_micro::{MacroCoeffs, ProjectionBasis};
use crate::state::{maxwellian_on, weight_w_on};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Characteristic sweeps with the bounce closure, `K` applied lagged.
    #[default]
    Sweep,
    /// Sparse LU of the assembled discrete operator.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSpec {
    Graded {
        cells: usize,
        first: f64,
    },
    Nested {
        first: f64,
        max_width: f64,
        growth: f64,
    },
}

impl MeshSpec {
    pub fn build(&self, d: f64) -> Result<EtaMesh> {
        match *self {
            MeshSpec::Graded { cells, first } => EtaMesh::graded(d, cells, first),
            MeshSpec::Nested {
                first,
                max_width,
                growth,
            } => EtaMesh::nested(d, first, max_width, growth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnudsenParams {
    pub backend: Backend,
    /// Krylov acceleration of the sweep iteration; plain lagged iteration otherwise.
    pub krylov: bool,
    /// Penalization stages preceding the final `delta = 0` solve.
    pub deltas: Vec<f64>,
    pub d_schedule: Vec<f64>,
    pub mesh: MeshSpec,
    /// Boundary damping `1 - 1/n` of the final stage; `None` is exact reflection.
    pub n: Option<f64>,
    pub bounce_cap: Option<f64>,
    pub tol: f64,
    /// Relative residual target of the penalized warm-up stages.
    pub stage_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Start, cap and stopping increment of the `n`-doubling limit. Increments
    /// fall like `1/n`, so the cap must sit well above `1 / damping_tol`.
    pub n_start: f64,
    pub n_max: f64,
    pub damping_tol: f64,
    pub ks: Vec<f64>,
    pub fit_from: f64,
}

impl Default for KnudsenParams {
    fn default() -> Self {
        KnudsenParams {
            backend: Backend::Sweep,
            krylov: true,
            deltas: vec![1e-2, 1e-3],
            d_schedule: vec![20.0],
            mesh: MeshSpec::Graded {
                cells: 128,
                first: 0.05,
            },
            n: None,
            bounce_cap: Some(20.0),
            tol: 1e-11,
            stage_tol: 1e-7,
            restart: 100,
            max_iter: 3000,
            n_start: 4.0,
            n_max: 1e8,
            damping_tol: 1e-6,
            ks: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            fit_from: 5.0,
        }
    }
}

impl KnudsenParams {
    fn gmres(&self) -> GmresParams {
        GmresParams {
            restart: self.restart,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

/// Nodal solution of one penalized, damped stage.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub mesh: EtaMesh,
    pub penalty: Penalty,
    pub backend: Backend,
    /// Node-major values `f[k * nv + i]`.
    pub nodes: Vec<f64>,
    pub iterations: usize,
    /// Relative Krylov residual or last weighted update.
    pub solver_residual: f64,
    pub cell_residual: f64,
    pub wall_residual: f64,
}

/// Lifted source at every mesh node.
pub fn lifted_on_mesh(problem: &KnudsenProblem, mesh: &EtaMesh) -> Vec<f64> {
    mesh.nodes
        .iter()
        .flat_map(|&e| problem.lifted_source(e))
        .collect()
}

/// One truncated, penalized, damped solve.
pub fn solve_truncated(
    problem: &KnudsenProblem,
    mesh: &EtaMesh,
    g_nodes: &[f64],
    penalty: Penalty,
    params: &KnudsenParams,
    warm: Option<&[f64]>,
) -> Result<TruncatedSolution> {
    if !(penalty.delta >= 0.0 && penalty.delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {}",
            penalty.delta
        )));
    }
    if let Some(n) = penalty.n {
        if !(n > 1.0) {
            return Err(Error::InvalidParameter(format!("n must exceed 1, got {n}")));
        }
    }
    let op = &*problem.op0;
    let nv = op.len();
    let cap = if params.backend == Backend::Direct {
        None
    } else {
        params.bounce_cap
    };
    let tr = Transport::new(op, mesh, penalty, cap);
    let gbar = tr.node_average(g_nodes);
    let (nodes, iterations, solver_residual) = match params.backend {
        Backend::Direct => (solve_direct(&tr, &gbar)?, 1, 0.0),
        Backend::Sweep if params.krylov => {
            let warm_avg = warm.map(|w| tr.averages_from_nodes(w));
            let (nodes, _, rep) = tr.solve_krylov(&gbar, warm_avg.as_deref(), params.gmres())?;
            (nodes, rep.iterations, rep.relative_residual)
        }
        Backend::Sweep => {
            let w = weight_w_on(&problem.ws, &op.state, &op.grid)?;
            let warm_avg = warm.map(|w| tr.averages_from_nodes(w));
            let (nodes, _, it, last) =
                tr.solve_picard(&gbar, &w, warm_avg.as_deref(), params.tol, params.max_iter)?;
            (nodes, it, last)
        }
    };
    debug_assert_eq!(nodes.len(), (mesh.cells() + 1) * nv);
    let (cell_residual, wall_residual) = tr.residual(&nodes, &gbar);
    Ok(TruncatedSolution {
        mesh: mesh.clone(),
        penalty,
        backend: params.backend,
        nodes,
        iterations,
        solver_residual,
        cell_residual,
        wall_residual,
    })
}

/// `sup |w_l f|` over all nodes of a node-major field.
pub fn weighted_sup_field(problem: &KnudsenProblem, f: &[f64]) -> Result<f64> {
    let w = weight_w_on(&problem.ws, &problem.op0.state, &problem.op0.grid)?;
    let nv = w.len();
    Ok(f.iter()
        .enumerate()
        .map(|(p, x)| (w[p % nv] * x).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DampingStep {
    pub n: f64,
    pub iterations: usize,
    /// Weighted sup distance to the previous `n`.
    pub increment: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DampingLimit {
    pub solution: TruncatedSolution,
    pub steps: Vec<DampingStep>,
}

/// Doubles `n` until successive solutions agree to `damping_tol`, then
/// solves with exact reflection.
pub fn limit_boundary_damping(
    problem: &KnudsenProblem,
    mesh: &EtaMesh,
    g_nodes: &[f64],
    delta: f64,
    params: &KnudsenParams,
) -> Result<DampingLimit> {
    let mut steps = Vec::new();
    let mut prev: Option<TruncatedSolution> = None;
    let mut n = params.n_start;
    loop {
        let sol = solve_truncated(
            problem,
            mesh,
            g_nodes,
            Penalty { delta, n: Some(n) },
            params,
            prev.as_ref().map(|p| &p.nodes[..]),
        )?;
        let increment = match &prev {
            Some(p) => {
                let diff: Vec<f64> = sol.nodes.iter().zip(&p.nodes).map(|(a, b)| a - b).collect();
                Some(weighted_sup_field(problem, &diff)?)
            }
            None => None,
        };
        steps.push(DampingStep {
            n,
            iterations: sol.iterations,
            increment,
        });
        prev = Some(sol);
        if increment.is_some_and(|x| x <= params.damping_tol) {
            break;
        }
        n *= 2.0;
        if n > params.n_max {
            let last = increment.unwrap_or(f64::INFINITY);
            return Err(Error::NoConvergence {
                iterations: steps.len(),
                last,
            });
        }
    }
    let warm = prev.map(|p| p.nodes);
    let solution = solve_truncated(
        problem,
        mesh,
        g_nodes,
        Penalty { delta, n: None },
        params,
        warm.as_deref(),
    )?;
    steps.push(DampingStep {
        n: f64::INFINITY,
        iterations: solution.iterations,
        increment: None,
    });
    Ok(DampingLimit { solution, steps })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub d: f64,
    pub delta: f64,
    pub n: Option<f64>,
    pub backend: Backend,
    pub iterations: usize,
    pub solver_residual: f64,
    pub cell_residual: f64,
    pub wall_residual: f64,
    pub phi: [f64; 4],
    pub fluxes_before: [f64; 4],
    pub fluxes_after: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainRecord {
    pub d: f64,
    pub cells: usize,
    /// `sup_eta ||w_l frak_f||` of this domain.
    pub weighted_sup: f64,
    /// Weighted sup distance to the previous `d` on the common interval.
    pub difference: Option<f64>,
    /// Weighted sup distance between the `delta = 0` solution and the linear
    /// Richardson extrapolation of the last two penalized stages.
    pub richardson_gap: Option<f64>,
    /// `(k, sup_eta (1 + eta)^k ||w_l frak_f||)` for every `k` of the parameters.
    pub decay_sups: Vec<[f64; 2]>,
}

/// Converged half-space profile.
#[derive(Debug, Clone)]
pub struct KnudsenSolution {
    pub mesh: EtaMesh,
    /// `frak_f = f + Upsilon f_b`, node-major.
    pub field: Vec<f64>,
    /// Shifted homogeneous part `f`.
    pub f: Vec<f64>,
    pub shift: ShiftOutcome,
    pub macro_profile: Vec<MacroCoeffs>,
    /// `<v_3 sqrt(mu_0), f> / (rho T)` at every node.
    pub b3: Vec<f64>,
    /// Largest tangential-momentum and energy flux of `f` over the mesh.
    pub flux_orthogonality: f64,
    pub cell_residual: f64,
    pub wall_residual: f64,
    pub history: Vec<StageRecord>,
    pub domains: Vec<DomainRecord>,
}

impl KnudsenSolution {
    pub fn nv(&self) -> usize {
        self.field.len() / self.mesh.nodes.len()
    }

    /// Wall trace `frak_f(0, .)`.
    pub fn trace(&self) -> &[f64] {
        &self.field[..self.nv()]
    }

    pub fn b3_max(&self) -> f64 {
        self.b3.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Linear interpolation of the field at `eta`.
    pub fn field_at(&self, eta: f64) -> Vec<f64> {
        interpolate(&self.mesh, &self.field, self.nv(), eta)
    }

    pub fn decay(
        &self,
        problem: &KnudsenProblem,
        ks: &[f64],
        fit_from: f64,
    ) -> Result<DecayReport> {
        decay_report(
            &self.mesh,
            &self.field,
            &problem.op0,
            &problem.ws,
            ks,
            fit_from,
        )
    }
}

fn interpolate(mesh: &EtaMesh, f: &[f64], nv: usize, eta: f64) -> Vec<f64> {
    let (k, s) = mesh.locate(eta);
    (0..nv)
        .map(|i| (1.0 - s) * f[k * nv + i] + s * f[(k + 1) * nv + i])
        .collect()
}

/// Flux diagnostics of a node-major field: `b_3` and the worst of
/// `<v_3 (v_i - u_i) sqrt(mu), f>` (`i = 1, 2`) and `<v_3 (|v - u|^2 - 5T) sqrt(mu), f>`.
pub fn flux_diagnostics(problem: &KnudsenProblem, f: &[f64]) -> (Vec<f64>, f64) {
    let op = &problem.op0;
    let st = op.state;
    let grid = &op.grid;
    let nv = op.len();
    let sm: Vec<f64> = maxwellian_on(&st, grid).iter().map(|m| m.sqrt()).collect();
    let mut tests = vec![vec![0.0; nv]; 4];
    for i in 0..nv {
        let v = grid.nodes[i];
        let d = [v[0] - st.u[0], v[1] - st.u[1], v[2] - st.u[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let w = grid.quad_weights[i] * v[2] * sm[i];
        tests[0][i] = w;
        tests[1][i] = w * d[0];
        tests[2][i] = w * d[1];
        tests[3][i] = w * (r2 - 5.0 * st.temp);
    }
    let mut b3 = Vec::with_capacity(f.len() / nv);
    let mut worst: f64 = 0.0;
    for slice in f.chunks(nv) {
        let m: Vec<f64> = tests
            .iter()
            .map(|t| t.iter().zip(slice).map(|(a, b)| a * b).sum())
            .collect();
        b3.push(m[0] / (st.rho * st.temp));
        worst = worst.max(m[1].abs()).max(m[2].abs()).max(m[3].abs());
    }
    (b3, worst)
}

fn stage_record(d: f64, sol: &TruncatedSolution, shift: &ShiftOutcome) -> StageRecord {
    StageRecord {
        d,
        delta: sol.penalty.delta,
        n: sol.penalty.n,
        backend: sol.backend,
        iterations: sol.iterations,
        solver_residual: sol.solver_residual,
        cell_residual: sol.cell_residual,
        wall_residual: sol.wall_residual,
        phi: shift.phi,
        fluxes_before: shift.fluxes_before,
        fluxes_after: shift.fluxes_after,
    }
}

/// Full pipeline: for every `d`, penalized warm-up stages, the final
/// `delta = 0` solve, constraint shift after each stage, then
/// `frak_f = f + Upsilon f_b`.
pub fn solve_halfspace(
    problem: &KnudsenProblem,
    params: &KnudsenParams,
) -> Result<KnudsenSolution> {
    if params.d_schedule.is_empty() {
        return Err(Error::InvalidParameter("empty d schedule".into()));
    }
    if let Some(d) = params.d_schedule.iter().find(|&&d| d < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "d must be at least 1, got {d}"
        )));
    }
    let op = &*problem.op0;
    let nv = op.len();
    let basis = ProjectionBasis::new(&op.state, &op.grid)?;
    let mut history = Vec::new();
    let mut domains: Vec<DomainRecord> = Vec::new();
    let mut previous: Option<KnudsenSolution> = None;
    for &d in &params.d_schedule {
        let mesh = params.mesh.build(d)?;
        let g_nodes = lifted_on_mesh(problem, &mesh);
        let mut warm: Option<Vec<f64>> = None;
        let mut penalized: Vec<(f64, Vec<f64>)> = Vec::new();
        let stage_params = KnudsenParams {
            tol: params.stage_tol,
            ..params.clone()
        };
        for &delta in &params.deltas {
            let mut sol = solve_truncated(
                problem,
                &mesh,
                &g_nodes,
                Penalty { delta, n: params.n },
                &stage_params,
                warm.as_deref(),
            )?;
            let sh = constraint_shift(&problem.shift, &mut sol.nodes, nv);
            history.push(stage_record(d, &sol, &sh));
            penalized.push((delta, sol.nodes.clone()));
            warm = Some(sol.nodes);
        }
        let mut sol = solve_truncated(
            problem,
            &mesh,
            &g_nodes,
            Penalty {
                delta: 0.0,
                n: params.n,
            },
            params,
            warm.as_deref(),
        )?;
        let shift = constraint_shift(&problem.shift, &mut sol.nodes, nv);
        history.push(stage_record(d, &sol, &shift));
        let richardson_gap = match penalized.as_slice() {
            [.., (d1, f1), (d2, f2)] => {
                let ex: Vec<f64> = f1
                    .iter()
                    .zip(f2)
                    .zip(&sol.nodes)
                    .map(|((a, b), c)| c - (b + (b - a) * d2 / (d1 - d2)))
                    .collect();
                Some(weighted_sup_field(problem, &ex)?)
            }
            _ => None,
        };
        let mut field = sol.nodes.clone();
        for (k, &eta) in mesh.nodes.iter().enumerate() {
            let u = upsilon(eta);
            if u != 0.0 {
                for i in 0..nv {
                    field[k * nv + i] += u * problem.f_b[i];
                }
            }
        }
        let (b3, flux_orthogonality) = flux_diagnostics(problem, &sol.nodes);
        let macro_profile = field.chunks(nv).map(|s| basis.macro_coeffs(s)).collect();
        let current = KnudsenSolution {
            mesh: mesh.clone(),
            field,
            f: sol.nodes,
            shift,
            macro_profile,
            b3,
            flux_orthogonality,
            cell_residual: sol.cell_residual,
            wall_residual: sol.wall_residual,
            history: Vec::new(),
            domains: Vec::new(),
        };
        let difference = match &previous {
            Some(p) => {
                let mut worst: f64 = 0.0;
                let w = weight_w_on(&problem.ws, &op.state, &op.grid)?;
                for (k, &eta) in p.mesh.nodes.iter().enumerate() {
                    let here = current.field_at(eta);
                    for i in 0..nv {
                        worst = worst.max((w[i] * (here[i] - p.field[k * nv + i])).abs());
                    }
                }
                Some(worst)
            }
            None => None,
        };
        domains.push(DomainRecord {
            d,
            cells: mesh.cells(),
            weighted_sup: weighted_sup_field(problem, &current.field)?,
            difference,
            richardson_gap,
            decay_sups: current
                .decay(problem, &params.ks, params.fit_from)?
                .rows
                .iter()
                .map(|r| [r.k, r.weighted_sup])
                .collect(),
        });
        previous = Some(current);
    }
    let mut out = previous.expect("non-empty schedule");
    out.history = history;
    out.domains = domains;
    Ok(out)
}
