//! Acceptance criteria as executable checks with pinned tolerances.
//!
//! Each criterion reads its grid, model and schedules from an
//! [`ExperimentConfig`] (see the `criterion-N` presets) and returns the
//! measured numbers next to their thresholds.

use std::sync::Arc;

use serde::Serialize;

use crate::collision::{assemble_k, coercivity_constant, split_cutoff, CollisionOperator};
use crate::config::{CrossCheck, ExperimentConfig};
use crate::error::{Error, Result};
use crate::euler::{acoustic_reference, init_euler, EulerField, EulerInit, EulerParams, Primitive};
use crate::expansion::{
    fit_slope, residual_sweep, solvability_residual, AssembleOptions, EulerSlices, ExpansionTerms,
};
use crate::knudsen::{
    datum_from_trace, lifted_on_mesh, solvable_odd_trace, solve_halfspace, solve_truncated,
    weighted_sup_field, Backend, KnudsenProblem, KnudsenSolution, MeshSpec, Penalty, SourceModel,
};
use crate::macro_micro::{transport_coefficients, PseudoInverse};

pub const ASYMMETRY_TOL: f64 = 1e-10;
pub const NULL_RESIDUAL_TOL: f64 = 1e-3;
pub const COERCIVITY_STABILITY: f64 = 0.2;
pub const CUTOFF_SLOPE_TOL: f64 = 0.7;
pub const IDENTITY_43_TOL: f64 = 1e-3;
pub const ISOTROPY_TOL: f64 = 1e-3;
/// "Machine precision" for the zero-data solve.
pub const ZERO_DATA_TOL: f64 = 1e-14;
pub const B3_TOL: f64 = 1e-8;
pub const FLUX_ORTHOGONALITY_TOL: f64 = 1e-6;
pub const FAR_FIELD_FLUX_TOL: f64 = 1e-8;
pub const CROSS_BACKEND_TOL: f64 = 1e-6;
/// Allowed factor between the observed ratio of successive `d`-differences and `2^{-1/2}`.
pub const D_DIFFERENCE_FACTOR: f64 = 3.0;
/// Decay weight `k` of the boundedness check and the allowed spread across `d`.
pub const BOUNDEDNESS_K: f64 = 4.0;
pub const BOUNDEDNESS_SPREAD: f64 = 2.0;
pub const CONSERVATION_TOL: f64 = 1e-12;
pub const ACOUSTIC_L2_TOL: f64 = 1e-4;
pub const ACOUSTIC_T_END: f64 = 0.2;
pub const ORDER_TOL: f64 = 0.5;
pub const EXPECTED_ORDER: f64 = 2.0;
/// Smallest relative solvability residual accepted as "order one" for the control.
pub const CONTROL_FLOOR: f64 = 0.1;
pub const EPS_SLOPE_MIN: f64 = 0.8;
pub const ABLATION_FACTOR: f64 = 5.0;

/// Wall-clock budget of each criterion in seconds, for reporting.
pub const RUNTIME_LIMITS: [f64; 8] = [120.0, 60.0, 60.0, 300.0, 600.0, 60.0, 120.0, 600.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Above => value > threshold,
        };
        Check {
            name: name.into(),
            value,
            threshold,
            relation,
            passed,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::AtMost, threshold)
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, threshold)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Supporting numbers that are not themselves pass/fail.
    pub details: serde_json::Value,
}

impl CriterionReport {
    fn new(id: u8, checks: Vec<Check>, details: serde_json::Value) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        CriterionReport {
            id,
            title: TITLES[id as usize - 1],
            passed,
            checks,
            details,
        }
    }

    /// `PASS criterion 3 (transport identity): a=..., b=...`
    pub fn summary_line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let op = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                    Relation::Above => ">",
                };
                let mark = if c.passed { "" } else { " !" };
                format!("{}={:.3e} {op} {:.1e}{mark}", c.name, c.value, c.threshold)
            })
            .collect();
        format!(
            "{} criterion {} ({}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            parts.join(", ")
        )
    }
}

pub const TITLES: [&str; 8] = [
    "collision operator validity",
    "cutoff-split scaling",
    "transport identity",
    "Knudsen solver structure",
    "Knudsen convergence and decay",
    "Euler solver",
    "Euler-from-solvability bridge",
    "eps-convergence",
];

pub fn run(id: u8, cfg: &ExperimentConfig) -> Result<CriterionReport> {
    match id {
        1 => collision_validity(cfg),
        2 => cutoff_scaling(cfg),
        3 => transport_identity(cfg),
        4 => knudsen_structure(cfg),
        5 => knudsen_convergence(cfg),
        6 => euler_solver(cfg),
        7 => solvability_bridge(cfg),
        8 => eps_convergence(cfg),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    }
}

fn operator(cfg: &ExperimentConfig) -> Result<CollisionOperator> {
    assemble_k(&cfg.model, &cfg.state, &cfg.grid.build()?)
}

fn collision_validity(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let op = operator(cfg)?;
    let c = coercivity_constant(&op, cfg.operator.coercivity_iterations, cfg.seed)?;
    let mut checks = vec![
        Check::at_most("asymmetry", op.diagnostics.asymmetry, ASYMMETRY_TOL),
        Check::at_most(
            "null_residual",
            op.diagnostics.null_residual,
            NULL_RESIDUAL_TOL,
        ),
        Check::new("c0", c.c0, Relation::Above, 0.0),
    ];
    let mut details = serde_json::json!({ "diagnostics": op.diagnostics, "coercivity": c });
    if let Some(g) = &cfg.operator.compare_grid {
        drop(op);
        let fine = assemble_k(&cfg.model, &cfg.state, &g.build()?)?;
        let cf = coercivity_constant(&fine, cfg.operator.coercivity_iterations, cfg.seed)?;
        checks.push(Check::new("c0_compare", cf.c0, Relation::Above, 0.0));
        checks.push(Check::at_most(
            "c0_relative_change",
            (cf.c0 - c.c0).abs() / c.c0.max(cf.c0),
            COERCIVITY_STABILITY,
        ));
        details["compare"] =
            serde_json::json!({ "grid": g, "diagnostics": fine.diagnostics, "coercivity": cf });
    }
    Ok(CriterionReport::new(1, checks, details))
}

fn cutoff_scaling(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let op = operator(cfg)?;
    let ms = &cfg.operator.cutoff_ms;
    let mut sups = Vec::with_capacity(ms.len());
    for &m in ms {
        sups.push(split_cutoff(&op, m)?.km_sup);
    }
    let slope = fit_slope(ms, &sups).unwrap_or(f64::NAN);
    let expected = 3.0 + cfg.model.kappa;
    let checks = vec![Check::at_most(
        "slope_error",
        (slope - expected).abs(),
        CUTOFF_SLOPE_TOL,
    )];
    Ok(CriterionReport::new(
        2,
        checks,
        serde_json::json!({ "m": ms, "km_sup": sups, "slope": slope, "expected": expected }),
    ))
}

fn transport_identity(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let grid = cfg.grid.build()?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &kappa in &cfg.coeffs.kappas {
        let model = crate::collision::CollisionModel { kappa, ..cfg.model };
        let op = assemble_k(&model, &cfg.state, &grid)?;
        let pinv = PseudoInverse::new(&op, cfg.coeffs.max_condition)?;
        let tc = transport_coefficients(&pinv, &grid)?;
        checks.push(Check::at_most(
            format!("identity_43[kappa={kappa}]"),
            tc.identity_43_residual,
            IDENTITY_43_TOL,
        ));
        checks.push(Check::at_most(
            format!("isotropy[kappa={kappa}]"),
            tc.isotropy_residual,
            ISOTROPY_TOL,
        ));
        rows.push(serde_json::json!({ "kappa": kappa, "coefficients": tc }));
    }
    Ok(CriterionReport::new(
        3,
        checks,
        serde_json::json!({ "rows": rows }),
    ))
}

/// Boundary datum of a config: the specular jump of a solvable odd trace, or
/// zero when `odd_beta == 0`.
pub fn knudsen_datum(op: &CollisionOperator, odd_beta: f64) -> Result<Vec<f64>> {
    if odd_beta == 0.0 {
        return Ok(vec![0.0; op.len()]);
    }
    Ok(datum_from_trace(op, &solvable_odd_trace(op, odd_beta)?))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn knudsen_structure(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let op = Arc::new(operator(cfg)?);
    let kc = &cfg.knudsen;
    let mut checks = Vec::new();
    let mut details = serde_json::json!({});
    if kc.zero_data_check {
        let zero = KnudsenProblem::new(
            op.clone(),
            SourceModel::Zero,
            vec![0.0; op.len()],
            cfg.weights,
        )?;
        let sol = solve_halfspace(&zero, &kc.solver)?;
        checks.push(Check::at_most(
            "zero_data_sup",
            max_abs(&sol.field),
            ZERO_DATA_TOL,
        ));
    }
    let f_b = knudsen_datum(&op, kc.odd_beta)?;
    let problem = KnudsenProblem::new(op.clone(), kc.source.clone(), f_b, cfg.weights)?;
    let sol = solve_halfspace(&problem, &kc.solver)?;
    checks.push(Check::at_most("b3_max", sol.b3_max(), B3_TOL));
    checks.push(Check::at_most(
        "flux_orthogonality",
        sol.flux_orthogonality,
        FLUX_ORTHOGONALITY_TOL,
    ));
    checks.push(Check::at_most(
        "far_field_flux",
        max_abs(&sol.shift.fluxes_after),
        FAR_FIELD_FLUX_TOL,
    ));
    details["shift"] = serde_json::to_value(sol.shift)?;
    details["field_sup"] = max_abs(&sol.field).into();
    details["cell_residual"] = sol.cell_residual.into();
    details["wall_residual"] = sol.wall_residual.into();
    Ok(CriterionReport::new(4, checks, details))
}

/// Sweep-versus-direct weighted-sup discrepancy on well-posed truncated stages.
pub fn cross_backend(cfg: &ExperimentConfig, cc: &CrossCheck) -> Result<Vec<(Penalty, f64)>> {
    let grid = cc.grid.build()?;
    let op = Arc::new(assemble_k(&cfg.model, &cfg.state, &grid)?);
    let f_b = knudsen_datum(&op, cc.odd_beta)?;
    let problem = KnudsenProblem::new(op, cfg.knudsen.source.clone(), f_b, cfg.weights)?;
    let mesh = MeshSpec::Graded {
        cells: cc.cells,
        first: 0.05,
    }
    .build(cc.d)?;
    let g = lifted_on_mesh(&problem, &mesh);
    let sweep = cfg.knudsen.solver.clone();
    let direct = crate::knudsen::KnudsenParams {
        backend: Backend::Direct,
        ..sweep.clone()
    };
    let mut out = Vec::new();
    // The direct factorization is singular for delta = 0 without wall damping.
    for pen in [
        Penalty {
            delta: 1e-2,
            n: None,
        },
        Penalty {
            delta: 0.0,
            n: Some(64.0),
        },
    ] {
        let a = solve_truncated(&problem, &mesh, &g, pen, &sweep, None)?;
        let b = solve_truncated(&problem, &mesh, &g, pen, &direct, None)?;
        let diff: Vec<f64> = a.nodes.iter().zip(&b.nodes).map(|(x, y)| x - y).collect();
        out.push((pen, weighted_sup_field(&problem, &diff)?));
    }
    Ok(out)
}

fn decay_sup(sol: &KnudsenSolution, k: f64) -> Vec<f64> {
    sol.domains
        .iter()
        .map(|d| {
            d.decay_sups
                .iter()
                .find(|p| p[0] == k)
                .map(|p| p[1])
                .unwrap_or(f64::NAN)
        })
        .collect()
}

fn knudsen_convergence(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let kc = &cfg.knudsen;
    let mut checks = Vec::new();
    let mut details = serde_json::json!({});
    if let Some(cc) = &kc.cross_check {
        let rows = cross_backend(cfg, cc)?;
        for (pen, diff) in &rows {
            let name = match pen.n {
                Some(n) => format!("cross_backend[delta={},n={n}]", pen.delta),
                None => format!("cross_backend[delta={}]", pen.delta),
            };
            checks.push(Check::at_most(name, *diff, CROSS_BACKEND_TOL));
        }
    }
    let op = Arc::new(operator(cfg)?);
    let f_b = knudsen_datum(&op, kc.odd_beta)?;
    let problem = KnudsenProblem::new(op, kc.source.clone(), f_b, cfg.weights)?;
    let mut params = kc.solver.clone();
    if !params.ks.contains(&BOUNDEDNESS_K) {
        params.ks.push(BOUNDEDNESS_K);
    }
    let sol = solve_halfspace(&problem, &params)?;
    let diffs: Vec<f64> = sol.domains.iter().filter_map(|d| d.difference).collect();
    let ds: Vec<f64> = sol.domains.iter().map(|d| d.d).collect();
    // Upper-bound reading of "consistent with d^{-1/2}": each doubling of `d`
    // may shrink the difference faster, but never by less than the factor
    // allowed around 2^{-1/2}.
    for (i, w) in diffs.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        let expected = (ds[i + 1] / ds[i + 2]).sqrt();
        checks.push(Check::at_most(
            format!("difference_ratio[{}]", i + 1),
            ratio,
            D_DIFFERENCE_FACTOR * expected,
        ));
        checks.push(Check::at_most(
            format!("difference_decrease[{}]", i + 1),
            w[1] - w[0],
            0.0,
        ));
    }
    let sups = decay_sup(&sol, BOUNDEDNESS_K);
    let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| {
        (lo.min(s), hi.max(s))
    });
    checks.push(Check::at_most(
        "weighted_sup_spread",
        hi / lo,
        BOUNDEDNESS_SPREAD,
    ));
    details["d"] = serde_json::to_value(&ds)?;
    details["differences"] = serde_json::to_value(&diffs)?;
    details["weighted_sup_k4"] = serde_json::to_value(&sups)?;
    details["domains"] = serde_json::to_value(&sol.domains)?;
    Ok(CriterionReport::new(5, checks, details))
}

fn abs_change(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.0).abs().max((b.1 - a.1).abs())
}

fn euler_solver(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let ec = &cfg.euler;
    let steps = ec.conservation_steps;
    let mut constant = init_euler(&EulerInit::constant(), ec.params)?;
    let reference = constant.cells[0];
    let mut const_dev: f64 = 0.0;
    for _ in 0..steps {
        let dt = constant.stable_dt();
        constant.step(dt)?;
        for p in &constant.cells {
            const_dev = const_dev.max(primitive_distance(p, &reference));
        }
    }

    let mut f = init_euler(&ec.init, ec.params)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let before = f.mass_energy();
        let dt = f.stable_dt();
        f.step(dt)?;
        worst = worst.max(abs_change(before, f.mass_energy()));
    }

    let (delta, center, width) = acoustic_setup(&ec.init)?;
    let mut pulse = init_euler(&ec.init, ec.params)?;
    pulse.solve_to(ACOUSTIC_T_END)?;
    let errs = acoustic_errors(&pulse, delta, center, width);
    let checks = vec![
        Check::at_most("constant_state_deviation", const_dev, 0.0),
        Check::at_most("conservation_per_step", worst, CONSERVATION_TOL),
        Check::at_most(
            "acoustic_l2",
            errs.iter().cloned().fold(0.0, f64::max),
            ACOUSTIC_L2_TOL,
        ),
    ];
    Ok(CriterionReport::new(
        6,
        checks,
        serde_json::json!({ "steps": steps, "acoustic_l2": { "rho": errs[0], "u3": errs[1], "T": errs[2] } }),
    ))
}

fn primitive_distance(a: &Primitive, b: &Primitive) -> f64 {
    let du = (0..3).map(|i| (a.u[i] - b.u[i]).abs()).fold(0.0, f64::max);
    (a.rho - b.rho).abs().max(du).max((a.temp - b.temp).abs())
}

/// `(delta, center, width)` of an acoustic-pulse initial state.
fn acoustic_setup(init: &EulerInit) -> Result<(f64, f64, f64)> {
    match init.phi0 {
        crate::euler::Profile::Gaussian { center, width, .. } => Ok((init.delta, center, width)),
        _ => Err(Error::InvalidParameter(
            "the acoustic check needs a Gaussian density pulse".into(),
        )),
    }
}

/// `L^2(0, length)` errors of `rho, u3, T` against linear acoustics.
pub fn acoustic_errors(f: &EulerField, delta: f64, center: f64, width: f64) -> [f64; 3] {
    let dx = f.dx();
    let mut e = [0.0; 3];
    for (x, p) in f.centers().iter().zip(&f.cells) {
        let (r, u, t) = acoustic_reference(delta, center, width, *x, f.t);
        e[0] += dx * (p.rho - r).powi(2);
        e[1] += dx * (p.u[2] - u).powi(2);
        e[2] += dx * (p.temp - t).powi(2);
    }
    e.map(f64::sqrt)
}

/// Background slices at `cells` cells, as used by `expand`, `sweep` and criteria 7-8.
pub fn background_slices(cfg: &ExperimentConfig, cells: usize) -> Result<EulerSlices> {
    let b = &cfg.background;
    EulerSlices::run(
        &b.init,
        EulerParams { cells, ..b.params },
        b.t,
        b.tau(cells),
    )
}

fn solvability_bridge(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let grid = cfg.grid.build()?;
    let mut rows = Vec::new();
    let mut last = None;
    for &cells in &cfg.expand.refine {
        let sl = background_slices(cfg, cells)?;
        rows.push(solvability_residual(&sl, &grid)?);
        last = Some(sl);
    }
    let h: Vec<f64> = cfg.expand.refine.iter().map(|&c| 1.0 / c as f64).collect();
    let rel: Vec<f64> = rows.iter().map(|r| r.relative).collect();
    let order = fit_slope(&h, &rel).unwrap_or(f64::NAN);
    let control = solvability_residual(
        &last
            .expect("validated non-empty")
            .with_density_perturbation(&cfg.expand.perturbation)?,
        &grid,
    )?;
    let checks = vec![
        Check::at_most("order_error", (order - EXPECTED_ORDER).abs(), ORDER_TOL),
        Check::at_least("control_relative", control.relative, CONTROL_FLOOR),
    ];
    Ok(CriterionReport::new(
        7,
        checks,
        serde_json::json!({ "order": order, "rows": rows, "control": control }),
    ))
}

/// Collision operator at the wall state of the background plus all eps-independent terms.
pub fn expansion_terms(cfg: &ExperimentConfig) -> Result<ExpansionTerms> {
    let sl = background_slices(cfg, cfg.background.params.cells)?;
    let wall = sl.wall().state();
    let op = Arc::new(assemble_k(&cfg.model, &wall, &cfg.grid.build()?)?);
    ExpansionTerms::build(op, sl, &cfg.sweep.spec)
}

fn eps_convergence(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let sc = &cfg.sweep;
    let terms = expansion_terms(cfg)?;
    let table = residual_sweep(&terms, &sc.eps, &sc.options)?;
    let mut checks = vec![Check::at_least(
        "slope_l2",
        table.slope_l2.unwrap_or(f64::NAN),
        EPS_SLOPE_MIN,
    )];
    let mut details = serde_json::json!({ "rows": table.rows, "slope_linf": table.slope_linf, "knudsen_layer": table.knudsen_layer });
    if let Some(eps) = sc.ablation_eps {
        let with = match table.rows.iter().find(|r| r.eps == eps) {
            Some(r) => r.boundary_defect,
            None => residual_sweep(&terms, &[eps], &sc.options)?.rows[0].boundary_defect,
        };
        let without = residual_sweep(
            &terms,
            &[eps],
            &AssembleOptions {
                knudsen: false,
                ..sc.options
            },
        )?
        .rows[0]
            .boundary_defect;
        checks.push(Check::at_least(
            "ablation_ratio",
            without / with.max(f64::MIN_POSITIVE),
            ABLATION_FACTOR,
        ));
        details["ablation"] =
            serde_json::json!({ "eps": eps, "with_knudsen": with, "without_knudsen": without });
    }
    Ok(CriterionReport::new(8, checks, details))
}
