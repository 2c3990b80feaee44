//! Orchestration of one configured run: compute, then write every artifact
//! under an output directory. CSV files hold data only; every JSON report
//! carries the provenance header, and `provenance.json` is always written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::collision::{assemble_k, coercivity_constant, split_cutoff, CollisionModel};
use crate::config::{Command, ExperimentConfig, Provenance};
use crate::criteria::{self, background_slices, expansion_terms, knudsen_datum};
use crate::error::Result;
use crate::euler::{init_euler, write_profiles_csv};
use crate::expansion::{
    fit_slope, residual_sweep, solvability_residual, write_sweep_csv, AssembleOptions,
};
use crate::knudsen::{solve_halfspace, write_field_csv, write_history_json, KnudsenProblem};
use crate::macro_micro::{transport_coefficients, PseudoInverse};

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    /// `Some(false)` when a `verify` criterion ran and failed.
    pub passed: Option<bool>,
    /// One-line PASS/FAIL summary of a `verify` run.
    pub summary: Option<String>,
}

struct Out<'a> {
    dir: &'a Path,
    provenance: &'a Provenance,
    written: Vec<PathBuf>,
}

impl Out<'_> {
    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        self.written.push(PathBuf::from(name));
        Ok(BufWriter::new(File::create(path)?))
    }

    fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            provenance: &'a Provenance,
            report: &'a T,
        }
        let mut w = self.file(name)?;
        serde_json::to_writer_pretty(
            &mut w,
            &Wrapped {
                provenance: self.provenance,
                report,
            },
        )?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Runs `cfg` and writes its artifacts into `out_dir` (created if missing).
pub fn run(cfg: &ExperimentConfig, preset: Option<&str>, out_dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let provenance = Provenance::new(cfg, preset);
    let mut out = Out {
        dir: out_dir,
        provenance: &provenance,
        written: Vec::new(),
    };
    {
        let mut w = out.file("provenance.json")?;
        serde_json::to_writer_pretty(&mut w, &provenance)?;
        writeln!(w)?;
        w.flush()?;
    }
    let verdict = match cfg.command {
        Command::AssembleOp => assemble_op(cfg, &mut out).map(|_| None)?,
        Command::Coeffs => coeffs(cfg, &mut out).map(|_| None)?,
        Command::Knudsen => knudsen(cfg, &mut out).map(|_| None)?,
        Command::Euler => euler(cfg, &mut out).map(|_| None)?,
        Command::Expand => expand(cfg, &mut out).map(|_| None)?,
        Command::Sweep => sweep(cfg, &mut out).map(|_| None)?,
        Command::Verify => Some(verify(cfg, &mut out)?),
    };
    let (passed, summary) = match verdict {
        Some((p, s)) => (Some(p), Some(s)),
        None => (None, None),
    };
    Ok(RunOutcome {
        artifacts: out.written,
        passed,
        summary,
    })
}

fn assemble_op(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let grid = cfg.grid.build()?;
    grid.write_csv(out.file("grid.csv")?)?;
    let op = assemble_k(&cfg.model, &cfg.state, &grid)?;
    op.write_bin(out.file("operator.khsop")?)?;
    op.write_nodes_csv(out.file("nodes.csv")?)?;
    if cfg.operator.matrix_csv {
        op.write_matrix_csv(out.file("matrix.csv")?)?;
    }
    let c = coercivity_constant(&op, cfg.operator.coercivity_iterations, cfg.seed)?;
    let mut splits = Vec::new();
    for &m in &cfg.operator.cutoff_ms {
        let s = split_cutoff(&op, m)?;
        splits.push(serde_json::json!({ "m": m, "km_sup": s.km_sup, "kc_sup": s.kc_sup }));
    }
    let km: Vec<f64> = splits
        .iter()
        .map(|s| s["km_sup"].as_f64().unwrap_or(f64::NAN))
        .collect();
    out.json(
        "operator.json",
        &serde_json::json!({
            "nodes": op.len(),
            "diagnostics": op.diagnostics,
            "coercivity": c,
            "cutoff_split": splits,
            "cutoff_slope": fit_slope(&cfg.operator.cutoff_ms, &km),
        }),
    )
}

/// `mu` and heat conductivity for each potential exponent in the config.
fn coeffs(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let grid = cfg.grid.build()?;
    let mut wr = csv::Writer::from_writer(out.file("coeffs.csv")?);
    wr.write_record([
        "kappa",
        "mu",
        "heat_conductivity",
        "a33_form",
        "identity_43_residual",
        "isotropy_residual",
        "heat_isotropy_residual",
        "condition",
    ])?;
    for &kappa in &cfg.coeffs.kappas {
        let model = CollisionModel { kappa, ..cfg.model };
        let op = assemble_k(&model, &cfg.state, &grid)?;
        let pinv = PseudoInverse::new(&op, cfg.coeffs.max_condition)?;
        let tc = transport_coefficients(&pinv, &grid)?;
        wr.write_record(
            [
                kappa,
                tc.mu_t,
                tc.kappa_t,
                tc.a33_form,
                tc.identity_43_residual,
                tc.isotropy_residual,
                tc.heat_isotropy_residual,
                pinv.condition,
            ]
            .iter()
            .map(|x| format!("{x:.17e}")),
        )?;
    }
    wr.flush()?;
    Ok(())
}

fn knudsen(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let kc = &cfg.knudsen;
    let op = Arc::new(assemble_k(&cfg.model, &cfg.state, &cfg.grid.build()?)?);
    let f_b = knudsen_datum(&op, kc.odd_beta)?;
    let problem = KnudsenProblem::new(op, kc.source.clone(), f_b, cfg.weights)?;
    let sol = solve_halfspace(&problem, &kc.solver)?;
    write_field_csv(&sol.mesh, &sol.field, out.file("field.csv")?)?;
    let decay = sol.decay(&problem, &kc.solver.ks, kc.solver.fit_from)?;
    out.json("decay.json", &decay)?;
    write_history_json(&sol.history, &sol.domains, out.file("history.json")?)?;
    out.json(
        "knudsen.json",
        &serde_json::json!({
            "d": sol.mesh.d,
            "cells": sol.mesh.cells(),
            "shift": sol.shift,
            "b3_max": sol.b3_max(),
            "flux_orthogonality": sol.flux_orthogonality,
            "cell_residual": sol.cell_residual,
            "wall_residual": sol.wall_residual,
            "shift_determinant": problem.shift.determinant,
            "normalized_determinant": problem.shift.normalized_determinant,
            "mu_t": problem.shift.mu_t,
            "kappa_t": problem.shift.kappa_t,
        }),
    )
}

fn euler(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let ec = &cfg.euler;
    let mut f = init_euler(&ec.init, ec.params)?;
    let (m0, e0) = f.mass_energy();
    let mut snaps = vec![f.clone()];
    let n = ec.snapshots.max(1);
    for k in 1..=n {
        f.solve_to(ec.t_end * k as f64 / n as f64)?;
        snaps.push(f.clone());
    }
    write_profiles_csv(&snaps, out.file("profiles.csv")?)?;
    let (m1, e1) = f.mass_energy();
    out.json(
        "euler.json",
        &serde_json::json!({
            "t_end": f.t,
            "steps": f.steps,
            "mass_change": m1 - m0,
            "energy_change": e1 - e0,
            "max_gradient": f.max_gradient(),
        }),
    )
}

fn expand(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let grid = cfg.grid.build()?;
    let mut wr = csv::Writer::from_writer(out.file("solvability.csv")?);
    wr.write_record([
        "cells",
        "residual_l2",
        "transport_l2",
        "relative",
        "max_moment",
    ])?;
    let mut rel = Vec::new();
    let mut last = None;
    for &cells in &cfg.expand.refine {
        let sl = background_slices(cfg, cells)?;
        let r = solvability_residual(&sl, &grid)?;
        wr.write_record(&[
            cells.to_string(),
            format!("{:.17e}", r.residual_l2),
            format!("{:.17e}", r.transport_l2),
            format!("{:.17e}", r.relative),
            format!("{:.17e}", r.max_moment),
        ])?;
        rel.push(r.relative);
        last = Some(sl);
    }
    wr.flush()?;
    let h: Vec<f64> = cfg.expand.refine.iter().map(|&c| 1.0 / c as f64).collect();
    let control = solvability_residual(
        &last
            .expect("validated non-empty")
            .with_density_perturbation(&cfg.expand.perturbation)?,
        &grid,
    )?;
    out.json("expand.json", &serde_json::json!({ "cells": cfg.expand.refine, "relative": rel, "order": fit_slope(&h, &rel), "control": control }))
}

fn sweep(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let sc = &cfg.sweep;
    let terms = expansion_terms(cfg)?;
    let table = residual_sweep(&terms, &sc.eps, &sc.options)?;
    write_sweep_csv(&table, out.file("sweep.csv")?)?;
    let ablation = match sc.ablation_eps {
        Some(eps) => Some(residual_sweep(
            &terms,
            &[eps],
            &AssembleOptions {
                knudsen: false,
                ..sc.options
            },
        )?),
        None => None,
    };
    if let Some(a) = &ablation {
        write_sweep_csv(a, out.file("sweep_ablation.csv")?)?;
    }
    out.json(
        "sweep.json",
        &serde_json::json!({
            "slope_l2": table.slope_l2,
            "slope_linf": table.slope_linf,
            "solvability": table.solvability,
            "knudsen_layer": table.knudsen_layer,
            "matching": { "moments": terms.matching.moments, "mismatch": terms.matching.mismatch },
            "ablation": ablation.map(|a| a.rows),
        }),
    )
}

/// Collision invariant suite (symmetry, null space, coercivity) or one acceptance criterion.
fn verify(cfg: &ExperimentConfig, out: &mut Out) -> Result<(bool, String)> {
    if let Some(id) = cfg.criterion {
        let report = criteria::run(id, cfg)?;
        out.json(&format!("criterion-{id}.json"), &report)?;
        return Ok((report.passed, report.summary_line()));
    }
    let op = assemble_k(&cfg.model, &cfg.state, &cfg.grid.build()?)?;
    let c = coercivity_constant(&op, cfg.operator.coercivity_iterations, cfg.seed)?;
    let d = &op.diagnostics;
    let passed = d.asymmetry <= criteria::ASYMMETRY_TOL
        && d.null_residual <= criteria::NULL_RESIDUAL_TOL
        && c.c0 > 0.0;
    out.json(
        "verify.json",
        &serde_json::json!({
            "symmetry": { "raw_asymmetry": d.raw_asymmetry, "asymmetry": d.asymmetry, "tolerance": criteria::ASYMMETRY_TOL },
            "null_space": { "residual": d.null_residual, "raw_residual": d.raw_null_residual, "tolerance": criteria::NULL_RESIDUAL_TOL },
            "coercivity": c,
            "passed": passed,
        }),
    )?;
    let line = format!(
        "{} collision suite: asymmetry={:.3e}, null_residual={:.3e}, c0={:.4e}",
        if passed { "PASS" } else { "FAIL" },
        d.asymmetry,
        d.null_residual,
        c.c0
    );
    Ok((passed, line))
}
