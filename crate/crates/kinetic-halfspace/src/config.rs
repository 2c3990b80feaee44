//! TOML experiment configuration, named presets and the provenance record
//! attached to every run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collision::{CollisionModel, QuadratureParams};
use crate::error::{Error, Result};
use crate::euler::{EulerInit, EulerParams, Profile};
use crate::expansion::{
    AssembleOptions, ExpansionSpec, LayerProfile, LayerProfiles, MacroProfiles,
};
use crate::grid::{build_grid, VelocityGrid};
use crate::knudsen::{KnudsenParams, MeshSpec, SourceModel};
use crate::state::{FluidState, WeightSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    AssembleOp,
    Coeffs,
    Knudsen,
    Euler,
    Expand,
    Sweep,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AssembleOp => "assemble-op",
            Command::Coeffs => "coeffs",
            Command::Knudsen => "knudsen",
            Command::Euler => "euler",
            Command::Expand => "expand",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub v_max: f64,
    pub n_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            v_max: 6.0,
            n_axis: 16,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<VelocityGrid> {
        build_grid(self.v_max, self.n_axis)
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(config_err(
                format!("{field}.v_max"),
                format!("must be positive, got {}", self.v_max),
            ));
        }
        if self.n_axis < 4 || self.n_axis % 2 != 0 {
            return Err(config_err(
                format!("{field}.n_axis"),
                format!("must be even and at least 4, got {}", self.n_axis),
            ));
        }
        Ok(())
    }
}

/// Operator diagnostics used by `assemble-op` and `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    /// Also export `K` as `i, j, k_ij` triples.
    pub matrix_csv: bool,
    pub coercivity_iterations: usize,
    /// Second grid for the coercivity-stability comparison.
    pub compare_grid: Option<GridConfig>,
    /// Cutoff radii `m` of the `K^m` scaling study; empty skips it.
    pub cutoff_ms: Vec<f64>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            matrix_csv: false,
            coercivity_iterations: 300,
            compare_grid: None,
            cutoff_ms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub kappas: Vec<f64>,
    pub max_condition: f64,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        CoeffsConfig {
            kappas: vec![-0.5, -1.0, -2.0],
            max_condition: 1e12,
        }
    }
}

/// A sweep-versus-direct comparison on a (small) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck {
    pub grid: GridConfig,
    pub d: f64,
    pub cells: usize,
    pub odd_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnudsenConfig {
    pub solver: KnudsenParams,
    pub source: SourceModel,
    /// Boundary datum from the specular jump of a solvable odd trace with this
    /// `beta`; `0` means zero boundary data.
    pub odd_beta: f64,
    /// Also solve with zero data and report the largest value.
    pub zero_data_check: bool,
    pub cross_check: Option<CrossCheck>,
}

impl Default for KnudsenConfig {
    fn default() -> Self {
        KnudsenConfig {
            solver: KnudsenParams::default(),
            source: SourceModel::Algebraic {
                q: 6.0,
                a31: 0.5,
                b3: 1.0,
                a33: 0.3,
            },
            odd_beta: 0.3,
            zero_data_check: false,
            cross_check: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EulerConfig {
    pub init: EulerInit,
    pub params: EulerParams,
    pub t_end: f64,
    /// Profiles written at `t_end * k / snapshots`, `k = 0..=snapshots`.
    pub snapshots: usize,
    /// Steps over which per-step conservation is monitored.
    pub conservation_steps: usize,
}

impl Default for EulerConfig {
    fn default() -> Self {
        EulerConfig {
            init: EulerInit::acoustic_pulse(1e-3, 0.15, 0.05),
            params: EulerParams::default(),
            t_end: 0.2,
            snapshots: 4,
            conservation_steps: 100,
        }
    }
}

/// Smooth Euler field supplying `(rho, u, T)` to the expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    pub init: EulerInit,
    pub params: EulerParams,
    /// Evaluation time; the time derivative uses slices at `t +- tau`.
    pub t: f64,
    /// `tau = tau_cells / cells`.
    pub tau_cells: f64,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        BackgroundConfig {
            init: EulerInit {
                delta: 0.05,
                phi0: Profile::Cosine {
                    amplitude: 1.0,
                    wavenumber: 1.0,
                },
                big_phi0: [
                    Profile::Cosine {
                        amplitude: 1.0,
                        wavenumber: 1.0,
                    },
                    Profile::Zero,
                    Profile::Zero,
                ],
                theta0: Profile::Cosine {
                    amplitude: 2.0 / 3.0,
                    wavenumber: 1.0,
                },
            },
            params: EulerParams {
                cells: 200,
                ..EulerParams::default()
            },
            t: 0.1,
            tau_cells: 1.0,
        }
    }
}

impl BackgroundConfig {
    pub fn tau(&self, cells: usize) -> f64 {
        self.tau_cells / cells as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpandConfig {
    /// Euler meshes of the solvability refinement study.
    pub refine: Vec<usize>,
    /// Density perturbation of the non-Euler control field.
    pub perturbation: Profile,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            refine: vec![50, 100, 200, 400],
            perturbation: Profile::Cosine {
                amplitude: 0.05,
                wavenumber: 2.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub spec: ExpansionSpec,
    pub eps: Vec<f64>,
    pub options: AssembleOptions,
    /// `eps` of the run without the Knudsen term.
    pub ablation_eps: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mut spec = ExpansionSpec {
            f1: MacroProfiles {
                rho: Profile::Cosine {
                    amplitude: 0.2,
                    wavenumber: 1.0,
                },
                u: [
                    Profile::Cosine {
                        amplitude: 0.2,
                        wavenumber: 2.0,
                    },
                    Profile::Zero,
                    Profile::Sine {
                        amplitude: 0.1,
                        wavenumber: 1.0,
                    },
                ],
                theta: Profile::Cosine {
                    amplitude: 0.1,
                    wavenumber: 1.0,
                },
            },
            layer: Some(LayerProfiles {
                u1: LayerProfile::Gaussian {
                    amplitude: 0.3,
                    width: 1.0,
                },
                u2: LayerProfile::Zero,
                theta: LayerProfile::Gaussian {
                    amplitude: 0.2,
                    width: 1.0,
                },
                rho: None,
            }),
            odd_trace: Some(0.1),
            ..ExpansionSpec::default()
        };
        spec.knudsen.d_schedule = vec![10.0];
        spec.knudsen.mesh = MeshSpec::Nested {
            first: 0.05,
            max_width: 0.25,
            growth: 1.2,
        };
        SweepConfig {
            spec,
            eps: vec![0.2, 0.1, 0.05],
            options: AssembleOptions::default(),
            ablation_eps: Some(0.1),
        }
    }
}

/// Everything a run needs. Sections not used by `command` are ignored but
/// still validated and hashed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Acceptance criterion evaluated by `verify`; the collision suite otherwise.
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub model: CollisionModel,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "FluidState::unit")]
    pub state: FluidState,
    #[serde(default)]
    pub weights: WeightSystem,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub coeffs: CoeffsConfig,
    #[serde(default)]
    pub knudsen: KnudsenConfig,
    #[serde(default)]
    pub euler: EulerConfig,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub expand: ExpandConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_seed() -> u64 {
    7
}

fn config_err(field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

fn check_kappa(field: &str, kappa: f64) -> Result<()> {
    if kappa > -3.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(config_err(
            field,
            format!("kappa must lie in (-3, 1], got {kappa}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            criterion: None,
            seed: default_seed(),
            model: CollisionModel::default(),
            grid: GridConfig::default(),
            state: FluidState::unit(),
            weights: WeightSystem::default(),
            operator: OperatorConfig::default(),
            coeffs: CoeffsConfig::default(),
            knudsen: KnudsenConfig::default(),
            euler: EulerConfig::default(),
            background: BackgroundConfig::default(),
            expand: ExpandConfig::default(),
            sweep: SweepConfig::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| {
            let msg = e.message().to_string();
            let field = e
                .span()
                .map(|sp| locate(s, sp.start))
                .unwrap_or_else(|| "<root>".into());
            config_err(field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; a missing file is [`Error::MissingConfig`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingConfig(path.display().to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn runs_knudsen(&self) -> bool {
        matches!(self.command, Command::Knudsen | Command::Sweep)
            || matches!(self.criterion, Some(4 | 5 | 8))
    }

    /// Range checks with the offending field in the error.
    pub fn validate(&self) -> Result<()> {
        check_kappa("model.kappa", self.model.kappa)?;
        if !(self.model.beta0 > 0.0) {
            return Err(config_err(
                "model.beta0",
                format!("must be positive, got {}", self.model.beta0),
            ));
        }
        if !(self.model.m > 0.0 && self.model.m <= 1.0) {
            return Err(config_err(
                "model.m",
                format!("must lie in (0, 1], got {}", self.model.m),
            ));
        }
        self.model
            .validate()
            .map_err(|e| config_err("model.quad", e.to_string()))?;
        self.grid.validate("grid")?;
        if let Some(g) = &self.operator.compare_grid {
            g.validate("operator.compare_grid")?;
        }
        if let Some(k) = self.criterion {
            if !(1..=8).contains(&k) {
                return Err(config_err("criterion", format!("must be 1..=8, got {k}")));
            }
            if self.command != Command::Verify {
                return Err(config_err(
                    "criterion",
                    "only `verify` evaluates acceptance criteria",
                ));
            }
        }
        self.state
            .validate()
            .map_err(|e| config_err("state", e.to_string()))?;
        if !(0.0..0.5).contains(&self.weights.frak_a) {
            return Err(config_err(
                "weights.frak_a",
                format!("must lie in [0, 1/2), got {}", self.weights.frak_a),
            ));
        }
        if self.runs_knudsen() && !(self.weights.l > 2.0) {
            return Err(config_err(
                "weights.l",
                format!("Knudsen runs need l > 2, got {}", self.weights.l),
            ));
        }
        for (i, &m) in self.operator.cutoff_ms.iter().enumerate() {
            if !(m > 0.0 && m <= 1.0) {
                return Err(config_err(
                    format!("operator.cutoff_ms[{i}]"),
                    format!("must lie in (0, 1], got {m}"),
                ));
            }
        }
        if self.coeffs.kappas.is_empty() {
            return Err(config_err("coeffs.kappas", "must not be empty"));
        }
        for (i, &k) in self.coeffs.kappas.iter().enumerate() {
            check_kappa(&format!("coeffs.kappas[{i}]"), k)?;
        }
        let kn = &self.knudsen.solver;
        if kn.d_schedule.is_empty() {
            return Err(config_err("knudsen.solver.d_schedule", "must not be empty"));
        }
        if let Some(d) = kn.d_schedule.iter().find(|&&d| !(d >= 1.0)) {
            return Err(config_err(
                "knudsen.solver.d_schedule",
                format!("entries must be at least 1, got {d}"),
            ));
        }
        if kn.d_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("knudsen.solver.d_schedule", "must increase"));
        }
        if let Some(c) = &self.knudsen.cross_check {
            c.grid.validate("knudsen.cross_check.grid")?;
        }
        if !(self.euler.t_end >= 0.0) {
            return Err(config_err("euler.t_end", "must be non-negative"));
        }
        if self.euler.params.cells < 4 {
            return Err(config_err("euler.params.cells", "must be at least 4"));
        }
        if !(self.euler.params.cfl > 0.0 && self.euler.params.cfl <= 1.0) {
            return Err(config_err(
                "euler.params.cfl",
                format!("must lie in (0, 1], got {}", self.euler.params.cfl),
            ));
        }
        if !(self.background.t > 0.0 && self.background.tau_cells > 0.0) {
            return Err(config_err("background", "t and tau_cells must be positive"));
        }
        if self.background.t - self.background.tau(self.background.params.cells) < 0.0 {
            return Err(config_err(
                "background.tau_cells",
                "t - tau must be non-negative",
            ));
        }
        if self.expand.refine.is_empty() || self.expand.refine.iter().any(|&c| c < 4) {
            return Err(config_err(
                "expand.refine",
                "needs at least one mesh of 4 or more cells",
            ));
        }
        if self.sweep.eps.is_empty() {
            return Err(config_err("sweep.eps", "must not be empty"));
        }
        for (i, &e) in self.sweep.eps.iter().enumerate() {
            if !(e > 0.0 && e <= 0.5) {
                return Err(config_err(
                    format!("sweep.eps[{i}]"),
                    format!("must lie in (0, 0.5], got {e}"),
                ));
            }
        }
        if let Some(e) = self.sweep.ablation_eps {
            if !(e > 0.0 && e <= 0.5) {
                return Err(config_err(
                    "sweep.ablation_eps",
                    format!("must lie in (0, 0.5], got {e}"),
                ));
            }
        }
        if !(0.0..0.5).contains(&self.sweep.spec.ws.frak_a) {
            return Err(config_err("sweep.spec.ws.frak_a", "must lie in [0, 1/2)"));
        }
        Ok(())
    }
}

/// Dotted key path of the table entry containing byte `pos`, best effort.
fn locate(src: &str, pos: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut offset = 0;
    for line in src.split_inclusive('\n') {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            key = k.trim().to_string();
        }
        offset += line.len();
        if offset > pos {
            break;
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, true) => "<root>".into(),
        (true, false) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

pub const PRESETS: &[&str] = &[
    "assemble-op",
    "coeffs",
    "knudsen",
    "euler",
    "expand",
    "sweep",
    "verify",
    "criterion-1",
    "criterion-2",
    "criterion-3",
    "criterion-4",
    "criterion-5",
    "criterion-6",
    "criterion-7",
    "criterion-8",
];

/// The named configurations; `criterion-N` reproduces acceptance criterion N.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    use Command::*;
    let verify_criterion = |k: u8| {
        let mut c = ExperimentConfig::new(Verify);
        c.criterion = Some(k);
        c
    };
    let cfg = match name {
        "assemble-op" => ExperimentConfig {
            grid: GridConfig {
                v_max: 4.5,
                n_axis: 8,
            },
            ..ExperimentConfig::new(AssembleOp)
        },
        "coeffs" => ExperimentConfig::new(Coeffs),
        "knudsen" => {
            let mut c = ExperimentConfig::new(Knudsen);
            c.grid = GridConfig {
                v_max: 4.5,
                n_axis: 8,
            };
            c.knudsen.solver.d_schedule = vec![10.0];
            c.knudsen.solver.mesh = MeshSpec::Graded {
                cells: 40,
                first: 0.05,
            };
            c
        }
        "euler" => ExperimentConfig::new(Euler),
        "expand" => ExperimentConfig {
            grid: GridConfig {
                v_max: 6.0,
                n_axis: 12,
            },
            ..ExperimentConfig::new(Expand)
        },
        "sweep" => ExperimentConfig {
            grid: GridConfig {
                v_max: 4.5,
                n_axis: 8,
            },
            ..ExperimentConfig::new(Sweep)
        },
        "verify" => {
            let mut c = ExperimentConfig::new(Verify);
            c.grid = GridConfig {
                v_max: 6.0,
                n_axis: 12,
            };
            c
        }
        "criterion-1" => {
            let mut c = verify_criterion(1);
            c.operator.compare_grid = Some(GridConfig {
                v_max: 6.0,
                n_axis: 20,
            });
            c
        }
        "criterion-2" => {
            let mut c = verify_criterion(2);
            c.grid = GridConfig {
                v_max: 6.0,
                n_axis: 12,
            };
            c.operator.cutoff_ms = vec![0.8, 0.4, 0.2];
            c
        }
        "criterion-3" => {
            let mut c = verify_criterion(3);
            c.coeffs.kappas = vec![-1.0];
            c
        }
        "criterion-4" => {
            let mut c = verify_criterion(4);
            c.knudsen.solver.d_schedule = vec![20.0];
            c.knudsen.solver.mesh = MeshSpec::Graded {
                cells: 128,
                first: 0.05,
            };
            c.knudsen.zero_data_check = true;
            c
        }
        "criterion-5" => {
            let mut c = verify_criterion(5);
            c.grid = GridConfig {
                v_max: 6.0,
                n_axis: 12,
            };
            c.knudsen.odd_beta = 0.0;
            c.knudsen.solver.d_schedule = vec![10.0, 20.0, 40.0];
            c.knudsen.solver.mesh = MeshSpec::Nested {
                first: 0.05,
                max_width: 0.5,
                growth: 1.15,
            };
            c.knudsen.cross_check = Some(CrossCheck {
                grid: GridConfig {
                    v_max: 4.5,
                    n_axis: 8,
                },
                d: 10.0,
                cells: 40,
                odd_beta: 0.3,
            });
            c
        }
        "criterion-6" => {
            let mut c = verify_criterion(6);
            c.euler = EulerConfig::default();
            c
        }
        "criterion-7" => {
            let mut c = verify_criterion(7);
            c.grid = GridConfig {
                v_max: 6.0,
                n_axis: 12,
            };
            c.expand.refine = vec![100, 200, 400];
            c
        }
        "criterion-8" => {
            let mut c = verify_criterion(8);
            c.grid = GridConfig {
                v_max: 6.0,
                n_axis: 12,
            };
            c
        }
        other => {
            return Err(config_err(
                "preset",
                format!(
                    "unknown preset `{other}`; available: {}",
                    PRESETS.join(", ")
                ),
            ));
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Quadrature used by a config (exposed for tests that want a cheap operator).
pub fn coarse_model(kappa: f64) -> CollisionModel {
    CollisionModel {
        kappa,
        ..CollisionModel::default()
    }
    .with_quadrature(QuadratureParams::coarse())
}

/// Header attached to every artifact set: tool version, command, config
/// hash and the full parameter echo.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub preset: Option<String>,
    pub config_sha256: String,
    pub config: ExperimentConfig,
}

impl Provenance {
    pub fn new(cfg: &ExperimentConfig, preset: Option<&str>) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: cfg.command,
            preset: preset.map(str::to_string),
            config_sha256: cfg.hash(),
            config: cfg.clone(),
        }
    }

    /// One-line text form for logs.
    pub fn header_line(&self) -> String {
        format!(
            "# {} {} command={} preset={} config_sha256={}",
            self.tool,
            self.version,
            self.command.name(),
            self.preset.as_deref().unwrap_or("-"),
            self.config_sha256
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for name in PRESETS {
            let c = preset(name).unwrap();
            let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
            assert_eq!(back, c, "{name}");
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn kappa_out_of_range_names_the_field() {
        let err = ExperimentConfig::from_toml_str(
            "command = \"coeffs\"\n[model]\nkappa = -3.5\nbeta0 = 1.0\nm = 0.4\n",
        )
        .unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "model.kappa"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn knudsen_runs_need_l_above_two() {
        let mut c = preset("knudsen").unwrap();
        c.weights.l = 2.0;
        assert!(
            matches!(c.validate(), Err(Error::Config { ref field, .. }) if field == "weights.l")
        );
        c.command = Command::Euler;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn frak_a_range() {
        let mut c = preset("euler").unwrap();
        c.weights.frak_a = 0.5;
        assert!(
            matches!(c.validate(), Err(Error::Config { ref field, .. }) if field == "weights.frak_a")
        );
    }

    #[test]
    fn unknown_key_is_located() {
        let err = ExperimentConfig::from_toml_str(
            "command = \"euler\"\n[euler]\nt_end = 0.1\nbogus = 3\n",
        )
        .unwrap_err();
        match err {
            Error::Config { field, msg } => {
                assert!(field.starts_with("euler"), "{field}");
                assert!(msg.contains("bogus"), "{msg}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_file_is_reported_with_path() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/khs.toml")).unwrap_err();
        assert!(matches!(err, Error::MissingConfig(ref p) if p == "/nonexistent/khs.toml"));
    }

    #[test]
    fn hash_changes_with_parameters() {
        let a = preset("coeffs").unwrap();
        let mut b = a.clone();
        b.coeffs.kappas = vec![-1.0];
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
