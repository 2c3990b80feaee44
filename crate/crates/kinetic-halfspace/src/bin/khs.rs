//! Batch driver: `khs <command> [--preset NAME | --config FILE] --out DIR`.
//!
//! Exit codes: 0 success, 1 solver failure (payload in `DIR/error.json`),
//! 2 missing or invalid configuration, 3 a `verify` check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinetic_halfspace::config::{preset, Command, ExperimentConfig, Provenance, PRESETS};
use kinetic_halfspace::run::run;
use kinetic_halfspace::Error;

#[derive(Parser)]
#[command(name = "khs", version, about = "Kinetic half-space experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble the collision operator and export grid, operator and diagnostics.
    AssembleOp(Common),
    /// Viscosity, heat conductivity and the 4/3 identity.
    Coeffs {
        #[command(flatten)]
        common: Common,
        /// Potential exponent(s); overrides `coeffs.kappas`.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Vec<f64>,
    },
    /// Solve the half-space Knudsen layer problem.
    Knudsen(Common),
    /// Run the planar Euler solver.
    Euler(Common),
    /// Solvability residual of the Euler background under refinement.
    Expand(Common),
    /// Residual of the composite expansion over eps.
    Sweep(Common),
    /// Collision invariant suite, or an acceptance criterion (`--preset criterion-N`).
    Verify(Common),
    /// List the named presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named configuration; defaults to the one named after the command.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "khs-out")]
    out: PathBuf,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

fn resolve(command: Command, common: &Common) -> Result<(ExperimentConfig, Option<String>), Error> {
    let (cfg, name) = match (&common.config, &common.preset) {
        (Some(path), _) => (ExperimentConfig::load(path)?, None),
        (None, Some(p)) => (preset(p)?, Some(p.clone())),
        (None, None) => (preset(command.name())?, Some(command.name().to_string())),
    };
    if cfg.command != command {
        return Err(Error::Config {
            field: "command".into(),
            msg: format!(
                "config is for `{}` but `{}` was invoked",
                cfg.command.name(),
                command.name()
            ),
        });
    }
    Ok((cfg, name))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("KHS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config {
            field: "KHS_THREADS".into(),
            msg: format!("expected a positive integer, got `{v}`"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config {
            field: "KHS_THREADS".into(),
            msg: e.to_string(),
        })
}

fn write_error(out: &Path, err: &Error) {
    let body = serde_json::to_string_pretty(&serde_json::json!({ "error": err.payload() }))
        .unwrap_or_default();
    if std::fs::create_dir_all(out)
        .and_then(|_| std::fs::write(out.join("error.json"), body + "\n"))
        .is_err()
    {
        eprintln!("could not write {}", out.join("error.json").display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, kappas) = match cli.command {
        Cmd::AssembleOp(c) => (Command::AssembleOp, c, vec![]),
        Cmd::Coeffs { common, kappa } => (Command::Coeffs, common, kappa),
        Cmd::Knudsen(c) => (Command::Knudsen, c, vec![]),
        Cmd::Euler(c) => (Command::Euler, c, vec![]),
        Cmd::Expand(c) => (Command::Expand, c, vec![]),
        Cmd::Sweep(c) => (Command::Sweep, c, vec![]),
        Cmd::Verify(c) => (Command::Verify, c, vec![]),
        Cmd::Presets => {
            PRESETS.iter().for_each(|p| println!("{p}"));
            return ExitCode::SUCCESS;
        }
    };
    let resolved = configure_threads()
        .and_then(|_| resolve(command, &common))
        .and_then(|(mut cfg, name)| {
            if !kappas.is_empty() {
                cfg.coeffs.kappas = kappas;
                cfg.validate()?;
            }
            Ok((cfg, name))
        });
    let (cfg, name) = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if common.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    println!("{}", Provenance::new(&cfg, name.as_deref()).header_line());
    match run(&cfg, name.as_deref(), &common.out) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("wrote {}", common.out.join(a).display());
            }
            if let Some(s) = &outcome.summary {
                println!("{s}");
            }
            match outcome.passed {
                Some(false) => {
                    eprintln!(
                        "verification failed; see the report in {}",
                        common.out.display()
                    );
                    ExitCode::from(3)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            write_error(&common.out, &e);
            ExitCode::from(
                if matches!(e, Error::Config { .. } | Error::MissingConfig(_)) {
                    2
                } else {
                    1
                },
            )
        }
    }
}
