//! Drive a named preset programmatically and list the artifacts.
//!
//! cargo run --release --example run_preset -- [preset] [out_dir]

use std::path::PathBuf;

use kinetic_halfspace::config::preset;
use kinetic_halfspace::run::run;

fn main() -> kinetic_halfspace::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "euler".into());
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("khs-{name}")));
    let cfg = preset(&name)?;
    println!("config sha256 {}", cfg.hash());
    let outcome = run(&cfg, Some(&name), &out)?;
    for a in &outcome.artifacts {
        println!("{}", out.join(a).display());
    }
    if let Some(s) = outcome.summary {
        println!("{s}");
    }
    Ok(())
}
