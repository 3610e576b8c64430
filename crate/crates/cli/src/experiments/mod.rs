//! The seven experiment drivers behind the CLI subcommands.

pub mod accept;
pub mod decay;
pub mod inviscid;
pub mod kernels;
pub mod nonlinear;
pub mod oscint;
pub mod roots;

use crate::config::Config;
use crate::report::{emit, emit_meta, ExperimentOutput};
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Roots,
    Kernels,
    Decay,
    Oscint,
    Inviscid,
    Nonlinear,
    Accept,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Roots => "roots",
            Kind::Kernels => "kernels",
            Kind::Decay => "decay",
            Kind::Oscint => "oscint",
            Kind::Inviscid => "inviscid",
            Kind::Nonlinear => "nonlinear",
            Kind::Accept => "accept",
        }
    }
}

/// Problem sizes: `Full` is the acceptance scale, `Quick` exercises the
/// same code paths at reduced cost (used by the determinism check).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

/// Run one experiment, write its artifacts, print verdict lines.
/// Returns true iff every check passed.
pub fn run(kind: Kind, cfg: &Config, out_dir: &Path, seed: u64) -> anyhow::Result<bool> {
    let start = Instant::now();
    let output: ExperimentOutput = match kind {
        Kind::Roots => roots::run(cfg)?,
        Kind::Kernels => kernels::run(cfg)?,
        Kind::Decay => decay::run(cfg)?,
        Kind::Oscint => oscint::run(cfg)?,
        Kind::Inviscid => inviscid::run(cfg)?,
        Kind::Nonlinear => nonlinear::run(cfg, seed)?,
        Kind::Accept => accept::run_all(seed, Scale::Full)?,
    };
    // the acceptance suite runs with pinned settings, everything else
    // echoes the configuration it resolved
    let echo = if kind == Kind::Accept {
        None
    } else {
        Some(serde_json::to_value(cfg)?)
    };
    let path = emit(out_dir, kind.name(), seed, &output, echo)?;
    emit_meta(out_dir, kind.name(), start.elapsed().as_secs_f64())?;
    for check in &output.checks {
        println!("{}", check.line());
    }
    println!(
        "{}: {} checks, {} -> {}",
        kind.name(),
        output.checks.len(),
        if output.all_pass() {
            "all passed"
        } else {
            "FAILURES present"
        },
        path.display()
    );
    Ok(output.all_pass())
}
