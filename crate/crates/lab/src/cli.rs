use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "nodal-lab",
    version,
    about = "Nodal statistics, eigenvalue Morse theory and transversality experiments on graphs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Graph JSON. With --op, must match the operator's graph.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Operator JSON.
    #[arg(long, global = true)]
    pub op: Option<PathBuf>,
    /// 1-based eigenvalue index.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative gap below which eigenvalues count as equal [default: 1e-8]
    #[arg(long, global = true)]
    pub tol_degeneracy: Option<f64>,
    /// Modulus below which an eigenvector entry counts as zero [default: 1e-8]
    #[arg(long, global = true)]
    pub tol_vanish: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Eigenvalues, multiplicities and vanishing vertices.
    Spectrum,
    /// Nodal surplus distribution of one operator over all k.
    NodalDist,
    /// Exact average of the surplus distribution over all signings.
    AvgDist {
        /// Largest |E| for which all 2^|E| signings are enumerated
        #[arg(long, default_value_t = 24)]
        cap: usize,
        /// Drop inadmissible (signing, k) pairs instead of failing.
        #[arg(long)]
        skip_inadmissible: bool,
        /// Skip the gauge-class cross-check.
        #[arg(long)]
        no_class_check: bool,
    },
    /// Search the gauge torus for critical points of one eigenvalue.
    CriticalScan {
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Morse index versus nodal surplus at every symmetry class and k.
    VerifyIndex {
        /// Largest |E| for which all 2^|E| signings are enumerated
        #[arg(long, default_value_t = 24)]
        cap: usize,
        /// Skip the finite-difference Hessian comparison.
        #[arg(long)]
        no_fd: bool,
    },
    /// Analyse an exceptional critical point, or emit a fixture with --emit-fixture d=N.
    LinkageAnalyze {
        /// Magnetic potential JSON applied to the real operator from --op.
        #[arg(long)]
        alpha: Option<PathBuf>,
        /// Write a constructed fixture with N links at the vanishing vertex (`d=N`); needs --out
        #[arg(long, value_name = "d=N")]
        emit_fixture: Option<String>,
        /// Points of the critical set to re-check.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Transversality of H(G) to the multiplicity stratum at λ_k.
    TransversalityCheck {
        /// First move the operator within H(G) until λ_k = λ_{k+1}.
        #[arg(long)]
        land: bool,
    },
    /// KS distance of averaged normalized surplus laws to N(0,1) across β.
    CltExperiment {
        #[arg(long, default_value_t = 3)]
        beta_min: usize,
        #[arg(long, default_value_t = 8)]
        beta_max: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 100.0)]
        eta: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::NodalDist => "nodal-dist",
            Command::AvgDist { .. } => "avg-dist",
            Command::CriticalScan { .. } => "critical-scan",
            Command::VerifyIndex { .. } => "verify-index",
            Command::LinkageAnalyze { .. } => "linkage-analyze",
            Command::TransversalityCheck { .. } => "transversality-check",
            Command::CltExperiment { .. } => "clt-experiment",
        }
    }
}
