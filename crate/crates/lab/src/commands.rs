//! Command implementations. Each returns the files to write; nothing here
//! touches the filesystem except reading inputs.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nodal_morse::io::{self as nio, AlphaFile, OperatorFile};
use nodal_morse::linkage::{analyze_exceptional, build_exceptional_fixture, AnalysisOptions, ExceptionalAnalysis};
use nodal_morse::morse::{critical_scan, verify_index_equals_surplus, ScanBudget, TorusPoint, VerifyOptions};
use nodal_morse::nodal::{
    average_surplus_distribution, surplus_distribution_with, AverageOptions, SurplusDistribution,
};
use nodal_morse::spectral::is_nowhere_vanishing;
use nodal_morse::transversality::{is_transverse_at, land_on_stratum, SplittingVerdict, TransversalityVerdict};
use nodal_morse::{eigh, Graph, SupportedMatrix, Tolerances};
use serde::Serialize;

use crate::cli::{Cli, Command, Format, GlobalArgs};
use crate::clt::{run_clt, CltOptions, CltReport};
use crate::error::LabError;
use crate::record::{to_json_string, RunRecord, SCHEMA_VERSION};

/// What a command produced: a primary document (for `--out` or stdout),
/// extra files, and human-readable summary lines.
#[derive(Debug, Default)]
pub struct Output {
    pub primary: String,
    pub extra: Vec<(PathBuf, String)>,
    pub summary: Vec<String>,
}

pub fn tolerances(g: &GlobalArgs) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(t) = g.tol_degeneracy {
        tol.degeneracy = t;
    }
    if let Some(t) = g.tol_vanish {
        tol.vanishing = t;
    }
    tol
}

/// The operator from `--op`, or `−A` for the graph from `--graph` alone.
pub fn load_operator(g: &GlobalArgs) -> Result<SupportedMatrix, LabError> {
    let graph = g.graph.as_deref().map(nio::read_graph).transpose()?;
    match (&g.op, graph) {
        (Some(path), graph) => {
            let h = nio::read_operator(path)?;
            if let Some(graph) = graph {
                if &graph != h.graph() {
                    return Err(LabError::Schema("--graph does not match the operator's graph".into()));
                }
            }
            Ok(h)
        }
        (None, Some(graph)) => {
            let m = graph.edge_count();
            let n = graph.n();
            Ok(SupportedMatrix::real(Arc::new(graph), vec![0.0; n], vec![-1.0; m])?)
        }
        (None, None) => Err(LabError::Usage("--op or --graph is required".into())),
    }
}

fn require_k(g: &GlobalArgs) -> Result<usize, LabError> {
    g.k.ok_or_else(|| LabError::Usage("--k is required".into()))
}

fn record<R: Serialize>(cli: &Cli, tol: Tolerances, start: Instant, results: R) -> String {
    to_json_string(&RunRecord {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().to_string(),
        config: cli,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time: start.elapsed().as_secs_f64(),
        tolerances: tol,
        results,
    })
}

#[derive(Serialize)]
struct DistributionRow {
    schema_version: u32,
    s: usize,
    count: u64,
    probability: f64,
}

pub fn distribution_csv(d: &SurplusDistribution) -> Result<String, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (s, (&count, &probability)) in d.counts.iter().zip(&d.probs).enumerate() {
        w.serialize(DistributionRow { schema_version: SCHEMA_VERSION, s, count, probability })
            .map_err(|e| LabError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

#[derive(Serialize)]
struct CltCsvRow {
    schema_version: u32,
    beta: usize,
    n: usize,
    matching: usize,
    samples: usize,
    skipped_pairs: usize,
    ks_distance: f64,
    binomial_ks_distance: f64,
}

fn clt_csv(report: &CltReport) -> Result<String, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(CltCsvRow {
            schema_version: SCHEMA_VERSION,
            beta: r.beta,
            n: r.n,
            matching: r.matching,
            samples: r.samples,
            skipped_pairs: r.skipped_pairs,
            ks_distance: r.ks_distance,
            binomial_ks_distance: r.binomial_ks_distance,
        })
        .map_err(|e| LabError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

fn json_only(g: &GlobalArgs, command: &str) -> Result<(), LabError> {
    if g.format == Format::Csv {
        return Err(LabError::Usage(format!("{command} has no CSV output")));
    }
    Ok(())
}

/// Primary and companion documents for commands with both formats: the
/// requested format goes to `--out`, the other next to it.
fn both_formats(g: &GlobalArgs, json: String, csv: String) -> Output {
    let (primary, other, ext) = match g.format {
        Format::Json => (json, csv, "csv"),
        Format::Csv => (csv, json, "json"),
    };
    let extra = g.out.as_ref().map(|p| vec![(p.with_extension(ext), other)]).unwrap_or_default();
    Output { primary, extra, summary: Vec::new() }
}

pub fn run(cli: &Cli) -> Result<Output, LabError> {
    let start = Instant::now();
    let g = &cli.global;
    let tol = tolerances(g);
    match &cli.command {
        Command::Spectrum => {
            json_only(g, "spectrum")?;
            let h = load_operator(g)?;
            let res = spectrum(&h, &tol)?;
            Ok(Output { primary: record(cli, tol, start, res), ..Output::default() })
        }
        Command::NodalDist => {
            let h = load_operator(g)?;
            let d = surplus_distribution_with(&h, &tol)?;
            let csv = distribution_csv(&d)?;
            let summary = vec![format!("beta = {}, mean = {}, variance = {}", d.beta(), d.mean, d.variance)];
            let json = record(cli, tol, start, &d);
            Ok(Output { summary, ..both_formats(g, json, csv) })
        }
        Command::AvgDist { cap, skip_inadmissible, no_class_check } => {
            let h = load_operator(g)?;
            let opts = AverageOptions {
                cap: *cap,
                skip_inadmissible: *skip_inadmissible,
                cross_check_classes: !no_class_check,
                tol,
            };
            let res = average_surplus_distribution(&h, &opts)?;
            let d = &res.distribution;
            let mut summary = vec![
                format!("beta = {}, signings = {}", d.beta(), res.signings),
                format!("mean = {} (beta/2 = {})", d.mean, d.beta() as f64 / 2.0),
                format!("variance = {} (beta/4 = {})", d.variance, d.beta() as f64 / 4.0),
                format!("symmetric: {}", d.is_symmetric()),
                format!("binomial L1 deviation: {:e}", d.binomial_l1_deviation()),
            ];
            if !res.skipped.is_empty() {
                summary.push(format!(
                    "skipped {} inadmissible (signing, k) pairs; this is not the full average",
                    res.skipped.len()
                ));
            }
            let payload = AvgDistResult {
                partial: !res.skipped.is_empty(),
                symmetric: d.is_symmetric(),
                exactly_binomial: d.is_exactly_binomial(),
                binomial_l1_deviation: d.binomial_l1_deviation(),
                result: &res,
            };
            let csv = distribution_csv(d)?;
            let json = record(cli, tol, start, payload);
            Ok(Output { summary, ..both_formats(g, json, csv) })
        }
        Command::CriticalScan { starts, max_iter } => {
            json_only(g, "critical-scan")?;
            let h = load_operator(g)?;
            let k = require_k(g)?;
            let budget =
                ScanBudget { starts: *starts, seed: g.seed, max_iter: *max_iter, tol, ..ScanBudget::default() };
            let res = critical_scan(&h, k, &budget)?;
            let summary = vec![format!(
                "{} critical points from {} starts ({} unconverged)",
                res.reports.len(),
                res.starts,
                res.unconverged
            )];
            Ok(Output { primary: record(cli, tol, start, &res), summary, ..Output::default() })
        }
        Command::VerifyIndex { cap, no_fd } => {
            json_only(g, "verify-index")?;
            let h = load_operator(g)?;
            let opts = VerifyOptions { cap: *cap, finite_difference_step: (!no_fd).then_some(1e-4), tol };
            let table = verify_index_equals_surplus(&h, &opts)?;
            let summary = vec![format!(
                "index = surplus on {} rows, {} skipped, max FD error {:e}",
                table.agreements(),
                table.skipped(),
                table.max_fd_error()
            )];
            Ok(Output { primary: record(cli, tol, start, &table), summary, ..Output::default() })
        }
        Command::LinkageAnalyze { alpha, emit_fixture, samples } => {
            json_only(g, "linkage-analyze")?;
            if let Some(spec) = emit_fixture {
                return emit_fixture_files(cli, spec, tol, start);
            }
            let h = load_operator(g)?;
            let k = require_k(g)?;
            let point = match alpha {
                Some(path) => TorusPoint::new(h.clone(), nio::read_one_form(h.graph(), path)?)?,
                None => TorusPoint::from_matrix(&h)?,
            };
            let opts = AnalysisOptions { tol, samples: *samples, seed: g.seed, ..AnalysisOptions::default() };
            let an = analyze_exceptional(&point, k, &opts)?;
            let summary = vec![format!(
                "predicted index {}, Hessian index {}, nullity {} (dimension {})",
                an.predicted_index, an.hessian_index, an.hessian_nullity, an.manifold_dimension
            )];
            let payload = LinkageResult { hessian_matches_prediction: an.hessian_matches_prediction(), analysis: &an };
            Ok(Output { primary: record(cli, tol, start, payload), summary, ..Output::default() })
        }
        Command::TransversalityCheck { land } => {
            json_only(g, "transversality-check")?;
            let mut h = load_operator(g)?;
            let k = require_k(g)?;
            if *land {
                h = land_on_stratum(&h, k)?;
            }
            let v = is_transverse_at(&h, k, &tol)?;
            let note = (v.splitting == SplittingVerdict::Inconclusive)
                .then(|| "criterion inconclusive, using direct kernel test".to_string());
            let summary = vec![format!(
                "multiplicity {}, transverse: {}, criteria agree: {}",
                v.multiplicity,
                v.transverse(),
                v.criteria_agree()
            )];
            let payload = TransversalityResult {
                transverse: v.transverse(),
                criteria_agree: v.criteria_agree(),
                note,
                landed_operator: land.then(|| OperatorFile::from(&h)),
                verdict: &v,
            };
            Ok(Output { primary: record(cli, tol, start, payload), summary, ..Output::default() })
        }
        Command::CltExperiment { beta_min, beta_max, samples, eta } => {
            if beta_min > beta_max {
                return Err(LabError::Usage("--beta-min exceeds --beta-max".into()));
            }
            let opts = CltOptions {
                betas: (*beta_min..=*beta_max).collect(),
                samples: *samples,
                eta: *eta,
                seed: g.seed,
                tol,
                ..CltOptions::default()
            };
            let report = run_clt(&opts)?;
            let mut summary: Vec<String> = report
                .rows
                .iter()
                .map(|r| {
                    format!("beta = {}: KS = {:.6} (binomial {:.6})", r.beta, r.ks_distance, r.binomial_ks_distance)
                })
                .collect();
            summary.push(format!("KS non-increasing in beta: {}", report.ks_non_increasing));
            let csv = clt_csv(&report)?;
            let json = record(cli, tol, start, &report);
            Ok(Output { summary, ..both_formats(g, json, csv) })
        }
    }
}

#[derive(Serialize)]
struct AvgDistResult<'a> {
    partial: bool,
    symmetric: bool,
    exactly_binomial: bool,
    binomial_l1_deviation: f64,
    #[serde(flatten)]
    result: &'a nodal_morse::nodal::AverageResult,
}

#[derive(Serialize)]
struct LinkageResult<'a> {
    hessian_matches_prediction: bool,
    analysis: &'a ExceptionalAnalysis,
}

#[derive(Serialize)]
struct TransversalityResult<'a> {
    transverse: bool,
    criteria_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    landed_operator: Option<OperatorFile>,
    verdict: &'a TransversalityVerdict,
}

#[derive(Debug, Serialize)]
pub struct Cluster {
    pub k: usize,
    pub multiplicity: usize,
    pub lambda: f64,
    /// Vertices where the eigenvector vanishes (simple eigenvalues only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct SpectrumResult {
    pub n: usize,
    pub edges: usize,
    pub beta: usize,
    pub real: bool,
    pub properly_supported: bool,
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
}

pub fn spectrum(h: &SupportedMatrix, tol: &Tolerances) -> Result<SpectrumResult, LabError> {
    let es = eigh(h)?;
    let mut clusters = Vec::new();
    let mut k = 1;
    while k <= es.n() {
        let (m, _) = es.multiplicity(k, tol.degeneracy)?;
        let vanishing = (m == 1).then(|| is_nowhere_vanishing(&es.vector(k), tol.vanishing).1);
        clusters.push(Cluster { k, multiplicity: m, lambda: es.value(k), vanishing });
        k += m;
    }
    let graph: &Graph = h.graph();
    Ok(SpectrumResult {
        n: h.n(),
        edges: graph.edge_count(),
        beta: graph.betti_number(),
        real: h.is_real(),
        properly_supported: h.is_properly_supported(),
        eigenvalues: es.values.clone(),
        clusters,
    })
}

#[derive(Serialize)]
struct FixtureResult {
    d: usize,
    k: usize,
    k_prime: usize,
    lengths: Vec<f64>,
    c_value: f64,
    attempts: usize,
    operator_path: String,
    alpha_path: String,
}

fn parse_fixture_spec(spec: &str) -> Result<usize, LabError> {
    let digits = spec.strip_prefix("d=").unwrap_or(spec);
    digits.parse().map_err(|_| LabError::Usage(format!("--emit-fixture expects d=N, got {spec:?}")))
}

/// Companion path for the magnetic potential of an emitted fixture.
pub fn alpha_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "fixture".into());
    out.with_file_name(format!("{stem}.alpha.json"))
}

fn emit_fixture_files(cli: &Cli, spec: &str, tol: Tolerances, start: Instant) -> Result<Output, LabError> {
    let d = parse_fixture_spec(spec)?;
    let out = cli
        .global
        .out
        .as_ref()
        .ok_or_else(|| LabError::Usage("--emit-fixture needs --out for the operator file".into()))?;
    let fx = build_exceptional_fixture(d, cli.global.seed)?;
    let base = fx.point.base();
    let graph = base.graph();
    let alpha_path = alpha_path_for(out);
    let alpha_file = AlphaFile {
        alpha: graph
            .edges()
            .iter()
            .zip(&fx.point.angles().values)
            .map(|(&(r, s), &value)| nio::AlphaEntry { edge: [r, s], value })
            .collect(),
    };
    let res = FixtureResult {
        d,
        k: fx.k,
        k_prime: fx.k_prime,
        lengths: fx.lengths.lengths().to_vec(),
        c_value: fx.c_value,
        attempts: fx.attempts,
        operator_path: out.display().to_string(),
        alpha_path: alpha_path.display().to_string(),
    };
    let summary = vec![format!("fixture with d = {d}: analyse with --k {}", fx.k)];
    Ok(Output {
        primary: to_json_string(&OperatorFile::from(base)),
        extra: vec![
            (alpha_path, to_json_string(&alpha_file)),
            (
                out.with_file_name(format!(
                    "{}.record.json",
                    out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
                )),
                record(cli, tol, start, res),
            ),
        ],
        summary,
    })
}
