//! Planar linkages and exceptional critical points.
//!
//! At a critical point whose eigenvector `v` vanishes at exactly one vertex
//! `v0`, the eigenvalue equation at `v0` says that the vectors
//! `b_r v_r = M_r e^{iθ_r}` (one per neighbour of `v0`) close up into a planar
//! polygon. The critical set through the point is modelled on the space of
//! such polygons with fixed side lengths `M_r`, modulo rotation.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::morse::{hessian_lambda_with, is_critical, morse_index, GaugeChart, MorseError, TorusPoint};
use crate::nodal::{nodal_count_with, NodalError};
use crate::operators::{gauge_transform, GaugePhase, OperatorError, SupportedMatrix};
use crate::spectral::{eigh, is_nowhere_vanishing, EigenSystem, SpectralError};
use crate::tolerance::{scale, Tolerances};

/// Largest number of links for exhaustive genericity checks.
pub const GENERICITY_CAP: usize = 20;
const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkageError {
    #[error("link lengths must be positive and finite")]
    InvalidLength,
    #[error("{0} links exceed the genericity cap of {GENERICITY_CAP}")]
    TooManyLinks(usize),
    #[error("link lengths are not generic: a signed sum vanishes")]
    NonGeneric,
    #[error("configuration space is empty: the longest link exceeds the sum of the others")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Nodal(#[from] NodalError),
    #[error("eigenvalue {k} is not simple (multiplicity {multiplicity})")]
    NotSimple { k: usize, multiplicity: usize },
    #[error("point is not critical for eigenvalue {0}")]
    NotCritical(usize),
    #[error("eigenvector vanishes at {0:?}; the analysis needs exactly one vanishing vertex")]
    VanishingSet(Vec<usize>),
    #[error("vanishing vertex has fewer than three neighbours")]
    TooFewLinks,
    #[error("restricted block is not real (imaginary part {0:e})")]
    BlockNotReal(f64),
    #[error("closure residual {0:e} too large")]
    Closure(f64),
    #[error("eigenvalue is not a simple eigenvalue of the restricted block ({0})")]
    BlockNotSimple(String),
    #[error("link lengths are not generic")]
    NotGeneric,
    #[error("resolvent coefficient {0:e} is too close to zero")]
    DegenerateResolvent(f64),
    #[error("no fixture found after {0} attempts")]
    FixtureAttempts(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkageLengths {
    lengths: Vec<f64>,
}

impl LinkageLengths {
    pub fn new(lengths: Vec<f64>) -> Result<Self, LinkageError> {
        if lengths.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(LinkageError::InvalidLength);
        }
        Ok(Self { lengths })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Indices of the longest and second longest link (first index on ties).
    fn two_longest(&self) -> (usize, Option<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.lengths[b].total_cmp(&self.lengths[a]).then(a.cmp(&b)));
        (order[0], order.get(1).copied())
    }
}

/// No signed sum `Σ ε_r M_r` vanishes (tolerance `1e-9 · max M_r`).
pub fn is_generic(l: &LinkageLengths) -> Result<bool, LinkageError> {
    let d = l.len();
    if d > GENERICITY_CAP {
        return Err(LinkageError::TooManyLinks(d));
    }
    if d == 0 {
        return Ok(false);
    }
    let tol = 1e-9 * l.lengths.iter().cloned().fold(0.0, f64::max);
    // the first sign is fixed to +1; the rest run over all patterns
    for mask in 0..1u64 << (d - 1) {
        let sum: f64 =
            l.lengths.iter().enumerate().map(|(r, &m)| if r > 0 && mask >> (r - 1) & 1 == 1 { -m } else { m }).sum();
        if sum.abs() <= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Empty,
    Connected,
    TwoComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfigurationSpace {
    pub topology: Topology,
    /// `d − 3` when nonempty.
    pub dimension: Option<usize>,
}

/// Emptiness, dimension and number of components of the configuration space
/// of generic lengths.
pub fn solvability_and_connectivity(l: &LinkageLengths) -> Result<ConfigurationSpace, LinkageError> {
    if !is_generic(l)? {
        return Err(LinkageError::NonGeneric);
    }
    let (s, t) = l.two_longest();
    let total = l.total();
    let ms = l.lengths[s];
    if ms > total - ms {
        return Ok(ConfigurationSpace { topology: Topology::Empty, dimension: None });
    }
    let mt = t.map_or(0.0, |t| l.lengths[t]);
    let topology = if ms + mt <= 0.5 * total { Topology::Connected } else { Topology::TwoComponents };
    Ok(ConfigurationSpace { topology, dimension: Some(l.len() - 3) })
}

/// A closed configuration `Σ e^{iθ_r} M_r = 0`, normalized to `θ_0 = 0`.
pub fn sample_configuration(l: &LinkageLengths, seed: u64) -> Result<Vec<f64>, LinkageError> {
    let d = l.len();
    let total = l.total();
    let (s, t) = l.two_longest();
    let ms = l.lengths[s];
    let Some(t) = t else { return Err(LinkageError::Empty) };
    if ms > (total - ms) * (1.0 + 1e-12) {
        return Err(LinkageError::Empty);
    }
    let mt = l.lengths[t];
    let rest: Vec<usize> = (0..d).filter(|&r| r != s && r != t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = ms - mt;
    let hi = ms + mt;
    let rest_sum: f64 = rest.iter().map(|&r| l.lengths[r]).sum();

    let sum_of = |angles: &[f64]| -> Complex64 {
        rest.iter().zip(angles).map(|(&r, &a)| Complex64::from_polar(l.lengths[r], a)).sum()
    };

    for _ in 0..256 {
        let mut angles: Vec<f64> = rest.iter().map(|_| rng.gen_range(0.0..TWO_PI)).collect();
        let mut w = sum_of(&angles);
        if w.norm() < lo {
            // straighten towards an aligned chain, whose resultant is rest_sum >= lo
            let target = lo + 0.5 * (rest_sum.min(hi) - lo);
            let start = angles.clone();
            let aligned = start.first().copied().unwrap_or(0.0);
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let trial: Vec<f64> = start.iter().map(|&x| x + m * (aligned - x)).collect();
                if sum_of(&trial).norm() >= target {
                    b = m;
                } else {
                    a = m;
                }
            }
            angles = start.iter().map(|&x| x + b * (aligned - x)).collect();
            w = sum_of(&angles);
        }
        let rho = w.norm();
        if rho < lo * (1.0 - 1e-12) || rho > hi {
            continue;
        }
        let z = -w;
        let (theta_s, theta_t) = if rho == 0.0 {
            let a = rng.gen_range(0.0..TWO_PI);
            (a, a + PI)
        } else {
            let cos_phi = ((ms * ms + rho * rho - mt * mt) / (2.0 * ms * rho)).clamp(-1.0, 1.0);
            let phi = cos_phi.acos();
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let ts = z.arg() + sign * phi;
            let tt = (z - Complex64::from_polar(ms, ts)).arg();
            (ts, tt)
        };
        let mut theta = vec![0.0; d];
        for (&r, &a) in rest.iter().zip(&angles) {
            theta[r] = a;
        }
        theta[s] = theta_s;
        theta[t] = theta_t;
        let shift = theta[0];
        let theta: Vec<f64> = theta.iter().map(|&a| (a - shift).rem_euclid(TWO_PI) % TWO_PI).collect();
        if closure_residual(l, &theta) <= 1e-10 * total {
            return Ok(theta);
        }
    }
    Err(LinkageError::Empty)
}

pub fn closure_residual(l: &LinkageLengths, theta: &[f64]) -> f64 {
    l.lengths.iter().zip(theta).map(|(&m, &a)| Complex64::from_polar(m, a)).sum::<Complex64>().norm()
}

/// Outcome of one sampled check of the critical set through the point.
#[derive(Debug, Clone, Serialize)]
pub struct SampledCheck {
    pub seed: u64,
    pub eigen_residual: f64,
    pub gradient_norm: f64,
    pub simple: bool,
    pub c_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalAnalysis {
    pub vanishing_vertex: usize,
    /// Neighbours of the vanishing vertex, in the order of `lengths`.
    pub links: Vec<usize>,
    /// `a = h_{v0 v0}`.
    pub a: f64,
    /// Entries `b_r` of the gauge-rotated point.
    pub b: Vec<Complex64>,
    pub lambda: f64,
    pub k: usize,
    /// 1-based index of `λ` in the spectrum of the restricted real block.
    pub k_prime: usize,
    pub lengths: LinkageLengths,
    pub theta: Vec<f64>,
    pub closure_residual: f64,
    pub c_value: f64,
    pub block_surplus: usize,
    pub configuration: ConfigurationSpace,
    pub manifold_dimension: usize,
    pub predicted_index: usize,
    pub hessian_index: usize,
    pub hessian_nullity: usize,
    pub hessian_eigenvalues: Vec<f64>,
    /// Checks at other points of the critical set. They sample the set; they do
    /// not prove the hypotheses on all of it.
    pub sampled_checks: Vec<SampledCheck>,
}

impl ExceptionalAnalysis {
    pub fn hessian_matches_prediction(&self) -> bool {
        self.hessian_nullity == self.manifold_dimension && self.hessian_index == self.predicted_index
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub tol: Tolerances,
    /// `|c|` at or below this rejects the point.
    pub c_threshold: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), c_threshold: 1e-9, samples: 8, seed: 0 }
    }
}

/// Analysis of an exceptional critical point of `λ_k` at `p`.
pub fn analyze_exceptional(
    p: &TorusPoint,
    k: usize,
    opts: &AnalysisOptions,
) -> Result<ExceptionalAnalysis, LinkageError> {
    let tol = &opts.tol;
    let h = p.matrix();
    let es = eigh(&h)?;
    es.check_index(k)?;
    let (multiplicity, _) = es.multiplicity(k, tol.degeneracy)?;
    if multiplicity != 1 {
        return Err(LinkageError::NotSimple { k, multiplicity });
    }
    if !is_critical(p, k, tol)?.critical {
        return Err(LinkageError::NotCritical(k));
    }
    let v = es.vector(k);
    let (_, vanishing) = is_nowhere_vanishing(&v, tol.vanishing);
    if vanishing.len() != 1 {
        return Err(LinkageError::VanishingSet(vanishing));
    }
    let v0 = vanishing[0];
    let graph = h.graph();
    let links: Vec<usize> = graph.neighbors(v0).to_vec();
    if links.len() < 3 {
        return Err(LinkageError::TooFewLinks);
    }
    let s = scale(h.frobenius_norm());

    // rotate the gauge so that v is real and nonnegative
    let phases: Vec<f64> = (0..h.n()).map(|r| if r == v0 { 0.0 } else { v[r].arg() }).collect();
    let rotated = gauge_transform(&GaugePhase::new(phases.clone()), &h)?;
    let vr: Vec<f64> = (0..h.n()).map(|r| if r == v0 { 0.0 } else { v[r].norm() }).collect();

    let rest: Vec<usize> = (0..h.n()).filter(|&r| r != v0).collect();
    let sub = graph.induced_subgraph(&rest)?;
    let mut worst_imag: f64 = 0.0;
    let block_offdiag: Vec<f64> = sub
        .graph
        .edges()
        .iter()
        .map(|&(a, b)| {
            let z = rotated.entry(sub.to_old[a], sub.to_old[b]);
            worst_imag = worst_imag.max(z.im.abs());
            z.re
        })
        .collect();
    if worst_imag > tol.edge_real * s {
        return Err(LinkageError::BlockNotReal(worst_imag));
    }
    let block_diag: Vec<f64> = rest.iter().map(|&r| h.diag()[r]).collect();
    let block = SupportedMatrix::real(Arc::new(sub.graph.clone()), block_diag, block_offdiag)?;

    let lambda = es.value(k);
    let block_es = eigh(&block)?;
    let k_prime = 1
        + (0..block_es.n())
            .min_by(|&a, &b| (block_es.values[a] - lambda).abs().total_cmp(&(block_es.values[b] - lambda).abs()))
            .expect("nonempty block");
    if (block_es.value(k_prime) - lambda).abs() > block_es.abs_tol(tol.degeneracy).max(1e-8 * s) {
        return Err(LinkageError::BlockNotSimple(format!("{lambda} is not an eigenvalue of the block")));
    }
    let (m_block, _) = block_es.multiplicity(k_prime, tol.degeneracy)?;
    if m_block != 1 {
        return Err(LinkageError::BlockNotSimple(format!("multiplicity {m_block}")));
    }

    let b: Vec<Complex64> = links.iter().map(|&r| rotated.entry(v0, r)).collect();
    let products: Vec<Complex64> = b.iter().zip(&links).map(|(&br, &r)| br * vr[r]).collect();
    let lengths = LinkageLengths::new(products.iter().map(|z| z.norm()).collect())?;
    let theta: Vec<f64> = products.iter().map(|z| z.arg().rem_euclid(TWO_PI)).collect();
    let residual = closure_residual(&lengths, &theta);
    if residual > 1e-9 * lengths.total().max(1.0) {
        return Err(LinkageError::Closure(residual));
    }
    if !is_generic(&lengths)? {
        return Err(LinkageError::NotGeneric);
    }
    let c_value = es.resolvent_coefficient(k, v0, tol.degeneracy)?;
    if c_value.abs() <= opts.c_threshold {
        return Err(LinkageError::DegenerateResolvent(c_value));
    }
    let block_count = nodal_count_with(&block, &block_es, k_prime, tol)?;
    let block_surplus = block_count + 1 - k_prime;
    let configuration = solvability_and_connectivity(&lengths)?;
    let manifold_dimension = links.len() - 3;
    let predicted_index = block_surplus + if c_value < 0.0 { 2 } else { 0 };

    let chart = GaugeChart::new(graph);
    let hess = hessian_lambda_with(p, k, &chart, tol)?;
    let mi = morse_index(&hess, tol.rank)?;

    let sampled_checks = (0..opts.samples as u64)
        .map(|i| {
            let seed = opts.seed.wrapping_add(i);
            sampled_check(&rotated, v0, &links, &lengths, &vr, k, seed, tol)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ExceptionalAnalysis {
        vanishing_vertex: v0,
        a: h.diag()[v0],
        b,
        lambda,
        k,
        k_prime,
        theta,
        closure_residual: residual,
        c_value,
        block_surplus,
        configuration,
        manifold_dimension,
        predicted_index,
        hessian_index: mi.index,
        hessian_nullity: mi.nullity,
        hessian_eigenvalues: mi.eigenvalues,
        sampled_checks,
        links,
        lengths,
    })
}

/// Moves to another closed configuration by changing only the phases at the
/// vanishing vertex and re-checks the eigenvector, criticality and `c`.
#[allow(clippy::too_many_arguments)]
fn sampled_check(
    rotated: &SupportedMatrix,
    v0: usize,
    links: &[usize],
    lengths: &LinkageLengths,
    vr: &[f64],
    k: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SampledCheck, LinkageError> {
    let theta = sample_configuration(lengths, seed)?;
    let graph = rotated.graph();
    let mut offdiag = rotated.offdiag().to_vec();
    for ((&r, &m), &t) in links.iter().zip(lengths.lengths()).zip(&theta) {
        let e = graph.edge_index(v0, r).expect("link");
        let b = Complex64::from_polar(m / vr[r], t);
        offdiag[e] = if v0 < r { b } else { b.conj() };
    }
    let moved = SupportedMatrix::new(rotated.graph_arc().clone(), rotated.diag().to_vec(), offdiag)?;
    let es = eigh(&moved)?;
    let v = DVector::from_iterator(vr.len(), vr.iter().map(|&x| Complex64::new(x, 0.0)));
    let lam = (v.adjoint() * moved.to_dense() * &v)[(0, 0)].re;
    let eigen_residual = (moved.to_dense() * &v - &v * Complex64::new(lam, 0.0)).norm();
    let (multiplicity, _) = es.multiplicity(k, tol.degeneracy)?;
    let simple = multiplicity == 1;
    let (gradient_norm, c_value) = if simple {
        let p = TorusPoint::from_matrix(&moved)?;
        let g = crate::morse::eigenvalue_gradient(&p, k)?;
        (g.values.iter().map(|x| x * x).sum::<f64>().sqrt(), es.resolvent_coefficient(k, v0, tol.degeneracy)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SampledCheck { seed, eigen_residual, gradient_norm, simple, c_value })
}

/// A constructed exceptional critical point: vertex 0 joined to every vertex
/// of a complete graph on `1..=d`, with the eigenvector vanishing at 0.
#[derive(Debug, Clone)]
pub struct ExceptionalFixture {
    pub point: TorusPoint,
    pub k: usize,
    pub k_prime: usize,
    pub lengths: LinkageLengths,
    pub c_value: f64,
    pub attempts: usize,
}

impl ExceptionalFixture {
    pub fn matrix(&self) -> SupportedMatrix {
        self.point.matrix()
    }
}

/// Builds an exceptional critical point with `d` links satisfying the three
/// hypotheses, deterministically from `seed`.
pub fn build_exceptional_fixture(d: usize, seed: u64) -> Result<ExceptionalFixture, LinkageError> {
    if d < 3 {
        return Err(LinkageError::TooFewLinks);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerances::default();
    const ATTEMPTS: usize = 200;
    for attempt in 1..=ATTEMPTS {
        if let Some(fx) = try_fixture(d, &mut rng, &tol)? {
            return Ok(ExceptionalFixture { attempts: attempt, ..fx });
        }
    }
    Err(LinkageError::FixtureAttempts(ATTEMPTS))
}

fn try_fixture(d: usize, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Option<ExceptionalFixture>, LinkageError> {
    let n = d + 1;
    let block_graph = Arc::new(Graph::complete(d));
    let block_diag: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let block_off: Vec<f64> = (0..block_graph.edge_count())
        .map(|_| rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let block = SupportedMatrix::real(block_graph.clone(), block_diag.clone(), block_off.clone())?;
    let block_es = eigh(&block)?;
    let candidates: Vec<usize> = (1..=d)
        .filter(|&j| {
            block_es.multiplicity(j, tol.degeneracy).map(|(m, _)| m == 1).unwrap_or(false)
                && block_es.vector(j).iter().all(|z| z.norm() > 0.05)
        })
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let k_prime = candidates[rng.gen_range(0..candidates.len())];
    let lambda = block_es.value(k_prime);
    let eig = block_es.vector(k_prime);
    // switch vertex signs so the block eigenvector is positive
    let sigma: Vec<f64> = eig.iter().map(|z| z.re.signum()).collect();
    let vprime: Vec<f64> = eig.iter().map(|z| z.re.abs()).collect();
    let switched_off: Vec<f64> =
        block_graph.edges().iter().zip(&block_off).map(|(&(a, b), &x)| sigma[a] * sigma[b] * x).collect();

    let lengths = LinkageLengths::new((0..d).map(|_| rng.gen_range(0.5..1.5)).collect())?;
    let space = match solvability_and_connectivity(&lengths) {
        Ok(space) if space.topology != Topology::Empty => space,
        _ => return Ok(None),
    };
    let _ = space;
    if !generic_with_margin(&lengths, 1e-3) {
        return Ok(None);
    }
    let theta = sample_configuration(&lengths, rng.gen())?;

    let mut edges: Vec<(usize, usize)> = (1..=d).map(|r| (0, r)).collect();
    edges.extend(block_graph.edges().iter().map(|&(a, b)| (a + 1, b + 1)));
    let graph = Arc::new(Graph::new(n, edges)?);
    let mut diag = vec![rng.gen_range(-2.0..2.0)];
    diag.extend(&block_diag);
    let mut offdiag = vec![Complex64::new(0.0, 0.0); graph.edge_count()];
    for r in 1..=d {
        let e = graph.edge_index(0, r).expect("link");
        offdiag[e] = Complex64::from_polar(lengths.lengths()[r - 1] / vprime[r - 1], theta[r - 1]);
    }
    for (&(a, b), &x) in block_graph.edges().iter().zip(&switched_off) {
        offdiag[graph.edge_index(a + 1, b + 1).expect("block edge")] = Complex64::new(x, 0.0);
    }
    let h = SupportedMatrix::new(graph, diag, offdiag)?;
    let es = eigh(&h)?;
    let Some(k) = locate(&es, lambda) else { return Ok(None) };
    if es.multiplicity(k, tol.degeneracy)?.0 != 1 || es.vector(k)[0].norm() > 1e-10 {
        return Ok(None);
    }
    let c_value = es.resolvent_coefficient(k, 0, tol.degeneracy)?;
    if c_value.abs() < 1e-6 {
        return Ok(None);
    }
    let point = TorusPoint::from_matrix(&h)?;
    Ok(Some(ExceptionalFixture { point, k, k_prime, lengths, c_value, attempts: 0 }))
}

fn locate(es: &EigenSystem, lambda: f64) -> Option<usize> {
    (1..=es.n()).find(|&j| (es.value(j) - lambda).abs() <= 1e-10 * scale(es.norm))
}

fn generic_with_margin(l: &LinkageLengths, margin: f64) -> bool {
    let d = l.len();
    (0..1u64 << (d - 1)).all(|mask| {
        let s: f64 =
            l.lengths().iter().enumerate().map(|(r, &m)| if r > 0 && mask >> (r - 1) & 1 == 1 { -m } else { m }).sum();
        s.abs() > margin
    })
}

/// The conjugate point of a fixture, with the same `k`.
pub fn conjugate_fixture(fx: &ExceptionalFixture) -> ExceptionalFixture {
    ExceptionalFixture { point: fx.point.conjugate(), ..fx.clone() }
}
