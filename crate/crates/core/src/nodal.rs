//! Nodal counts, nodal surplus, and surplus distributions of a single
//! operator or averaged over all signings.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::operators::{
    enumerate_signings, gauge_classes_of_signings, OperatorError, SupportedMatrix, DEFAULT_SIGNING_CAP,
};
use crate::spectral::{eigh, is_nowhere_vanishing, EigenSystem, SpectralError};
use crate::tolerance::{scale, Tolerances};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("eigenvalue {k} is not simple (multiplicity {multiplicity})")]
    NotSimple { k: usize, multiplicity: usize },
    #[error("eigenvector {k} vanishes at vertices {vertices:?}")]
    Vanishing { k: usize, vertices: Vec<usize> },
    #[error("edge product for eigenvector {k} on edge {edge:?} is not real (imaginary part {imag:e})")]
    NonRealEdge { k: usize, edge: (usize, usize), imag: f64 },
    #[error("degenerate edge product for eigenvector {k} on edge {edge:?} (real part {value:e})")]
    DegenerateEdge { k: usize, edge: (usize, usize), value: f64 },
    #[error("nodal count {count} for eigenvector {k} violates k-1 <= count <= k-1+{beta}")]
    BoundViolated { k: usize, count: usize, beta: usize },
    #[error("{total} inadmissible (signing, k) pairs; first: {first}")]
    Inadmissible { total: usize, first: InadmissiblePair, failures: Vec<InadmissiblePair> },
    #[error("distribution has zero variance")]
    ZeroVariance,
    #[error("signing and gauge-class averages disagree")]
    ClassMismatch,
}

/// A signing (by flip mask) and eigen-index at which the nodal count is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InadmissiblePair {
    pub mask: u64,
    pub k: usize,
    pub reason: String,
}

impl std::fmt::Display for InadmissiblePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "signing {:#b}, k = {}: {}", self.mask, self.k, self.reason)
    }
}

/// Nodal count of `λ_k` from a precomputed eigensystem of `h`.
pub fn nodal_count_with(
    h: &SupportedMatrix,
    es: &EigenSystem,
    k: usize,
    tol: &Tolerances,
) -> Result<usize, NodalError> {
    es.check_index(k)?;
    let (multiplicity, _) = es.multiplicity(k, tol.degeneracy)?;
    if multiplicity != 1 {
        return Err(NodalError::NotSimple { k, multiplicity });
    }
    let v = es.vector(k);
    let (ok, vertices) = is_nowhere_vanishing(&v, tol.vanishing);
    if !ok {
        return Err(NodalError::Vanishing { k, vertices });
    }
    let s = scale(h.frobenius_norm());
    let mut count = 0;
    for (&(r, t), &hrs) in h.graph().edges().iter().zip(h.offdiag()) {
        let z = v[r].conj() * hrs * v[t];
        if z.im.abs() > tol.edge_real * s {
            return Err(NodalError::NonRealEdge { k, edge: (r, t), imag: z.im });
        }
        if z.re.abs() < tol.edge_degenerate * s {
            return Err(NodalError::DegenerateEdge { k, edge: (r, t), value: z.re });
        }
        if z.re > 0.0 {
            count += 1;
        }
    }
    let beta = h.graph().betti_number();
    if count + 1 < k || count > k - 1 + beta {
        return Err(NodalError::BoundViolated { k, count, beta });
    }
    Ok(count)
}

/// `φ(h, k)`: the number of edges with `v̄_r h_rs v_s > 0`.
pub fn nodal_count(h: &SupportedMatrix, k: usize) -> Result<usize, NodalError> {
    nodal_count_with(h, &eigh(h)?, k, &Tolerances::default())
}

/// `φ(h, k) − (k − 1)`, in `0..=β`.
pub fn nodal_surplus(h: &SupportedMatrix, k: usize) -> Result<usize, NodalError> {
    Ok(nodal_count(h, k)? - (k - 1))
}

/// Histogram of nodal surplus values `s = 0..=β`, with exact integer counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurplusDistribution {
    pub counts: Vec<u64>,
    pub probs: Vec<f64>,
    pub n_samples: u64,
    pub mean: f64,
    pub variance: f64,
}

impl SurplusDistribution {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let t = total as i128;
        let s1: i128 = counts.iter().enumerate().map(|(s, &c)| s as i128 * c as i128).sum();
        let s2: i128 = counts.iter().enumerate().map(|(s, &c)| (s * s) as i128 * c as i128).sum();
        let (probs, mean, variance) = if total == 0 {
            (vec![0.0; counts.len()], 0.0, 0.0)
        } else {
            (
                counts.iter().map(|&c| c as f64 / total as f64).collect(),
                s1 as f64 / total as f64,
                (s2 * t - s1 * s1) as f64 / (t * t) as f64,
            )
        };
        Self { counts, probs, n_samples: total, mean, variance }
    }

    pub fn beta(&self) -> usize {
        self.counts.len() - 1
    }

    /// `count(s) == count(β − s)` for every `s`.
    pub fn is_symmetric(&self) -> bool {
        self.counts.iter().eq(self.counts.iter().rev())
    }

    /// `Σ_s |P_s − 2^{−β} C(β, s)|`.
    pub fn binomial_l1_deviation(&self) -> f64 {
        self.probs.iter().zip(binomial_probs(self.beta())).map(|(p, q)| (p - q).abs()).sum()
    }

    /// True iff the counts are exactly proportional to `C(β, s)`.
    pub fn is_exactly_binomial(&self) -> bool {
        let beta = self.beta();
        let total = self.n_samples as u128;
        (0..=beta).all(|s| (self.counts[s] as u128) << beta == total * binomial(beta, s) as u128)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `2^{−β} C(β, s)` for `s = 0..=β`.
pub fn binomial_probs(beta: usize) -> Vec<f64> {
    let total = 2f64.powi(beta as i32);
    (0..=beta).map(|s| binomial(beta, s) as f64 / total).collect()
}

/// Surplus distribution of one operator over `k = 1..=n`.
pub fn surplus_distribution(h: &SupportedMatrix) -> Result<SurplusDistribution, NodalError> {
    surplus_distribution_with(h, &Tolerances::default())
}

pub fn surplus_distribution_with(h: &SupportedMatrix, tol: &Tolerances) -> Result<SurplusDistribution, NodalError> {
    let es = eigh(h)?;
    let mut counts = vec![0u64; h.graph().betti_number() + 1];
    for k in 1..=h.n() {
        counts[nodal_count_with(h, &es, k, tol)? + 1 - k] += 1;
    }
    Ok(SurplusDistribution::from_counts(counts))
}

#[derive(Debug, Clone)]
pub struct AverageOptions {
    pub cap: usize,
    /// Drop inadmissible `(signing, k)` pairs instead of failing. The result no
    /// longer matches the average over all signings.
    pub skip_inadmissible: bool,
    /// Also compute the average from gauge-class representatives and require agreement.
    pub cross_check_classes: bool,
    pub tol: Tolerances,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_SIGNING_CAP,
            skip_inadmissible: false,
            cross_check_classes: true,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageResult {
    pub distribution: SurplusDistribution,
    pub signings: u64,
    /// Pairs dropped under `skip_inadmissible`, sorted by `(mask, k)`.
    pub skipped: Vec<InadmissiblePair>,
    pub classes_checked: bool,
}

#[derive(Default)]
struct Tally {
    counts: Vec<u64>,
    failures: Vec<InadmissiblePair>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.failures.extend(other.failures);
        self
    }
}

fn tally_signing(base: &SupportedMatrix, mask: u64, weight: u64, beta: usize, tol: &Tolerances) -> Tally {
    let h = base.signing(mask);
    let mut tally = Tally { counts: vec![0; beta + 1], failures: Vec::new() };
    let es = match eigh(&h) {
        Ok(es) => es,
        Err(e) => {
            tally.failures.push(InadmissiblePair { mask, k: 0, reason: e.to_string() });
            return tally;
        }
    };
    for k in 1..=h.n() {
        match nodal_count_with(&h, &es, k, tol) {
            Ok(c) => tally.counts[c + 1 - k] += weight,
            Err(e) => tally.failures.push(InadmissiblePair { mask, k, reason: e.to_string() }),
        }
    }
    tally
}

/// Exact average of the surplus distribution over all `2^|E|` signings of a
/// real properly supported `h`.
pub fn average_surplus_distribution(h: &SupportedMatrix, opts: &AverageOptions) -> Result<AverageResult, NodalError> {
    h.require_proper_support()?;
    let signings = enumerate_signings(h, opts.cap)?;
    let beta = h.graph().betti_number();
    let total = signings.len();
    let tally = signings
        .range()
        .into_par_iter()
        .fold(Tally::default, |acc, mask| acc.merge(tally_signing(h, mask, 1, beta, &opts.tol)))
        .reduce(Tally::default, Tally::merge);
    let mut counts = tally.counts;
    counts.resize(beta + 1, 0);
    let mut failures = tally.failures;
    failures.sort_by_key(|f| (f.mask, f.k));
    if !failures.is_empty() && !opts.skip_inadmissible {
        return Err(NodalError::Inadmissible { total: failures.len(), first: failures[0].clone(), failures });
    }

    let classes_checked = opts.cross_check_classes && failures.is_empty();
    if classes_checked {
        let by_class = average_over_gauge_classes(h, opts)?;
        if by_class.counts != counts {
            return Err(NodalError::ClassMismatch);
        }
    }
    Ok(AverageResult {
        distribution: SurplusDistribution::from_counts(counts),
        signings: total,
        skipped: failures,
        classes_checked,
    })
}

/// The same average computed from one representative per gauge class,
/// weighted by the class size `2^{n−c}`.
pub fn average_over_gauge_classes(
    h: &SupportedMatrix,
    opts: &AverageOptions,
) -> Result<SurplusDistribution, NodalError> {
    let classes = gauge_classes_of_signings(h, opts.cap)?;
    let beta = h.graph().betti_number();
    let tally = classes
        .par_iter()
        .map(|c| tally_signing(h, c.representative, c.size, beta, &opts.tol))
        .reduce(Tally::default, Tally::merge);
    if let Some(first) = tally.failures.first() {
        return Err(NodalError::Inadmissible {
            total: tally.failures.len(),
            first: first.clone(),
            failures: tally.failures,
        });
    }
    let mut counts = tally.counts;
    counts.resize(beta + 1, 0);
    Ok(SurplusDistribution::from_counts(counts))
}

/// Point masses `P_j` at `x_j = (j − β/2)/σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedDistribution {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

impl NormalizedDistribution {
    pub fn cdf(&self, x: f64) -> f64 {
        self.points.iter().zip(&self.weights).filter(|(p, _)| **p <= x).map(|(_, w)| w).sum()
    }

    pub fn moments(&self) -> (f64, f64) {
        let mean: f64 = self.points.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        let second: f64 = self.points.iter().zip(&self.weights).map(|(x, w)| x * x * w).sum();
        (mean, second - mean * mean)
    }
}

/// Centres at `β/2` and scales by the standard deviation of `d`.
pub fn normalized_distribution(d: &SurplusDistribution, beta: usize) -> Result<NormalizedDistribution, NodalError> {
    if d.variance <= 0.0 {
        return Err(NodalError::ZeroVariance);
    }
    let sigma = d.variance.sqrt();
    let centre = beta as f64 / 2.0;
    Ok(NormalizedDistribution {
        points: (0..d.probs.len()).map(|j| (j as f64 - centre) / sigma).collect(),
        weights: d.probs.clone(),
        sigma,
    })
}
