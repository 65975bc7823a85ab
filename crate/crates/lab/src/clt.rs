//! Probe of the normal-limit behaviour of averaged nodal surplus laws.
//!
//! Samples only the complete-minus-matching family, so it says nothing about
//! graphs outside it.

use std::sync::Arc;

use nodal_morse::nodal::{
    average_surplus_distribution, binomial_probs, normalized_distribution, AverageOptions, NormalizedDistribution,
    SurplusDistribution,
};
use nodal_morse::transversality::complete_minus_matching;
use nodal_morse::{Graph, SupportedMatrix, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::LabError;

pub const FAMILY: &str = "complete graph minus a matching, diagonal uniform on [0, eta], off-diagonal -1";

/// `(n, matching size)` giving first Betti number `beta`.
pub fn family_member(beta: usize) -> Option<(usize, usize)> {
    match beta {
        1 => Some((3, 0)),
        2 => Some((4, 1)),
        3 => Some((4, 0)),
        4 => Some((5, 2)),
        5 => Some((5, 1)),
        6 => Some((5, 0)),
        7 => Some((6, 3)),
        8 => Some((6, 2)),
        9 => Some((6, 1)),
        10 => Some((6, 0)),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CltOptions {
    pub betas: Vec<usize>,
    pub samples: usize,
    pub eta: f64,
    pub seed: u64,
    pub cap: usize,
    #[serde(skip)]
    pub tol: Tolerances,
}

impl Default for CltOptions {
    fn default() -> Self {
        Self { betas: (3..=8).collect(), samples: 20, eta: 100.0, seed: 0, cap: 24, tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CltRow {
    pub beta: usize,
    pub n: usize,
    pub matching: usize,
    pub samples: usize,
    /// Inadmissible `(signing, k)` pairs dropped across all samples.
    pub skipped_pairs: usize,
    pub pooled: SurplusDistribution,
    pub normalized_mean: f64,
    pub normalized_variance: f64,
    pub ks_distance: f64,
    /// KS distance of the exact binomial law, for reference.
    pub binomial_ks_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub family: String,
    pub coverage: String,
    pub eta: f64,
    pub rows: Vec<CltRow>,
    pub ks_non_increasing: bool,
}

/// `sup_x |F(x) − Φ(x)|` for a finitely supported law; the supremum is
/// attained at an atom, from one side or the other.
pub fn ks_to_standard_normal(d: &NormalizedDistribution) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("valid parameters");
    let mut atoms: Vec<(f64, f64)> = d.points.iter().copied().zip(d.weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    for (x, w) in atoms {
        let phi = normal.cdf(x);
        let above = below + w;
        worst = worst.max((below - phi).abs()).max((above - phi).abs());
        below = above;
    }
    worst
}

pub fn sample_operator(graph: &Arc<Graph>, eta: f64, rng: &mut ChaCha8Rng) -> Result<SupportedMatrix, LabError> {
    let n = graph.n();
    let diag: Vec<f64> = (0..n).map(|_| eta * rng.gen::<f64>()).collect();
    Ok(SupportedMatrix::real(graph.clone(), diag, vec![-1.0; graph.edge_count()])?)
}

pub fn run_clt(opts: &CltOptions) -> Result<CltReport, LabError> {
    let mut rows = Vec::new();
    for &beta in &opts.betas {
        let (n, matching) =
            family_member(beta).ok_or_else(|| LabError::Usage(format!("no family member with beta = {beta}")))?;
        let graph = Arc::new(complete_minus_matching(n, matching));
        let avg = AverageOptions { cap: opts.cap, skip_inadmissible: true, cross_check_classes: false, tol: opts.tol };
        let per_sample: Vec<(Vec<u64>, usize)> = (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((beta as u64) << 32) ^ i as u64);
                let h = sample_operator(&graph, opts.eta, &mut rng)?;
                let res = average_surplus_distribution(&h, &avg)?;
                Ok((res.distribution.counts, res.skipped.len()))
            })
            .collect::<Result<_, LabError>>()?;
        let mut counts = vec![0u64; beta + 1];
        let mut skipped_pairs = 0;
        for (c, skipped) in per_sample {
            for (a, b) in counts.iter_mut().zip(c) {
                *a += b;
            }
            skipped_pairs += skipped;
        }
        let pooled = SurplusDistribution::from_counts(counts);
        let normalized = normalized_distribution(&pooled, beta)?;
        let (normalized_mean, normalized_variance) = normalized.moments();
        let binom =
            SurplusDistribution::from_counts((0..=beta).map(|s| nodal_morse::nodal::binomial(beta, s)).collect());
        debug_assert_eq!(binom.probs, binomial_probs(beta));
        rows.push(CltRow {
            beta,
            n,
            matching,
            samples: opts.samples,
            skipped_pairs,
            ks_distance: ks_to_standard_normal(&normalized),
            binomial_ks_distance: ks_to_standard_normal(&normalized_distribution(&binom, beta)?),
            normalized_mean,
            normalized_variance,
            pooled,
        });
    }
    let ks_non_increasing = rows.windows(2).all(|w| w[1].ks_distance <= w[0].ks_distance + 1e-12);
    Ok(CltReport {
        family: FAMILY.to_string(),
        coverage: "named family only; not a uniform sample over connected graphs".to_string(),
        eta: opts.eta,
        rows,
        ks_non_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_betti_numbers() {
        for beta in 1..=10 {
            let (n, m) = family_member(beta).unwrap();
            assert_eq!(complete_minus_matching(n, m).betti_number(), beta);
        }
    }

    #[test]
    fn binomial_ks_values() {
        let ks = |beta: usize| {
            let d =
                SurplusDistribution::from_counts((0..=beta).map(|s| nodal_morse::nodal::binomial(beta, s)).collect());
            ks_to_standard_normal(&normalized_distribution(&d, beta).unwrap())
        };
        // symmetric two-point law at ±1: the jump at 0 is 1/2 − Φ(−1)
        assert!((ks(1) - 0.341344746).abs() < 1e-8);
        let seq: Vec<f64> = (3..=8).map(ks).collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    }
}
