mod common;

use std::sync::Arc;

use common::*;
use nalgebra::DMatrix;
use nodal_morse::nodal::{average_surplus_distribution, nodal_count, AverageOptions};
use nodal_morse::operators::{enumerate_signings, gauge_classes_of_signings};
use nodal_morse::{Graph, SupportedMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sign changes of a real eigenvector, counted from nalgebra's real solver.
fn oracle_count(h: &SupportedMatrix, k: usize) -> Option<usize> {
    let n = h.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        m[(r, r)] = h.diag()[r];
    }
    for (&(r, s), z) in h.graph().edges().iter().zip(h.offdiag()) {
        m[(r, s)] = z.re;
        m[(s, r)] = z.re;
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let j = order[k - 1];
    let lam = eig.eigenvalues[j];
    let gap =
        order.iter().filter(|&&i| i != j).map(|&i| (eig.eigenvalues[i] - lam).abs()).fold(f64::INFINITY, f64::min);
    let v = eig.eigenvectors.column(j);
    if gap < 1e-6 || v.iter().any(|x| x.abs() < 1e-6) {
        return None;
    }
    Some(h.graph().edges().iter().zip(h.offdiag()).filter(|(&(r, s), z)| z.re * v[r] * v[s] > 0.0).count())
}

#[test]
fn tree_counts_equal_k_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.gen_range(2..=9);
        let g = random_connected_graph(&mut rng, n, 0);
        let h = random_real_operator(&mut rng, g);
        for k in 1..=n {
            if let Some(c) = oracle_count(&h, k) {
                assert_eq!(c, k - 1);
                assert_eq!(nodal_count(&h, k).unwrap(), k - 1);
            }
        }
    }
}

#[test]
fn counting_identities_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..15 {
        let n = rng.gen_range(3..=7);
        let g = random_connected_graph(&mut rng, n, 4);
        let h = random_real_operator(&mut rng, g);
        let m = h.graph().edge_count();
        assert_eq!(enumerate_signings(&h, 24).unwrap().len(), 1u64 << m);
        let classes = gauge_classes_of_signings(&h, 24).unwrap();
        assert_eq!(classes.len(), 1usize << h.graph().betti_number());
        assert!(classes.iter().all(|c| c.size == 1u64 << (n - 1)));
    }
}

#[test]
fn class_average_matches_full_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_connected_graph(&mut rng, 6, 5);
    let n = g.n();
    let m = g.edge_count();
    let h = SupportedMatrix::real(Arc::new(g), (0..n).map(|r| 10.0 * r as f64).collect(), vec![-1.0; m]).unwrap();
    let opts = AverageOptions { cross_check_classes: true, ..AverageOptions::default() };
    let res = average_surplus_distribution(&h, &opts).unwrap();
    assert!(res.classes_checked);
    assert_eq!(res.distribution.n_samples, (1u64 << m) * n as u64);
}

#[test]
fn equal_diagonal_distribution_is_symmetric() {
    let g = Graph::complete(4);
    let h = SupportedMatrix::real(Arc::new(g), vec![0.0; 4], vec![-1.0; 6]).unwrap();
    let opts = AverageOptions { skip_inadmissible: true, cross_check_classes: false, ..AverageOptions::default() };
    let res = average_surplus_distribution(&h, &opts).unwrap();
    let c = &res.distribution.counts;
    assert!((0..c.len()).all(|s| c[s] == c[c.len() - 1 - s]), "{c:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nodal_bounds_hold(n in 3usize..=9, extra in 0usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected_graph(&mut rng, n, extra);
        let h = random_real_operator(&mut rng, g);
        let beta = h.graph().betti_number();
        for k in 1..=n {
            if let Some(c) = oracle_count(&h, k) {
                prop_assert!(c + 1 >= k && c <= k - 1 + beta);
                prop_assert_eq!(nodal_count(&h, k).unwrap(), c);
            }
        }
    }
}
