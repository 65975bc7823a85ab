mod common;

use std::sync::Arc;

use common::*;
use nodal_morse::morse::{eigenvalue_gradient, hessian_lambda, morse_index, GaugeChart, TorusPoint};
use nodal_morse::{eigh, Graph, OneForm, SupportedMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(g: Graph, eta: f64) -> SupportedMatrix {
    let n = g.n();
    let m = g.edge_count();
    SupportedMatrix::real(Arc::new(g), (0..n).map(|r| eta * r as f64).collect(), vec![-1.0; m]).unwrap()
}

fn oracle_lambda(h: &SupportedMatrix, alpha: &[f64], k: usize) -> f64 {
    oracle_eigenvalues(&dense_magnetic(h, alpha))[k - 1]
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(3..=7);
        let g = random_connected_graph(&mut rng, n, 3);
        let h = random_real_operator(&mut rng, g);
        let alpha = random_angles(&mut rng, h.graph().edge_count());
        let p = TorusPoint::new(h.clone(), OneForm::new(alpha.clone())).unwrap();
        let k = rng.gen_range(1..=n);
        let es = eigh(&p.matrix()).unwrap();
        if es.multiplicity(k, 1e-4).unwrap().0 != 1 {
            continue;
        }
        let grad = eigenvalue_gradient(&p, k).unwrap();
        let step = 1e-5;
        let mut worst: f64 = 0.0;
        let mut gmax: f64 = 0.0;
        for e in 0..alpha.len() {
            let mut plus = alpha.clone();
            let mut minus = alpha.clone();
            plus[e] += step;
            minus[e] -= step;
            let fd = (oracle_lambda(&h, &plus, k) - oracle_lambda(&h, &minus, k)) / (2.0 * step);
            worst = worst.max((fd - grad.values[e]).abs());
            gmax = gmax.max(grad.values[e].abs());
        }
        assert!(worst <= 1e-6 * gmax.max(1.0), "error {worst} at gradient scale {gmax}");
        checked += 1;
    }
}

#[test]
fn gradient_is_divergence_free() {
    // gauge invariance: the gradient pairs to zero with every exact form
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let n = rng.gen_range(3..=7);
        let g = random_connected_graph(&mut rng, n, 4);
        let h = random_real_operator(&mut rng, g);
        let p = TorusPoint::new(h.clone(), OneForm::new(random_angles(&mut rng, h.graph().edge_count()))).unwrap();
        let grad = eigenvalue_gradient(&p, 1).unwrap();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let df = h.graph().coboundary(&f).unwrap();
        let pairing: f64 = grad.values.iter().zip(&df.values).map(|(a, b)| a * b).sum();
        assert!(pairing.abs() < 1e-10);
    }
}

#[test]
fn conjugation_negates_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_connected_graph(&mut rng, 6, 4);
    let h = random_real_operator(&mut rng, g);
    let p = TorusPoint::new(h.clone(), OneForm::new(random_angles(&mut rng, h.graph().edge_count()))).unwrap();
    for k in 1..=6 {
        let a = eigenvalue_gradient(&p, k).unwrap();
        let b = eigenvalue_gradient(&p.conjugate(), k).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x + y).abs() < 1e-10));
    }
}

#[test]
fn morse_index_independent_of_forest() {
    let h = fixture(Graph::complete(4), 100.0);
    let g = h.graph().clone();
    let bfs = GaugeChart::new(&g);
    // a star forest at vertex 3 instead of the BFS tree at vertex 0
    let star: Vec<usize> = (0..3).map(|r| g.edge_index(r, 3).unwrap()).collect();
    let other = GaugeChart::with_forest(&g, &star).unwrap();
    for mask in 0..1u64 << g.edge_count() {
        let p = TorusPoint::from_matrix(&h.signing(mask)).unwrap();
        for k in 1..=4 {
            let a = morse_index(&hessian_lambda(&p, k, &bfs).unwrap(), 1e-7).unwrap();
            let b = morse_index(&hessian_lambda(&p, k, &other).unwrap(), 1e-7).unwrap();
            assert_eq!((a.index, a.nullity), (b.index, b.nullity));
        }
    }
}
