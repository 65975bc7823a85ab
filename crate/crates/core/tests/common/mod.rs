#![allow(dead_code)]

use std::sync::Arc;

use nodal_morse::{Graph, SupportedMatrix};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Connected graph: a random tree plus `extra` random additional edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i], order[j]));
    }
    for _ in 0..extra {
        let r = rng.gen_range(0..n);
        let s = rng.gen_range(0..n);
        if r != s {
            edges.push((r, s));
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Real operator with distinct diagonal and off-diagonal magnitudes in [0.5, 1.5].
pub fn random_real_operator<R: Rng>(rng: &mut R, g: Graph) -> SupportedMatrix {
    let n = g.n();
    let m = g.edge_count();
    let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let off: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    SupportedMatrix::real(Arc::new(g), diag, off).unwrap()
}

pub fn random_angles<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
}

/// Dense `e^{iα_rs} h_rs` built entry by entry, independent of the library's action.
pub fn dense_magnetic(h: &SupportedMatrix, alpha: &[f64]) -> nalgebra::DMatrix<Complex64> {
    let n = h.n();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for r in 0..n {
        m[(r, r)] = Complex64::new(h.diag()[r], 0.0);
    }
    for (e, &(r, s)) in h.graph().edges().iter().enumerate() {
        let z = Complex64::from_polar(1.0, alpha[e]) * h.offdiag()[e];
        m[(r, s)] = z;
        m[(s, r)] = z.conj();
    }
    m
}

/// Sorted eigenvalues via nalgebra's Hermitian eigensolver, as an oracle.
pub fn oracle_eigenvalues(m: &nalgebra::DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
