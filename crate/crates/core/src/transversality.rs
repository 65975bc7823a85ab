//! Transversality of `H(G)` to the multiplicity strata `S_m(k)`.
//!
//! Two equivalent tests are provided. The direct one looks for a nonzero
//! Hermitian `X`, zero on the diagonal and on every edge, with
//! `(h − λ)X = 0`. The restriction test asks whether the compressions
//! `U* ξ U` of a basis `ξ` of `H(G)` span all `m × m` Hermitian matrices.
//! The graph-theoretic conditions (surjective projection onto an edge,
//! splitting, edge-separated eigenvectors) are sufficient conditions on one
//! side or the other.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::operators::{OperatorError, SupportedMatrix};
use crate::spectral::{eigh, SpectralError};
use crate::tolerance::{scale, Tolerances};

/// Row-norm threshold for membership in the support of an eigenspace.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Relative singular-value threshold for the rank and kernel tests.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransversalityError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("eigenvalue {k} belongs to the cluster starting at {start}; stratum membership is ambiguous")]
    AmbiguousStratum { k: usize, start: usize },
    #[error("eigenspace has empty support")]
    EmptySupport,
    #[error("criterion needs multiplicity 2, got {0}")]
    MultiplicityNotTwo(usize),
    #[error("vectors are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("edge ({0}, {1}) is not in the graph")]
    NotAnEdge(usize, usize),
    #[error("no degenerate point reached after {0} iterations (gap {1:e})")]
    NotLanded(usize, f64),
}

/// Codimension of `S_m(k)` in the Hermitian matrices.
pub fn codim_stratum(m: usize) -> usize {
    assert!(m >= 1, "multiplicity must be positive");
    m * m - 1
}

/// Codimension of `S_m(k, λ)`, where the eigenvalue is also fixed.
pub fn codim_stratum_fixed(m: usize) -> usize {
    assert!(m >= 1, "multiplicity must be positive");
    m * m
}

/// Orthonormal basis of an eigenspace, stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenspaceBasis {
    pub lambda: f64,
    pub vectors: DMatrix<Complex64>,
}

impl EigenspaceBasis {
    /// The eigenspace of `λ_k(h)`; `k` must be the first index of its cluster.
    pub fn of(h: &SupportedMatrix, k: usize, tol: &Tolerances) -> Result<Self, TransversalityError> {
        let es = eigh(h)?;
        let (m, start) = es.multiplicity(k, tol.degeneracy)?;
        if start != k {
            return Err(TransversalityError::AmbiguousStratum { k, start });
        }
        let lambda = (k..k + m).map(|j| es.value(j)).sum::<f64>() / m as f64;
        let vectors = es.vectors.columns(k - 1, m).into_owned();
        Ok(Self { lambda, vectors })
    }

    pub fn from_vectors(lambda: f64, vectors: DMatrix<Complex64>) -> Result<Self, TransversalityError> {
        let gram = vectors.adjoint() * &vectors;
        let defect = (gram - DMatrix::identity(vectors.ncols(), vectors.ncols())).norm();
        if defect > 1e-9 {
            return Err(TransversalityError::NotOrthonormal(defect));
        }
        Ok(Self { lambda, vectors })
    }

    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn residual(&self, h: &SupportedMatrix) -> f64 {
        let hd = h.to_dense();
        self.vectors.column_iter().map(|u| (&hd * u - u * Complex64::new(self.lambda, 0.0)).norm()).fold(0.0, f64::max)
    }

    fn row_norm(&self, r: usize) -> f64 {
        self.vectors.row(r).norm()
    }
}

/// Vertices where the projection of `e_r` onto the eigenspace exceeds `tol`.
pub fn support_of_eigenspace(v: &EigenspaceBasis, tol: f64) -> Vec<usize> {
    (0..v.n()).filter(|&r| v.row_norm(r) > tol).collect()
}

/// Whether the subgraph induced on the support is disconnected.
pub fn splits_graph(g: &Graph, v: &EigenspaceBasis) -> Result<bool, TransversalityError> {
    let support = support_of_eigenspace(v, SUPPORT_TOL);
    if support.is_empty() {
        return Err(TransversalityError::EmptySupport);
    }
    Ok(!g.induced_subgraph(&support)?.graph.is_connected())
}

/// Whether `u ↦ (u_r, u_s)` maps the (two-dimensional) eigenspace onto `C²`.
pub fn projects_surjectively(
    g: &Graph,
    v: &EigenspaceBasis,
    edge: (usize, usize),
) -> Result<bool, TransversalityError> {
    if v.multiplicity() != 2 {
        return Err(TransversalityError::MultiplicityNotTwo(v.multiplicity()));
    }
    let (r, s) = edge;
    if !g.has_edge(r, s) {
        return Err(TransversalityError::NotAnEdge(r, s));
    }
    let block = DMatrix::from_fn(2, 2, |i, j| v.vectors[(if i == 0 { r } else { s }, j)]);
    let sv = block.singular_values();
    Ok(sv.min() > RANK_TOL)
}

/// First edge (in edge order) onto which the eigenspace projects surjectively.
pub fn surjective_edge(g: &Graph, v: &EigenspaceBasis) -> Result<Option<(usize, usize)>, TransversalityError> {
    for &e in g.edges() {
        if projects_surjectively(g, v, e)? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

pub type VectorPair = (DVector<Complex64>, DVector<Complex64>);

/// Two eigenvectors whose supports lie in different components of the
/// induced subgraph on the support, searched component by component.
pub fn find_edge_separated_pair(g: &Graph, v: &EigenspaceBasis) -> Result<Option<VectorPair>, TransversalityError> {
    let support = support_of_eigenspace(v, SUPPORT_TOL);
    if support.is_empty() {
        return Ok(None);
    }
    let sub = g.induced_subgraph(&support)?;
    let mut found = Vec::new();
    for comp in sub.graph.connected_components() {
        let inside: Vec<usize> = comp.iter().map(|&i| sub.to_old[i]).collect();
        if let Some(u) = vector_supported_in(v, &inside) {
            found.push(u);
            if found.len() == 2 {
                let b = found.pop().expect("two vectors");
                let a = found.pop().expect("two vectors");
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// A unit vector of the eigenspace vanishing off `inside`, if one exists.
fn vector_supported_in(v: &EigenspaceBasis, inside: &[usize]) -> Option<DVector<Complex64>> {
    let m = v.multiplicity();
    let outside: Vec<usize> = (0..v.n()).filter(|r| !inside.contains(r)).collect();
    let coeffs = if outside.is_empty() {
        DVector::from_fn(m, |i, _| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    } else {
        let rows = DMatrix::from_fn(outside.len(), m, |i, j| v.vectors[(outside[i], j)]);
        // nullspace from the right singular vectors of the constraint rows
        let padded = if rows.nrows() < m { rows.clone().resize_vertically(m, Complex64::new(0.0, 0.0)) } else { rows };
        let svd = padded.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (j, smin) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        if *smin > RANK_TOL {
            return None;
        }
        vt.row(j).adjoint()
    };
    let u = &v.vectors * coeffs;
    let norm = u.norm();
    (norm > RANK_TOL).then(|| u / Complex64::new(norm, 0.0))
}

/// A nonzero `X ∈ H(Ḡ)` with `(h − λ)X ≈ 0`, given by its non-edge entries.
#[derive(Debug, Clone, Serialize)]
pub struct KernelWitness {
    pub entries: Vec<((usize, usize), Complex64)>,
    /// `‖(h − λ)X‖ / (‖h‖ ‖X‖)`.
    pub relative_residual: f64,
}

impl KernelWitness {
    pub fn to_dense(&self, n: usize) -> DMatrix<Complex64> {
        let mut x = DMatrix::zeros(n, n);
        for &((r, s), z) in &self.entries {
            x[(r, s)] = z;
            x[(s, r)] = z.conj();
        }
        x
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectTest {
    pub transverse: bool,
    pub kernel_dimension: usize,
    pub sigma_min: f64,
    pub threshold: f64,
    pub witness: Option<KernelWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictionTest {
    pub transverse: bool,
    pub rank: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingVerdict {
    /// Multiplicity one: always transverse.
    Simple,
    /// Multiplicity two with a surjective edge or a non-splitting eigenspace.
    Transverse,
    /// An edge-separated pair of eigenvectors exists.
    NotTransverse,
    /// Neither sufficient condition applies; the direct test decides.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityVerdict {
    pub k: usize,
    pub lambda: f64,
    pub multiplicity: usize,
    pub codimension: usize,
    pub support: Vec<usize>,
    pub splits: bool,
    pub surjective_edge: Option<(usize, usize)>,
    pub edge_separated_pair: bool,
    pub splitting: SplittingVerdict,
    pub direct: DirectTest,
    pub restriction: RestrictionTest,
    pub eigen_residual: f64,
}

impl TransversalityVerdict {
    pub fn transverse(&self) -> bool {
        self.direct.transverse
    }

    pub fn criteria_agree(&self) -> bool {
        self.direct.transverse == self.restriction.transverse
    }

    /// The graph-theoretic verdict never contradicts the direct test.
    pub fn splitting_sound(&self) -> bool {
        match self.splitting {
            SplittingVerdict::Simple | SplittingVerdict::Transverse => self.direct.transverse,
            SplittingVerdict::NotTransverse => !self.direct.transverse,
            SplittingVerdict::Inconclusive => true,
        }
    }
}

/// The direct kernel test on `H(Ḡ)`.
pub fn direct_test(h: &SupportedMatrix, v: &EigenspaceBasis) -> DirectTest {
    let n = h.n();
    let graph = h.graph();
    let non_edges = graph.non_edges();
    let hs = scale(h.frobenius_norm());
    let threshold = RANK_TOL * hs;
    if non_edges.is_empty() {
        return DirectTest {
            transverse: true,
            kernel_dimension: 0,
            sigma_min: f64::INFINITY,
            threshold,
            witness: None,
        };
    }
    let shifted = h.to_dense() - DMatrix::identity(n, n) * Complex64::new(v.lambda, 0.0);
    let cols = 2 * non_edges.len();
    let mut map = DMatrix::<f64>::zeros(2 * n * n, cols);
    for (j, &(r, s)) in non_edges.iter().enumerate() {
        for (part, z) in [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))] {
            // X = z E_rs + conj(z) E_sr, so (h − λ)X has columns s and r
            let col = 2 * j + part;
            for i in 0..n {
                let a = shifted[(i, r)] * z;
                let b = shifted[(i, s)] * z.conj();
                let ia = i * n + s;
                let ib = i * n + r;
                map[(2 * ia, col)] += a.re;
                map[(2 * ia + 1, col)] += a.im;
                map[(2 * ib, col)] += b.re;
                map[(2 * ib + 1, col)] += b.im;
            }
        }
    }
    let svd = map.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let kernel_dimension = svd.singular_values.iter().filter(|&&x| x <= threshold).count();
    let (jmin, &sigma_min) =
        svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let transverse = sigma_min > threshold;
    let witness = (!transverse).then(|| {
        let x = vt.row(jmin);
        let entries: Vec<((usize, usize), Complex64)> =
            non_edges.iter().enumerate().map(|(j, &e)| (e, Complex64::new(x[2 * j], x[2 * j + 1]))).collect();
        let w = KernelWitness { entries, relative_residual: 0.0 };
        let xd = w.to_dense(n);
        let rel = (&shifted * &xd).norm() / (hs * xd.norm());
        KernelWitness { relative_residual: rel, ..w }
    });
    DirectTest { transverse, kernel_dimension, sigma_min, threshold, witness }
}

/// Whether the compressions of a basis of `H(G)` span the `m²`-dimensional
/// real space of Hermitian forms on the eigenspace.
pub fn restriction_test(g: &Graph, v: &EigenspaceBasis) -> RestrictionTest {
    let m = v.multiplicity();
    let u = &v.vectors;
    let target = m * m;
    let coords = |c: &DMatrix<Complex64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(target);
        for i in 0..m {
            out.push(c[(i, i)].re);
            for j in i + 1..m {
                out.push(c[(i, j)].re);
                out.push(c[(i, j)].im);
            }
        }
        out
    };
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for r in 0..g.n() {
        // compression of E_rr is the outer product of row r
        let row = u.row(r);
        columns.push(coords(&(row.adjoint() * row)));
    }
    for &(r, s) in g.edges() {
        let ur = u.row(r);
        let us = u.row(s);
        let a = ur.adjoint() * us;
        columns.push(coords(&(&a + a.adjoint())));
        let b = a * Complex64::new(0.0, 1.0);
        columns.push(coords(&(&b + b.adjoint())));
    }
    let mat = DMatrix::from_fn(target, columns.len(), |i, j| columns[j][i]);
    let sv = mat.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&x| x > RANK_TOL * smax.max(f64::MIN_POSITIVE)).count();
    RestrictionTest { transverse: rank == target, rank, target }
}

/// Both tests and the graph-theoretic conditions at `λ_k(h)`.
pub fn is_transverse_at(
    h: &SupportedMatrix,
    k: usize,
    tol: &Tolerances,
) -> Result<TransversalityVerdict, TransversalityError> {
    let v = EigenspaceBasis::of(h, k, tol)?;
    verdict_for(h, k, &v)
}

pub fn verdict_for(
    h: &SupportedMatrix,
    k: usize,
    v: &EigenspaceBasis,
) -> Result<TransversalityVerdict, TransversalityError> {
    let g = h.graph();
    let m = v.multiplicity();
    let support = support_of_eigenspace(v, SUPPORT_TOL);
    let splits = splits_graph(g, v)?;
    let surjective_edge = if m == 2 { surjective_edge(g, v)? } else { None };
    let edge_separated_pair = find_edge_separated_pair(g, v)?.is_some();
    let splitting = if m == 1 {
        SplittingVerdict::Simple
    } else if edge_separated_pair {
        SplittingVerdict::NotTransverse
    } else if m == 2 && (surjective_edge.is_some() || !splits) {
        SplittingVerdict::Transverse
    } else {
        SplittingVerdict::Inconclusive
    };
    Ok(TransversalityVerdict {
        k,
        lambda: v.lambda,
        multiplicity: m,
        codimension: codim_stratum(m),
        support,
        splits,
        surjective_edge,
        edge_separated_pair,
        splitting,
        direct: direct_test(h, v),
        restriction: restriction_test(g, v),
        eigen_residual: v.residual(h),
    })
}

/// `X = u v* + v u*` for an edge-separated pair, with its residual.
pub fn separated_pair_witness(
    h: &SupportedMatrix,
    lambda: f64,
    u: &DVector<Complex64>,
    w: &DVector<Complex64>,
) -> (DMatrix<Complex64>, f64) {
    let x = u * w.adjoint() + w * u.adjoint();
    let n = h.n();
    let shifted = h.to_dense() - DMatrix::identity(n, n) * Complex64::new(lambda, 0.0);
    let rel = (shifted * &x).norm() / (scale(h.frobenius_norm()) * x.norm());
    (x, rel)
}

/// Moves `h` within `H(G)` until `λ_k = λ_{k+1}`, by Newton steps on the
/// three real conditions that make the `2 × 2` compression scalar.
pub fn land_on_stratum(h: &SupportedMatrix, k: usize) -> Result<SupportedMatrix, TransversalityError> {
    const MAX_ITER: usize = 60;
    let graph = h.graph_arc().clone();
    let mut cur = h.clone();
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let es = eigh(&cur)?;
        es.check_index(k + 1)?;
        gap = es.value(k + 1) - es.value(k);
        let hs = scale(cur.frobenius_norm());
        if gap.abs() <= 1e-14 * hs {
            return Ok(cur);
        }
        let u1 = es.vector(k);
        let u2 = es.vector(k + 1);
        // rows: d(λ_1 − λ_2), Re d a_12, Im d a_12 for each basis direction
        let dirs = direction_count(&graph);
        let mut jac = DMatrix::<f64>::zeros(3, dirs);
        for (j, xi) in directions(&graph).enumerate() {
            let d11 = apply_form(&graph, xi, &u1, &u1).re;
            let d22 = apply_form(&graph, xi, &u2, &u2).re;
            let d12 = apply_form(&graph, xi, &u1, &u2);
            jac[(0, j)] = d11 - d22;
            jac[(1, j)] = d12.re;
            jac[(2, j)] = d12.im;
        }
        let rhs = DVector::from_vec(vec![gap, 0.0, 0.0]);
        let step =
            jac.clone().svd(true, true).solve(&rhs, 1e-12).map_err(|_| TransversalityError::NotLanded(0, gap))?;
        let mut diag = cur.diag().to_vec();
        let mut off = cur.offdiag().to_vec();
        for (j, xi) in directions(&graph).enumerate() {
            match xi {
                Direction::Diag(r) => diag[r] += step[j],
                Direction::Re(e) => off[e] += Complex64::new(step[j], 0.0),
                Direction::Im(e) => off[e] += Complex64::new(0.0, step[j]),
            }
        }
        cur = SupportedMatrix::new(graph.clone(), diag, off)?;
    }
    Err(TransversalityError::NotLanded(MAX_ITER, gap))
}

#[derive(Debug, Clone, Copy)]
enum Direction {
    Diag(usize),
    Re(usize),
    Im(usize),
}

fn direction_count(g: &Graph) -> usize {
    g.n() + 2 * g.edge_count()
}

fn directions(g: &Graph) -> impl Iterator<Item = Direction> + '_ {
    (0..g.n()).map(Direction::Diag).chain((0..g.edge_count()).flat_map(|e| [Direction::Re(e), Direction::Im(e)]))
}

/// `⟨a, ξ b⟩` for one basis direction `ξ` of `H(G)`.
fn apply_form(graph: &Graph, dir: Direction, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    match dir {
        Direction::Diag(r) => a[r].conj() * b[r],
        Direction::Re(e) => {
            let (r, s) = graph.edges()[e];
            a[r].conj() * b[s] + a[s].conj() * b[r]
        }
        Direction::Im(e) => {
            let (r, s) = graph.edges()[e];
            let i = Complex64::new(0.0, 1.0);
            a[r].conj() * i * b[s] - a[s].conj() * i * b[r]
        }
    }
}

/// Two graphs glued at one vertex, carrying operators with a common simple
/// eigenvalue whose eigenvectors vanish at the glued vertex.
pub fn join_fixture(seed: u64) -> SupportedMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.gen_range(3..=4);
    let n2 = rng.gen_range(3..=4);
    let (d1, o1, l1) = vanishing_block(&mut rng, n1);
    let (d2, o2, l2) = vanishing_block(&mut rng, n2);
    // vertex 0 of each block is the glued vertex; shift the second block
    // so both share the eigenvalue
    let shift = l1 - l2;
    let n = n1 + n2 - 1;
    let map2 = |r: usize| if r == 0 { 0 } else { n1 + r - 1 };
    let mut edges = Vec::new();
    let mut offdiag = Vec::new();
    for (&(r, s), &x) in Graph::complete(n1).edges().iter().zip(&o1) {
        edges.push((r, s));
        offdiag.push(x);
    }
    for (&(r, s), &x) in Graph::complete(n2).edges().iter().zip(&o2) {
        edges.push((map2(r), map2(s)));
        offdiag.push(x);
    }
    let mut diag = vec![0.0; n];
    diag[0] = d1[0] + d2[0] + shift;
    diag[1..n1].copy_from_slice(&d1[1..n1]);
    for r in 1..n2 {
        diag[map2(r)] = d2[r] + shift;
    }
    let graph = Graph::new(n, edges.clone()).expect("valid join");
    let mut off = vec![Complex64::new(0.0, 0.0); graph.edge_count()];
    for (&(r, s), &x) in edges.iter().zip(&offdiag) {
        let e = graph.edge_index(r, s).expect("edge");
        off[e] = if r < s { x } else { x.conj() };
    }
    SupportedMatrix::new(Arc::new(graph), diag, off).expect("valid fixture")
}

/// A random magnetic operator on `K_n` whose eigenvector for some simple
/// eigenvalue vanishes at vertex 0. Built by making the off-diagonal row of
/// vertex 0 orthogonal to that eigenvector of the block on `1..n`.
fn vanishing_block(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<Complex64>, f64) {
    use rand::Rng;
    loop {
        let block_graph = Arc::new(Graph::complete(n - 1));
        let bd: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bo: Vec<Complex64> = (0..block_graph.edge_count())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let Ok(block) = SupportedMatrix::new(block_graph.clone(), bd.clone(), bo.clone()) else { continue };
        let es = eigh(&block).expect("eigensolver");
        let j = rng.gen_range(1..=n - 1);
        if es.multiplicity(j, 1e-6).map(|(m, _)| m) != Ok(1) {
            continue;
        }
        let w = es.vector(j);
        let mut b = DVector::from_fn(n - 1, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let proj = w.dotc(&b);
        b -= &w * proj;
        if b.iter().any(|z| z.norm() < 0.05) || w.iter().any(|z| z.norm() < 0.05) {
            continue;
        }
        let full = Graph::complete(n);
        let mut off = Vec::with_capacity(full.edge_count());
        for &(r, s) in full.edges() {
            off.push(if r == 0 { b[s - 1].conj() } else { bo[block_graph.edge_index(r - 1, s - 1).expect("edge")] });
        }
        let mut diag = vec![rng.gen_range(-1.0..1.0)];
        diag.extend(bd);
        return (diag, off, es.value(j));
    }
}

/// A random operator on a disjoint union of two complete graphs with a
/// shared eigenvalue; the two eigenvectors are edge-separated.
pub fn disjoint_union_fixture(seed: u64) -> SupportedMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.gen_range(2..=4);
    let n2 = rng.gen_range(2..=4);
    let mut edges: Vec<(usize, usize)> = Graph::complete(n1).edges().to_vec();
    edges.extend(Graph::complete(n2).edges().iter().map(|&(r, s)| (r + n1, s + n1)));
    let graph = Arc::new(Graph::new(n1 + n2, edges).expect("valid union"));
    let mut diag: Vec<f64> = (0..n1 + n2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let off: Vec<Complex64> =
        (0..graph.edge_count()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let h = SupportedMatrix::new(graph.clone(), diag.clone(), off.clone()).expect("valid");
    let es = eigh(&h).expect("eigensolver");
    // pick one eigenvalue from each block and shift the second block
    let in_first = |v: &DVector<Complex64>| (0..n1).map(|r| v[r].norm_sqr()).sum::<f64>() > 0.5;
    let a = (1..=es.n()).find(|&j| in_first(&es.vector(j))).expect("first block");
    let b = (1..=es.n()).find(|&j| !in_first(&es.vector(j))).expect("second block");
    let shift = es.value(a) - es.value(b);
    for d in diag.iter_mut().skip(n1) {
        *d += shift;
    }
    SupportedMatrix::new(graph, diag, off).expect("valid")
}

/// `K_n` minus the matching `(0,1), (2,3), …` of the given size.
pub fn complete_minus_matching(n: usize, matching: usize) -> Graph {
    assert!(2 * matching <= n, "matching too large");
    let edges = Graph::complete(n)
        .edges()
        .iter()
        .copied()
        .filter(|&(r, s)| !(s == r + 1 && r % 2 == 0 && r / 2 < matching))
        .collect::<Vec<_>>();
    Graph::new(n, edges).expect("valid graph")
}
