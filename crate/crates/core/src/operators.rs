//! Hermitian matrices supported on a graph, the magnetic `*`-action, gauge
//! transformations, signings and their gauge classes.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{Graph, GraphError, OneForm};

/// Default bound on `|E|` for full signing enumeration.
pub const DEFAULT_SIGNING_CAP: usize = 24;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("operands live on different graphs")]
    GraphMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("operator is not properly supported: edge {0:?} has a zero entry")]
    NotProperlySupported((usize, usize)),
    #[error("operator has non-real off-diagonal entries")]
    NotReal,
    #[error("non-finite entry in operator")]
    NonFinite,
    #[error("signing enumeration over {edges} edges exceeds the cap of {cap}")]
    CapExceeded { edges: usize, cap: usize },
}

/// Hermitian matrix supported on a graph: real diagonal plus one complex
/// entry `h_rs` per edge `r < s` (`h_sr = conj(h_rs)` is implied).
#[derive(Debug, Clone, PartialEq)]
pub struct SupportedMatrix {
    graph: Arc<Graph>,
    diag: Vec<f64>,
    offdiag: Vec<Complex64>,
}

impl SupportedMatrix {
    pub fn new(graph: Arc<Graph>, diag: Vec<f64>, offdiag: Vec<Complex64>) -> Result<Self, OperatorError> {
        if diag.len() != graph.n() {
            return Err(GraphError::DimensionMismatch { expected: graph.n(), got: diag.len() }.into());
        }
        graph.check_edge_len(offdiag.len())?;
        if diag.iter().any(|d| !d.is_finite()) || offdiag.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OperatorError::NonFinite);
        }
        Ok(Self { graph, diag, offdiag })
    }

    pub fn real(graph: Arc<Graph>, diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self, OperatorError> {
        Self::new(graph, diag, offdiag.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    /// Discrete Schrödinger operator: potential on the diagonal, `-weight` on every edge.
    pub fn schrodinger(graph: Arc<Graph>, potential: Vec<f64>, weight: f64) -> Result<Self, OperatorError> {
        let m = graph.edge_count();
        Self::real(graph, potential, vec![-weight; m])
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[Complex64] {
        &self.offdiag
    }

    pub fn same_graph(&self, other: &SupportedMatrix) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph
    }

    /// Entry `h_rs` for any pair (zero off the support).
    pub fn entry(&self, r: usize, s: usize) -> Complex64 {
        if r == s {
            return Complex64::new(self.diag[r], 0.0);
        }
        match self.graph.edge_index(r, s) {
            Some(e) if r < s => self.offdiag[e],
            Some(e) => self.offdiag[e].conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// True iff every off-diagonal entry has exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.offdiag.iter().all(|z| z.im == 0.0)
    }

    /// True iff `h_rs != 0` on every edge.
    pub fn is_properly_supported(&self) -> bool {
        self.first_zero_edge().is_none()
    }

    fn first_zero_edge(&self) -> Option<(usize, usize)> {
        self.offdiag.iter().position(|z| z.norm() == 0.0).map(|e| self.graph.edges()[e])
    }

    pub fn require_proper_support(&self) -> Result<(), OperatorError> {
        match self.first_zero_edge() {
            Some(edge) => Err(OperatorError::NotProperlySupported(edge)),
            None => Ok(()),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (r, &d) in self.diag.iter().enumerate() {
            m[(r, r)] = Complex64::new(d, 0.0);
        }
        for (&(r, s), &z) in self.graph.edges().iter().zip(&self.offdiag) {
            m[(r, s)] = z;
            m[(s, r)] = z.conj();
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let o: f64 = self.offdiag.iter().map(|z| z.norm_sqr()).sum();
        (d + 2.0 * o).sqrt()
    }

    /// `|h|`: moduli off the diagonal, diagonal unchanged.
    pub fn abs_part(&self) -> SupportedMatrix {
        let offdiag = self.offdiag.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
        Self { graph: self.graph.clone(), diag: self.diag.clone(), offdiag }
    }

    /// Principal arguments in `(-π, π]` of the off-diagonal entries, so that
    /// `h = phases * |h|`.
    pub fn phases(&self) -> OneForm {
        OneForm::new(
            self.offdiag
                .iter()
                .map(|z| {
                    let a = z.im.atan2(z.re);
                    if a <= -PI {
                        PI
                    } else {
                        a
                    }
                })
                .collect(),
        )
    }

    pub fn conjugate(&self) -> SupportedMatrix {
        let offdiag = self.offdiag.iter().map(|z| z.conj()).collect();
        Self { graph: self.graph.clone(), diag: self.diag.clone(), offdiag }
    }

    pub fn with_diag(&self, diag: Vec<f64>) -> Result<SupportedMatrix, OperatorError> {
        Self::new(self.graph.clone(), diag, self.offdiag.clone())
    }

    /// Signing: flip the sign of every edge entry whose bit is set in `mask`.
    pub fn signing(&self, mask: u64) -> SupportedMatrix {
        let offdiag = self.offdiag.iter().enumerate().map(|(e, &z)| if mask >> e & 1 == 1 { -z } else { z }).collect();
        Self { graph: self.graph.clone(), diag: self.diag.clone(), offdiag }
    }
}

/// Gauge phase `θ ∈ T^n`, stored reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhase {
    theta: Vec<f64>,
}

impl GaugePhase {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta: theta.into_iter().map(|t| t.rem_euclid(TWO_PI) % TWO_PI).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }
}

/// `(α * h)_rs = e^{iα_rs} h_rs`; the diagonal is unchanged.
pub fn magnetic_action(alpha: &OneForm, h: &SupportedMatrix) -> Result<SupportedMatrix, OperatorError> {
    h.graph.check_edge_len(alpha.len())?;
    let offdiag = h.offdiag.iter().zip(&alpha.values).map(|(&z, &a)| Complex64::from_polar(1.0, a) * z).collect();
    Ok(SupportedMatrix { graph: h.graph.clone(), diag: h.diag.clone(), offdiag })
}

/// `dθ * h`, which equals the conjugation `e^{-iθ} h e^{iθ}` by a diagonal unitary.
pub fn gauge_transform(theta: &GaugePhase, h: &SupportedMatrix) -> Result<SupportedMatrix, OperatorError> {
    let d_theta = h.graph.coboundary(&theta.theta)?;
    magnetic_action(&d_theta, h)
}

/// Streaming iterator over signings `(mask, h')` in binary-counter order.
#[derive(Debug, Clone)]
pub struct Signings {
    base: SupportedMatrix,
    range: Range<u64>,
}

impl Signings {
    pub fn len(&self) -> u64 {
        self.range.end - self.range.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<u64> {
        self.range.clone()
    }

    /// Splits the remaining masks into at most `parts` contiguous chunks.
    pub fn split(&self, parts: usize) -> Vec<Signings> {
        let parts = parts.max(1) as u64;
        let total = self.len();
        let chunk = total.div_ceil(parts).max(1);
        let mut out = Vec::new();
        let mut start = self.range.start;
        while start < self.range.end {
            let end = (start + chunk).min(self.range.end);
            out.push(Signings { base: self.base.clone(), range: start..end });
            start = end;
        }
        out
    }
}

impl Iterator for Signings {
    type Item = (u64, SupportedMatrix);

    fn next(&mut self) -> Option<Self::Item> {
        let mask = self.range.next()?;
        Some((mask, self.base.signing(mask)))
    }
}

/// All `2^|E|` signings of a real operator.
pub fn enumerate_signings(h: &SupportedMatrix, cap: usize) -> Result<Signings, OperatorError> {
    if !h.is_real() {
        return Err(OperatorError::NotReal);
    }
    let edges = h.graph.edge_count();
    check_cap(edges, cap)?;
    Ok(Signings { base: h.clone(), range: 0..1u64 << edges })
}

pub(crate) fn check_cap(edges: usize, cap: usize) -> Result<(), OperatorError> {
    if edges > cap.min(62) {
        Err(OperatorError::CapExceeded { edges, cap })
    } else {
        Ok(())
    }
}

/// Key for lexicographic comparison of flip patterns, edge 0 most significant.
pub fn lex_key(mask: u64, edges: usize) -> u64 {
    if edges == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - edges)
    }
}

/// One gauge class of signings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeClass {
    /// Lexicographically least flip pattern in the class (bit `e` = edge `e` flipped).
    pub representative: u64,
    pub size: u64,
    /// Flip parity along each fundamental cycle; bit `j` for cycle `j`.
    pub cycle_parity: u64,
}

impl GaugeClass {
    /// All flip patterns in the class: the orbit under vertex sign flips.
    pub fn members(&self, graph: &Graph) -> Vec<u64> {
        let orbit = VertexFlipOrbit::new(graph);
        let mut out = Vec::with_capacity(self.size as usize);
        orbit.for_each(self.representative, |m| out.push(m));
        out.sort_unstable();
        out
    }
}

/// Enumerates `mask ^ (edges cut by a vertex flip set)` over all flip sets that
/// fix the root of every component, via a Gray code.
struct VertexFlipOrbit {
    stars: Vec<u64>,
}

impl VertexFlipOrbit {
    fn new(graph: &Graph) -> Self {
        let mut roots = vec![false; graph.n()];
        for comp in graph.connected_components() {
            roots[comp[0]] = true;
        }
        let stars = (0..graph.n())
            .filter(|&r| !roots[r])
            .map(|r| {
                graph.neighbors(r).iter().fold(0u64, |m, &s| m | 1u64 << graph.edge_index(r, s).expect("adjacent"))
            })
            .collect();
        Self { stars }
    }

    fn for_each(&self, start: u64, mut f: impl FnMut(u64)) {
        let mut mask = start;
        f(mask);
        let count = 1u64 << self.stars.len();
        for i in 1..count {
            mask ^= self.stars[i.trailing_zeros() as usize];
            f(mask);
        }
    }
}

fn cycle_masks(graph: &Graph) -> Vec<u64> {
    graph.cycle_basis().cycles.iter().map(|xi| xi.support().fold(0u64, |m, e| m | 1u64 << e)).collect()
}

/// Flip parity of `mask` along each fundamental cycle.
pub fn cycle_parity(cycle_masks: &[u64], mask: u64) -> u64 {
    cycle_masks.iter().enumerate().fold(0u64, |p, (j, &c)| p | ((((mask & c).count_ones() & 1) as u64) << j))
}

/// Partition of the signings of `h` into the `2^β` gauge classes, each of
/// size `2^{n-c}`, ordered by representative.
pub fn gauge_classes_of_signings(h: &SupportedMatrix, cap: usize) -> Result<Vec<GaugeClass>, OperatorError> {
    if !h.is_real() {
        return Err(OperatorError::NotReal);
    }
    h.require_proper_support()?;
    let graph = h.graph();
    let edges = graph.edge_count();
    check_cap(edges, cap)?;
    let basis = graph.cycle_basis();
    let masks = cycle_masks(graph);
    let orbit = VertexFlipOrbit::new(graph);
    let size = 1u64 << orbit.stars.len();

    let mut classes: Vec<GaugeClass> = (0..1u64 << basis.len())
        .map(|parity| {
            let start = basis
                .free_edges
                .iter()
                .enumerate()
                .filter(|(j, _)| parity >> j & 1 == 1)
                .fold(0u64, |m, (_, &e)| m | 1u64 << e);
            let mut best = start;
            orbit.for_each(start, |m| {
                if lex_key(m, edges) < lex_key(best, edges) {
                    best = m;
                }
            });
            debug_assert_eq!(cycle_parity(&masks, best), parity);
            GaugeClass { representative: best, size, cycle_parity: parity }
        })
        .collect();
    classes.sort_by_key(|c| lex_key(c.representative, edges));
    Ok(classes)
}

/// Outcome of the flux test for gauge equivalence to a symmetry point.
#[derive(Debug, Clone)]
pub struct SymmetryCheck {
    pub is_symmetry: bool,
    /// Flux `∫_ξ α` through each fundamental cycle.
    pub fluxes: Vec<f64>,
    /// Distance of each flux to `πZ`.
    pub flux_defects: Vec<f64>,
    /// `θ` with `dθ * h` real, when one exists.
    pub witness: Option<GaugePhase>,
}

/// Tests whether `h` is gauge equivalent to a real matrix: every
/// fundamental-cycle flux of its phase form must lie in `πZ`.
pub fn is_gauge_equiv_to_symmetry(h: &SupportedMatrix, flux_tol: f64) -> Result<SymmetryCheck, OperatorError> {
    h.require_proper_support()?;
    let graph = h.graph();
    let alpha = h.phases();
    let basis = graph.cycle_basis();
    let fluxes: Vec<f64> = basis.cycles.iter().map(|xi| alpha.integrate(xi)).collect::<Result<_, _>>()?;
    let flux_defects: Vec<f64> = fluxes
        .iter()
        .map(|f| {
            let r = f.rem_euclid(PI);
            r.min(PI - r)
        })
        .collect();
    let is_symmetry = flux_defects.iter().all(|&d| d <= flux_tol);
    let witness = is_symmetry.then(|| tree_gauge(graph, &alpha));
    Ok(SymmetryCheck { is_symmetry, fluxes, flux_defects, witness })
}

/// `θ` with `α + dθ = 0` on a BFS spanning forest.
fn tree_gauge(graph: &Graph, alpha: &OneForm) -> GaugePhase {
    let n = graph.n();
    let mut theta = vec![0.0; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            for &c in graph.neighbors(p) {
                if seen[c] {
                    continue;
                }
                seen[c] = true;
                let a = alpha.values[graph.edge_index(p, c).expect("adjacent")];
                // α_rs + θ_s - θ_r = 0 on the canonical orientation r < s
                theta[c] = if p < c { theta[p] - a } else { theta[p] + a };
                queue.push_back(c);
            }
        }
    }
    GaugePhase::new(theta)
}
