//! Eigenvalues as functions on the torus of magnetic perturbations modulo
//! gauge: gradients, Hessians, Morse indices, classification of critical
//! points, a multi-start critical point search and the check that Morse
//! indices at symmetry points equal nodal surpluses.
//!
//! Global coordinates on the quotient come from a [`GaugeChart`]: pinning
//! the angles on a spanning forest to zero leaves one angle per fundamental
//! cycle, equal to the flux of the magnetic potential through that cycle.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{CycleBasis, Graph, GraphError, OneForm};
use crate::nodal::{nodal_count_with, NodalError};
use crate::operators::{
    gauge_classes_of_signings, gauge_transform, is_gauge_equiv_to_symmetry, magnetic_action, OperatorError,
    SupportedMatrix, DEFAULT_SIGNING_CAP,
};
use crate::spectral::{eigh, eigh_real, is_nowhere_vanishing, EigenSystem, SpectralError};
use crate::tolerance::{scale, Tolerances};

const TWO_PI: f64 = 2.0 * PI;
const NEWTON_STEP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Nodal(#[from] NodalError),
    #[error("torus base must be a real matrix")]
    NotReal,
    #[error("eigenvalue {k} is not simple (multiplicity {multiplicity}, gap {gap:e})")]
    NotSimple { k: usize, multiplicity: usize, gap: f64 },
    #[error("point is not critical for eigenvalue {k} (gradient norm {gradient_norm:e})")]
    NotCritical { k: usize, gradient_norm: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Hessian asymmetry {0:e} exceeds tolerance")]
    Asymmetric(f64),
    #[error(
        "Morse index {index} (nullity {nullity}) differs from nodal surplus {surplus} at signing {representative:#b}, k = {k}"
    )]
    IndexMismatch { representative: u64, k: usize, index: usize, nullity: usize, surplus: usize },
}

/// A point `α * base` of the torus over a real, properly supported base.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    base: SupportedMatrix,
    angles: OneForm,
}

impl TorusPoint {
    pub fn new(base: SupportedMatrix, angles: OneForm) -> Result<Self, MorseError> {
        if !base.is_real() {
            return Err(MorseError::NotReal);
        }
        base.require_proper_support()?;
        base.graph().check_edge_len(angles.len())?;
        let angles = OneForm::new(angles.values.iter().map(|a| a.rem_euclid(TWO_PI) % TWO_PI).collect());
        Ok(Self { base, angles })
    }

    /// Writes a properly supported `h` as `α * |h|`.
    pub fn from_matrix(h: &SupportedMatrix) -> Result<Self, MorseError> {
        h.require_proper_support()?;
        Self::new(h.abs_part(), h.phases())
    }

    pub fn base(&self) -> &SupportedMatrix {
        &self.base
    }

    pub fn angles(&self) -> &OneForm {
        &self.angles
    }

    pub fn graph(&self) -> &Graph {
        self.base.graph()
    }

    pub fn matrix(&self) -> SupportedMatrix {
        magnetic_action(&self.angles, &self.base).expect("angles match the base graph")
    }

    /// The complex conjugate point `(−α) * base`.
    pub fn conjugate(&self) -> TorusPoint {
        Self::new(self.base.clone(), self.angles.scale(-1.0)).expect("same base")
    }
}

/// Gauge-fixed coordinates on the quotient torus: forest angles pinned to
/// zero, one coordinate per fundamental cycle.
#[derive(Debug, Clone)]
pub struct GaugeChart {
    basis: CycleBasis,
    edge_count: usize,
}

impl GaugeChart {
    /// Chart from the BFS spanning forest.
    pub fn new(graph: &Graph) -> Self {
        Self { basis: graph.cycle_basis(), edge_count: graph.edge_count() }
    }

    /// Chart from an arbitrary spanning forest given by edge indices.
    pub fn with_forest(graph: &Graph, forest: &[usize]) -> Result<Self, MorseError> {
        Ok(Self { basis: graph.cycle_basis_for_forest(forest)?, edge_count: graph.edge_count() })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn free_edges(&self) -> &[usize] {
        &self.basis.free_edges
    }

    pub fn basis(&self) -> &CycleBasis {
        &self.basis
    }

    /// Fluxes of `α` through the fundamental cycles, reduced to `[0, 2π)`.
    pub fn coordinates(&self, alpha: &OneForm) -> Vec<f64> {
        self.basis
            .cycles
            .iter()
            .map(|xi| alpha.integrate(xi).expect("chart built on this graph").rem_euclid(TWO_PI) % TWO_PI)
            .collect()
    }

    /// The gauge-fixed 1-form with coordinates `x`.
    pub fn embed(&self, x: &[f64]) -> OneForm {
        let mut values = vec![0.0; self.edge_count];
        for (&e, &xj) in self.basis.free_edges.iter().zip(x) {
            values[e] = xj;
        }
        OneForm::new(values)
    }

    pub fn point(&self, base: &SupportedMatrix, x: &[f64]) -> Result<TorusPoint, MorseError> {
        if x.len() != self.dim() {
            return Err(MorseError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        TorusPoint::new(base.clone(), self.embed(x))
    }

    /// Gauge-fixed representative of the class of `p`.
    pub fn gauge_fix(&self, p: &TorusPoint) -> TorusPoint {
        self.point(p.base(), &self.coordinates(p.angles())).expect("dimensions agree")
    }
}

/// Spectral data of `λ_k` at one point, shared by the derivative formulas.
struct LocalEigen {
    h: SupportedMatrix,
    es: EigenSystem,
    k: usize,
    multiplicity: usize,
    gap: f64,
}

impl LocalEigen {
    fn at(h: SupportedMatrix, k: usize, tol: &Tolerances) -> Result<Self, MorseError> {
        let es = eigh(&h)?;
        es.check_index(k)?;
        let (multiplicity, k0) = es.multiplicity(k, tol.degeneracy)?;
        let lam = es.value(k);
        let below = (k0 > 1).then(|| lam - es.value(k0 - 1));
        let above = (k0 + multiplicity <= es.n()).then(|| es.value(k0 + multiplicity) - lam);
        let gap = match (below, above) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => f64::INFINITY,
        };
        Ok(Self { h, es, k, multiplicity, gap })
    }

    fn require_simple(&self) -> Result<(), MorseError> {
        if self.multiplicity == 1 {
            Ok(())
        } else {
            Err(MorseError::NotSimple { k: self.k, multiplicity: self.multiplicity, gap: self.gap })
        }
    }

    fn lambda(&self) -> f64 {
        self.es.value(self.k)
    }

    fn scale(&self) -> f64 {
        scale(self.h.frobenius_norm())
    }

    fn vector(&self) -> DVector<Complex64> {
        self.es.vector(self.k)
    }

    /// `v̄_r h_rs v_s` per edge.
    fn edge_products(&self) -> Vec<Complex64> {
        let v = self.vector();
        self.h.graph().edges().iter().zip(self.h.offdiag()).map(|(&(r, s), &z)| v[r].conj() * z * v[s]).collect()
    }

    /// `∂λ_k/∂α_rs = 2 Im(h̄_rs v_r v̄_s)` on every edge.
    fn gradient(&self) -> Vec<f64> {
        self.edge_products().iter().map(|z| -2.0 * z.im).collect()
    }

    /// Second derivative of `λ_k` in the edge angles: `−2 Re⟨(h−λ)^+ w_γ, w_δ⟩`
    /// plus the diagonal term `−2 Re(v̄_r h_rs v_s)`, with `w_e = (∂_e h) v`.
    fn full_hessian(&self, tol: &Tolerances) -> Result<DMatrix<f64>, MorseError> {
        let graph = self.h.graph();
        let m = graph.edge_count();
        let n = self.h.n();
        let v = self.vector();
        let lam = self.lambda();
        let i = Complex64::new(0.0, 1.0);
        let w: Vec<DVector<Complex64>> = graph
            .edges()
            .iter()
            .zip(self.h.offdiag())
            .map(|(&(r, s), &z)| {
                let mut col = DVector::from_element(n, Complex64::new(0.0, 0.0));
                col[r] = i * z * v[s];
                col[s] = -i * z.conj() * v[r];
                col
            })
            .collect();
        let tol_abs = self.es.abs_tol(tol.degeneracy);
        let pw: Vec<DVector<Complex64>> = w.iter().map(|x| self.es.pseudo_inverse_apply(lam, x, tol_abs)).collect();
        let products = self.edge_products();
        let mut hess = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                hess[(a, b)] = -2.0 * pw[a].dotc(&w[b]).re;
            }
            hess[(a, a)] += -2.0 * products[a].re;
        }
        let asym = (&hess - hess.transpose()).amax();
        if asym > 1e-9 * hess.amax().max(1.0) {
            return Err(MorseError::Asymmetric(asym));
        }
        Ok((&hess + hess.transpose()) * 0.5)
    }
}

/// Full gradient of `λ_k` on the torus, one entry per edge angle.
pub fn eigenvalue_gradient(p: &TorusPoint, k: usize) -> Result<OneForm, MorseError> {
    let local = LocalEigen::at(p.matrix(), k, &Tolerances::default())?;
    local.require_simple()?;
    Ok(OneForm::new(local.gradient()))
}

/// Gradient of `λ_k` in the chart coordinates.
pub fn reduced_gradient(p: &TorusPoint, k: usize, chart: &GaugeChart) -> Result<Vec<f64>, MorseError> {
    let g = eigenvalue_gradient(p, k)?;
    Ok(chart.free_edges().iter().map(|&e| g.values[e]).collect())
}

/// Hessian of `λ_k` in the chart coordinates at a critical point.
pub fn hessian_lambda(p: &TorusPoint, k: usize, chart: &GaugeChart) -> Result<DMatrix<f64>, MorseError> {
    hessian_lambda_with(p, k, chart, &Tolerances::default())
}

pub fn hessian_lambda_with(
    p: &TorusPoint,
    k: usize,
    chart: &GaugeChart,
    tol: &Tolerances,
) -> Result<DMatrix<f64>, MorseError> {
    let local = LocalEigen::at(p.matrix(), k, tol)?;
    local.require_simple()?;
    let g = local.gradient();
    let gradient_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if gradient_norm > tol.critical * local.scale() {
        return Err(MorseError::NotCritical { k, gradient_norm });
    }
    Ok(restrict(&local.full_hessian(tol)?, chart))
}

fn restrict(full: &DMatrix<f64>, chart: &GaugeChart) -> DMatrix<f64> {
    let free = chart.free_edges();
    DMatrix::from_fn(free.len(), free.len(), |a, b| full[(free[a], free[b])])
}

/// Second-order central differences of `λ_k` in chart coordinates.
pub fn hessian_finite_difference(
    p: &TorusPoint,
    k: usize,
    chart: &GaugeChart,
    step: f64,
) -> Result<DMatrix<f64>, MorseError> {
    let x = chart.coordinates(p.angles());
    let lam = |y: &[f64]| -> Result<f64, MorseError> {
        let q = chart.point(p.base(), y)?;
        let es = eigh(&q.matrix())?;
        es.check_index(k)?;
        Ok(es.value(k))
    };
    let d = x.len();
    let shifted = |a: usize, da: f64, b: usize, db: f64| {
        let mut y = x.clone();
        y[a] += da;
        y[b] += db;
        y
    };
    let centre = lam(&x)?;
    let mut hess = DMatrix::zeros(d, d);
    for a in 0..d {
        let plus = lam(&shifted(a, step, a, 0.0))?;
        let minus = lam(&shifted(a, -step, a, 0.0))?;
        hess[(a, a)] = (plus - 2.0 * centre + minus) / (step * step);
        for b in a + 1..d {
            let pp = lam(&shifted(a, step, b, step))?;
            let pm = lam(&shifted(a, step, b, -step))?;
            let mp = lam(&shifted(a, -step, b, step))?;
            let mm = lam(&shifted(a, -step, b, -step))?;
            let v = (pp - pm - mp + mm) / (4.0 * step * step);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    Ok(hess)
}

/// Central differences of the analytic reduced gradient.
pub fn hessian_from_gradient_differences(
    p: &TorusPoint,
    k: usize,
    chart: &GaugeChart,
    step: f64,
) -> Result<DMatrix<f64>, MorseError> {
    let x = chart.coordinates(p.angles());
    let d = x.len();
    let mut hess = DMatrix::zeros(d, d);
    for a in 0..d {
        let mut yp = x.clone();
        let mut ym = x.clone();
        yp[a] += step;
        ym[a] -= step;
        let gp = reduced_gradient(&chart.point(p.base(), &yp)?, k, chart)?;
        let gm = reduced_gradient(&chart.point(p.base(), &ym)?, k, chart)?;
        for b in 0..d {
            hess[(b, a)] = (gp[b] - gm[b]) / (2.0 * step);
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Central differences of `λ_k` in every edge angle.
pub fn gradient_finite_difference(p: &TorusPoint, k: usize, step: f64) -> Result<OneForm, MorseError> {
    let mut out = Vec::with_capacity(p.angles().len());
    for e in 0..p.angles().len() {
        let mut values = [p.angles().values.clone(), p.angles().values.clone()];
        values[0][e] += step;
        values[1][e] -= step;
        let [plus, minus] = values.map(|a| {
            let q = TorusPoint::new(p.base().clone(), OneForm::new(a)).expect("same base");
            eigh(&q.matrix()).map(|es| es.values[k - 1])
        });
        out.push((plus? - minus?) / (2.0 * step));
    }
    Ok(OneForm::new(out))
}

/// Hessian of `F(α) = ⟨v, (α*h − λ) v⟩` split into the diagonal edge block
/// and the gauge block `2 M_v*(h−λ)M_v` on vertex functions.
#[derive(Debug, Clone)]
pub struct HessianF {
    pub edge_diagonal: Vec<f64>,
    pub gauge_block: DMatrix<f64>,
    pub edge_index: usize,
    pub gauge_index: usize,
    pub gauge_nullity: usize,
}

pub fn hessian_f(p: &TorusPoint, k: usize) -> Result<HessianF, MorseError> {
    let tol = Tolerances::default();
    let local = LocalEigen::at(p.matrix(), k, &tol)?;
    local.require_simple()?;
    let products = local.edge_products();
    let s = local.scale();
    let worst = products.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > tol.edge_real * s {
        return Err(MorseError::NotCritical { k, gradient_norm: 2.0 * worst });
    }
    let edge_diagonal: Vec<f64> = products.iter().map(|z| -2.0 * z.re).collect();
    let v = local.vector();
    let n = local.h.n();
    let lam = local.lambda();
    let dense = local.h.to_dense();
    let gauge_block = DMatrix::from_fn(n, n, |r, c| {
        let shift = if r == c { lam } else { 0.0 };
        2.0 * (v[r].conj() * (dense[(r, c)] - shift) * v[c]).re
    });
    let gauge = morse_index(&gauge_block, tol.rank)?;
    Ok(HessianF {
        edge_index: edge_diagonal.iter().filter(|&&x| x < 0.0).count(),
        edge_diagonal,
        gauge_block,
        gauge_index: gauge.index,
        gauge_nullity: gauge.nullity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseIndex {
    pub index: usize,
    pub nullity: usize,
    pub eigenvalues: Vec<f64>,
}

/// Negative and near-zero eigenvalue counts, relative to the spectral norm.
pub fn morse_index(hess: &DMatrix<f64>, rank_tol: f64) -> Result<MorseIndex, MorseError> {
    let (eigenvalues, _) = eigh_real(hess)?;
    let norm = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cut = rank_tol * norm;
    Ok(MorseIndex {
        index: eigenvalues.iter().filter(|&&x| x < -cut).count(),
        nullity: eigenvalues.iter().filter(|&&x| x.abs() <= cut).count(),
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalClass {
    /// Not a critical point.
    SmoothRegular,
    Symmetry,
    /// Simple eigenvalue whose eigenvector vanishes somewhere.
    Exceptional,
    /// Eigenvalue of multiplicity at least two.
    Incorrigible,
    /// Critical, simple, nowhere vanishing and not a symmetry point. Should not
    /// occur; kept so such a finding is reported rather than hidden.
    SmoothNonSymmetry,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criticality {
    pub k: usize,
    pub lambda: f64,
    pub multiplicity: usize,
    pub gap: f64,
    pub critical: bool,
    pub classification: CriticalClass,
    /// `max_e |Im(v̄_r h_rs v_s)|`; absent at multiple eigenvalues.
    pub max_edge_imag: Option<f64>,
    pub vanishing: Vec<usize>,
}

/// Criticality test and case split for `λ_k` at `p`.
pub fn is_critical(p: &TorusPoint, k: usize, tol: &Tolerances) -> Result<Criticality, MorseError> {
    let local = LocalEigen::at(p.matrix(), k, tol)?;
    let lambda = local.lambda();
    if local.multiplicity > 1 {
        return Ok(Criticality {
            k,
            lambda,
            multiplicity: local.multiplicity,
            gap: local.gap,
            critical: true,
            classification: CriticalClass::Incorrigible,
            max_edge_imag: None,
            vanishing: Vec::new(),
        });
    }
    let worst = local.edge_products().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let critical = worst <= tol.critical * local.scale();
    let (_, vanishing) = is_nowhere_vanishing(&local.vector(), tol.vanishing);
    let classification = if !critical {
        CriticalClass::SmoothRegular
    } else if is_gauge_equiv_to_symmetry(&local.h, tol.flux)?.is_symmetry {
        CriticalClass::Symmetry
    } else if !vanishing.is_empty() {
        CriticalClass::Exceptional
    } else {
        CriticalClass::SmoothNonSymmetry
    };
    Ok(Criticality {
        k,
        lambda,
        multiplicity: 1,
        gap: local.gap,
        critical,
        classification,
        max_edge_imag: Some(worst),
        vanishing,
    })
}

#[derive(Debug, Clone)]
pub struct ScanBudget {
    /// Starts besides the symmetry points, split between a low-discrepancy
    /// sequence and seeded random draws.
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Symmetry points are used as starts when `β` is at most this.
    pub symmetry_limit: usize,
    pub tol: Tolerances,
}

impl Default for ScanBudget {
    fn default() -> Self {
        Self { starts: 64, seed: 0, max_iter: 100, symmetry_limit: 12, tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointReport {
    /// Chart coordinates (fundamental-cycle fluxes).
    pub coordinates: Vec<f64>,
    pub angles: Vec<f64>,
    pub k: usize,
    pub lambda: f64,
    pub classification: CriticalClass,
    pub multiplicity: usize,
    pub gap: f64,
    pub vanishing: Vec<usize>,
    pub gradient_norm: Option<f64>,
    pub hessian_eigenvalues: Option<Vec<f64>>,
    /// Left empty at incorrigible points, where no Morse index is defined.
    pub morse_index: Option<usize>,
    pub nullity: Option<usize>,
    pub nodal_surplus: Option<usize>,
    /// Position of the conjugate point in the report list.
    pub conjugate: Option<usize>,
    pub hits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub k: usize,
    pub beta: usize,
    pub reports: Vec<CriticalPointReport>,
    pub starts: usize,
    pub converged: usize,
    pub unconverged: usize,
    pub search_coverage: String,
}

impl ScanResult {
    pub fn count(&self, class: CriticalClass) -> usize {
        self.reports.iter().filter(|r| r.classification == class).count()
    }
}

enum Outcome {
    Converged(Vec<f64>),
    Cluster(Vec<f64>),
    Failed,
}

struct ScanContext<'a> {
    base: &'a SupportedMatrix,
    chart: GaugeChart,
    k: usize,
    tol: Tolerances,
}

impl ScanContext<'_> {
    fn local(&self, x: &[f64]) -> Result<LocalEigen, MorseError> {
        LocalEigen::at(self.chart.point(self.base, x)?.matrix(), self.k, &self.tol)
    }

    fn reduced(&self, local: &LocalEigen) -> Vec<f64> {
        let g = local.gradient();
        self.chart.free_edges().iter().map(|&e| g[e]).collect()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let local = self.local(x).ok()?;
        (local.multiplicity == 1).then(|| self.reduced(&local))
    }

    fn polish(&self, start: Vec<f64>, max_iter: usize) -> Outcome {
        let mut x = start;
        let scale = scale(self.base.frobenius_norm());
        for _ in 0..max_iter {
            let Ok(local) = self.local(&x) else { return Outcome::Failed };
            if local.multiplicity > 1 {
                return Outcome::Cluster(x);
            }
            let g = self.reduced(&local);
            let gn = norm(&g);
            if gn <= 1e-15 * scale {
                return Outcome::Converged(wrap_all(&x));
            }
            let Ok(full) = local.full_hessian(&self.tol) else { return Outcome::Failed };
            let hess = restrict(&full, &self.chart);
            let mut step = newton_step(&hess, &g);
            let sn = norm(&step);
            // a small gradient alone is not enough when the curvature is small too
            if gn <= self.tol.critical * scale && sn <= NEWTON_STEP_TOL {
                let polished: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                return Outcome::Converged(wrap_all(&polished));
            }
            if sn > 0.5 {
                step.iter_mut().for_each(|s| *s *= 0.5 / sn);
            }
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            if self.gradient(&trial).is_some_and(|gt| norm(&gt) < gn) {
                x = trial;
                continue;
            }
            // descend on ½‖g‖², whose gradient is H g
            let q: Vec<f64> = (&hess * DVector::from_column_slice(&g)).iter().map(|v| -v).collect();
            let qn = norm(&q);
            if qn == 0.0 {
                return Outcome::Failed;
            }
            let f0 = 0.5 * gn * gn;
            let mut t = (0.5 / qn).min(1.0);
            let mut moved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = x.iter().zip(&q).map(|(a, b)| a + t * b).collect();
                if let Some(gt) = self.gradient(&trial) {
                    let ft = 0.5 * norm(&gt).powi(2);
                    if ft <= f0 - 1e-4 * t * qn * qn {
                        x = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                return Outcome::Failed;
            }
        }
        Outcome::Failed
    }

    fn report(&self, x: Vec<f64>) -> Result<CriticalPointReport, MorseError> {
        let p = self.chart.point(self.base, &x)?;
        let crit = is_critical(&p, self.k, &self.tol)?;
        let mut report = CriticalPointReport {
            angles: p.angles().values.clone(),
            coordinates: x,
            k: self.k,
            lambda: crit.lambda,
            classification: crit.classification,
            multiplicity: crit.multiplicity,
            gap: crit.gap,
            vanishing: crit.vanishing,
            gradient_norm: None,
            hessian_eigenvalues: None,
            morse_index: None,
            nullity: None,
            nodal_surplus: None,
            conjugate: None,
            hits: 1,
        };
        if crit.classification == CriticalClass::Incorrigible {
            return Ok(report);
        }
        let local = self.local(&report.coordinates)?;
        report.gradient_norm = Some(norm(&self.reduced(&local)));
        let mi = morse_index(&restrict(&local.full_hessian(&self.tol)?, &self.chart), self.tol.rank)?;
        report.morse_index = Some(mi.index);
        report.nullity = Some(mi.nullity);
        report.hessian_eigenvalues = Some(mi.eigenvalues);
        if crit.classification == CriticalClass::Symmetry {
            report.nodal_surplus = symmetry_surplus(&local.h, self.k, &self.tol);
        }
        Ok(report)
    }
}

/// Nodal surplus at a symmetry point, read off a real gauge representative.
fn symmetry_surplus(h: &SupportedMatrix, k: usize, tol: &Tolerances) -> Option<usize> {
    let witness = is_gauge_equiv_to_symmetry(h, tol.flux).ok()?.witness?;
    let real = gauge_transform(&witness, h).ok()?;
    let offdiag = real.offdiag().iter().map(|z| z.re).collect();
    let real = SupportedMatrix::real(real.graph_arc().clone(), real.diag().to_vec(), offdiag).ok()?;
    let es = eigh(&real).ok()?;
    nodal_count_with(&real, &es, k, tol).ok().map(|c| c + 1 - k)
}

fn newton_step(hess: &DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let Ok((mu, q)) = eigh_real(hess) else { return vec![0.0; g.len()] };
    let cut = 1e-12 * mu.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let g = DVector::from_column_slice(g);
    let mut step = DVector::zeros(g.len());
    for (j, &m) in mu.iter().enumerate() {
        if m.abs() > cut {
            let col = q.column(j);
            step -= col * (col.dot(&g) / m);
        }
    }
    step.iter().copied().collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(TWO_PI) % TWO_PI
}

fn wrap_all(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| wrap(v)).collect()
}

/// Max-norm distance on the torus.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(TWO_PI);
            d.min(TWO_PI - d)
        })
        .fold(0.0, f64::max)
}

/// Kronecker sequence with the generalized golden ratio in dimension `d`.
fn low_discrepancy(i: usize, d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..50 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (0..d)
        .map(|j| {
            let a = phi.powi(-(j as i32 + 1));
            TWO_PI * (0.5 + a * (i + 1) as f64).fract()
        })
        .collect()
}

/// Multi-start search for critical points of `λ_k` on the quotient torus of a
/// real properly supported `h`.
pub fn critical_scan(h: &SupportedMatrix, k: usize, budget: &ScanBudget) -> Result<ScanResult, MorseError> {
    if !h.is_real() {
        return Err(MorseError::NotReal);
    }
    h.require_proper_support()?;
    let base = h.abs_part();
    let es = eigh(h)?;
    es.check_index(k)?;
    let ctx = ScanContext { base: &base, chart: GaugeChart::new(h.graph()), k, tol: budget.tol };
    let beta = ctx.chart.dim();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let symmetry_starts = if beta <= budget.symmetry_limit { 1usize << beta } else { 0 };
    for mask in 0..symmetry_starts {
        starts.push((0..beta).map(|j| if mask >> j & 1 == 1 { PI } else { 0.0 }).collect());
    }
    let (lattice, random) = if beta == 0 { (0, 0) } else { (budget.starts / 2, budget.starts - budget.starts / 2) };
    for i in 0..lattice {
        starts.push(low_discrepancy(i, beta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..random {
        starts.push((0..beta).map(|_| rng.gen_range(0.0..TWO_PI)).collect());
    }
    if starts.is_empty() {
        starts.push(Vec::new());
    }

    let outcomes: Vec<Outcome> = starts.par_iter().map(|x| ctx.polish(x.clone(), budget.max_iter)).collect();

    let mut reports: Vec<CriticalPointReport> = Vec::new();
    let (mut converged, mut unconverged) = (0, 0);
    for outcome in outcomes {
        let x = match outcome {
            Outcome::Converged(x) => {
                converged += 1;
                x
            }
            Outcome::Cluster(x) => wrap_all(&x),
            Outcome::Failed => {
                unconverged += 1;
                continue;
            }
        };
        if let Some(r) = reports.iter_mut().find(|r| torus_distance(&r.coordinates, &x) <= 1e-6) {
            r.hits += 1;
            continue;
        }
        reports.push(ctx.report(x)?);
    }
    for a in 0..reports.len() {
        let neg: Vec<f64> = reports[a].coordinates.iter().map(|&v| -v).collect();
        reports[a].conjugate = reports.iter().position(|r| torus_distance(&r.coordinates, &neg) <= 1e-6);
    }
    let search_coverage = format!(
        "{} starts ({} symmetry points, {} low-discrepancy, {} random with seed {}); {} converged, {} unconverged. \
         Critical points other than symmetry points are found only when some start lies in their basin.",
        starts.len(),
        symmetry_starts,
        lattice,
        random,
        budget.seed,
        converged,
        unconverged
    );
    Ok(ScanResult { k, beta, reports, starts: starts.len(), converged, unconverged, search_coverage })
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub cap: usize,
    /// Also compare with finite-difference Hessians (step for second differences of `λ_k`).
    pub finite_difference_step: Option<f64>,
    pub tol: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_SIGNING_CAP, finite_difference_step: Some(1e-4), tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum IndexRowStatus {
    Agree {
        index: usize,
        surplus: usize,
        /// `max |H − H_fd| / max(1, |λ_k|)` for second differences of `λ_k`.
        fd_error: Option<f64>,
        /// `max |H − H_g| / max |H|` for differences of the analytic gradient.
        gradient_fd_error: Option<f64>,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexRow {
    pub representative: u64,
    pub cycle_parity: u64,
    pub k: usize,
    #[serde(flatten)]
    pub status: IndexRowStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexTable {
    pub rows: Vec<IndexRow>,
}

impl IndexTable {
    pub fn agreements(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.status, IndexRowStatus::Agree { .. })).count()
    }

    pub fn skipped(&self) -> usize {
        self.rows.len() - self.agreements()
    }

    pub fn max_fd_error(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| match r.status {
                IndexRowStatus::Agree { fd_error, .. } => fd_error,
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    pub fn max_gradient_fd_error(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| match r.status {
                IndexRowStatus::Agree { gradient_fd_error, .. } => gradient_fd_error,
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Compares the Morse index of `λ_k` with the nodal surplus at one signing per
/// gauge class and every `k`. A mismatch is an error.
pub fn verify_index_equals_surplus(h: &SupportedMatrix, opts: &VerifyOptions) -> Result<IndexTable, MorseError> {
    let classes = gauge_classes_of_signings(h, opts.cap)?;
    let chart = GaugeChart::new(h.graph());
    let mut rows = Vec::new();
    for class in &classes {
        let signed = h.signing(class.representative);
        let es = eigh(&signed)?;
        let point = TorusPoint::from_matrix(&signed)?;
        for k in 1..=h.n() {
            let row =
                |status| IndexRow { representative: class.representative, cycle_parity: class.cycle_parity, k, status };
            let surplus = match nodal_count_with(&signed, &es, k, &opts.tol) {
                Ok(c) => c + 1 - k,
                Err(e) => {
                    rows.push(row(IndexRowStatus::Skipped { reason: e.to_string() }));
                    continue;
                }
            };
            let hess = hessian_lambda_with(&point, k, &chart, &opts.tol)?;
            let mi = morse_index(&hess, opts.tol.rank)?;
            if mi.index != surplus || mi.nullity != 0 {
                return Err(MorseError::IndexMismatch {
                    representative: class.representative,
                    k,
                    index: mi.index,
                    nullity: mi.nullity,
                    surplus,
                });
            }
            let (fd_error, gradient_fd_error) = match opts.finite_difference_step {
                Some(step) => {
                    let fd = hessian_finite_difference(&point, k, &chart, step)?;
                    let gd = hessian_from_gradient_differences(&point, k, &chart, step * 0.1)?;
                    let lam_scale = es.value(k).abs().max(1.0);
                    let hmax = hess.amax();
                    let gd_err = if hmax > 0.0 { (&hess - gd).amax() / hmax } else { (&hess - gd).amax() };
                    (Some((&hess - fd).amax() / lam_scale), Some(gd_err))
                }
                None => (None, None),
            };
            rows.push(row(IndexRowStatus::Agree { index: mi.index, surplus, fd_error, gradient_fd_error }));
        }
    }
    Ok(IndexTable { rows })
}
