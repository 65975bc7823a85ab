//! Dense Hermitian eigendecomposition (cyclic complex Jacobi) and derived
//! quantities: eigenvalue clusters, vanishing entries, the pseudo-inverse of
//! `h - λ` and the resolvent coefficient at a vertex.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::operators::SupportedMatrix;
use crate::tolerance::scale;

const MAX_SWEEPS: usize = 100;
const OFF_NORM_REL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },
    #[error("eigen-index {k} outside 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("eigenvalue {k} is not simple (multiplicity {multiplicity})")]
    NotSimple { k: usize, multiplicity: usize },
    #[error("input matrix is not square")]
    NotSquare,
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
///
/// Eigen-indices `k` are 1-based throughout the public API.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    /// Frobenius norm of the decomposed matrix.
    pub norm: f64,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn check_index(&self, k: usize) -> Result<(), SpectralError> {
        if k == 0 || k > self.n() {
            Err(SpectralError::IndexOutOfRange { k, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k - 1).into_owned()
    }

    /// Absolute tolerance for eigenvalue comparisons.
    pub fn abs_tol(&self, tol_rel: f64) -> f64 {
        tol_rel * scale(self.norm)
    }

    /// Multiplicity `m` of `λ_k` and the 1-based start `k0` of its cluster:
    /// all eigenvalues within `tol_rel * max(1, ‖h‖)` of `λ_k`.
    pub fn multiplicity(&self, k: usize, tol_rel: f64) -> Result<(usize, usize), SpectralError> {
        self.check_index(k)?;
        let tol = self.abs_tol(tol_rel);
        let lam = self.value(k);
        let mut lo = k;
        while lo > 1 && (self.value(lo - 1) - lam).abs() <= tol {
            lo -= 1;
        }
        let mut hi = k;
        while hi < self.n() && (self.value(hi + 1) - lam).abs() <= tol {
            hi += 1;
        }
        Ok((hi - lo + 1, lo))
    }

    pub fn require_simple(&self, k: usize, tol_rel: f64) -> Result<(), SpectralError> {
        let (multiplicity, _) = self.multiplicity(k, tol_rel)?;
        if multiplicity == 1 {
            Ok(())
        } else {
            Err(SpectralError::NotSimple { k, multiplicity })
        }
    }

    /// `(h - λ)^+ x`, dropping every eigenvector with `|λ_j - λ| <= tol_abs`.
    pub fn pseudo_inverse_apply(&self, lambda: f64, x: &DVector<Complex64>, tol_abs: f64) -> DVector<Complex64> {
        let mut out = DVector::from_element(self.n(), Complex64::new(0.0, 0.0));
        for (j, &lj) in self.values.iter().enumerate() {
            let gap = lj - lambda;
            if gap.abs() <= tol_abs {
                continue;
            }
            let psi = self.vectors.column(j);
            let coeff = psi.dotc(x) / gap;
            out.axpy(coeff, &psi, Complex64::new(1.0, 0.0));
        }
        out
    }

    /// `Σ_{j≠k} |ψ_j(vertex)|² / (λ_k − λ_j)` for a simple `λ_k`.
    pub fn resolvent_coefficient(&self, k: usize, vertex: usize, tol_rel: f64) -> Result<f64, SpectralError> {
        self.require_simple(k, tol_rel)?;
        if vertex >= self.n() {
            return Err(SpectralError::VertexOutOfRange { vertex, n: self.n() });
        }
        let lam = self.value(k);
        Ok(self
            .values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k - 1)
            .map(|(j, &lj)| self.vectors[(vertex, j)].norm_sqr() / (lam - lj))
            .sum())
    }
}

/// Eigendecomposition of a supported Hermitian matrix.
pub fn eigh(h: &SupportedMatrix) -> Result<EigenSystem, SpectralError> {
    eigh_dense(&h.to_dense())
}

/// Eigendecomposition of a dense Hermitian matrix; only the upper triangle
/// and the real part of the diagonal are trusted.
pub fn eigh_dense(h: &DMatrix<Complex64>) -> Result<EigenSystem, SpectralError> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(SpectralError::NotSquare);
    }
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            a[(j, i)] = a[(i, j)].conj();
        }
    }
    let norm = a.norm();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let target = OFF_NORM_REL * norm;

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NotConverged { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (col, &i) in order.iter().enumerate() {
        let mut psi = v.column(i).into_owned();
        fix_phase(&mut psi);
        vectors.set_column(col, &psi);
    }
    Ok(EigenSystem { values, vectors, norm })
}

fn off_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// One Jacobi step annihilating `a_pq`: a diagonal phase makes `a_pq` real,
/// then a real plane rotation zeroes it.
fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let n = a.nrows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    if apq.im != 0.0 {
        // scale column q by d and row q by conj(d), d = conj(apq)/|apq|
        let d = apq.conj() / mag;
        for k in 0..n {
            a[(k, q)] *= d;
            v[(k, q)] *= d;
        }
        for k in 0..n {
            a[(q, k)] *= d.conj();
        }
        a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
        a[(p, q)] = Complex64::new(mag, 0.0);
        a[(q, p)] = Complex64::new(mag, 0.0);
    }
    let apq = a[(p, q)].re;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * apq);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * c - akq * s;
        a[(k, q)] = akp * s + akq * c;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = apk * c - aqk * s;
        a[(q, k)] = apk * s + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Makes the first entry of (near-)maximal modulus real positive.
fn fix_phase(psi: &mut DVector<Complex64>) {
    let max = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = psi.iter().position(|z| z.norm() >= max * (1.0 - 1e-10)).expect("maximum attained");
    let z = psi[pivot];
    if z.im == 0.0 {
        if z.re < 0.0 {
            psi.iter_mut().for_each(|x| *x = -*x);
        }
    } else {
        let u = z.conj() / z.norm();
        psi.iter_mut().for_each(|x| *x *= u);
        psi[pivot] = Complex64::new(psi[pivot].re, 0.0);
    }
}

/// Vertices where `|v_r| < tol`, and whether that set is empty.
pub fn is_nowhere_vanishing(v: &DVector<Complex64>, tol: f64) -> (bool, Vec<usize>) {
    let vanishing: Vec<usize> = v.iter().enumerate().filter(|(_, z)| z.norm() < tol).map(|(r, _)| r).collect();
    (vanishing.is_empty(), vanishing)
}

/// `(h - λ)^+ x` with the degeneracy tolerance relative to `‖h‖`.
pub fn pseudo_inverse_apply(
    h: &SupportedMatrix,
    lambda: f64,
    x: &DVector<Complex64>,
    tol_rel: f64,
) -> Result<DVector<Complex64>, SpectralError> {
    let es = eigh(h)?;
    Ok(es.pseudo_inverse_apply(lambda, x, es.abs_tol(tol_rel)))
}

pub fn resolvent_coefficient(h: &SupportedMatrix, k: usize, vertex: usize, tol_rel: f64) -> Result<f64, SpectralError> {
    eigh(h)?.resolvent_coefficient(k, vertex, tol_rel)
}

/// Eigenvalues and eigenvectors of a real symmetric matrix.
pub fn eigh_real(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), SpectralError> {
    let es = eigh_dense(&m.map(|x| Complex64::new(x, 0.0)))?;
    Ok((es.values, es.vectors.map(|z| z.re)))
}
