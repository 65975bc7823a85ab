use serde::{Deserialize, Serialize};

/// Numerical thresholds shared across the crate.
///
/// Relative thresholds are scaled by `max(1, ‖h‖_F)` at the call site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues closer than this (relative) belong to one cluster.
    pub degeneracy: f64,
    /// Eigenvector entries with modulus below this vanish.
    pub vanishing: f64,
    /// Allowed imaginary part of `v̄_r h_rs v_s` at a critical point (relative).
    pub edge_real: f64,
    /// Edge products with real part below this (relative) are degenerate.
    pub edge_degenerate: f64,
    /// Gradient norm below which a point is critical (relative).
    pub critical: f64,
    /// Hessian eigenvalues within this fraction of `‖Hess‖` count as zero.
    pub rank: f64,
    /// Angular tolerance for fluxes mod π.
    pub flux: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degeneracy: 1e-8,
            vanishing: 1e-8,
            edge_real: 1e-9,
            edge_degenerate: 1e-12,
            critical: 1e-9,
            rank: 1e-7,
            flux: 1e-9,
        }
    }
}

pub(crate) fn scale(norm: f64) -> f64 {
    norm.max(1.0)
}
