//! Magnetic perturbations of discrete Schrödinger operators on finite graphs.
//!
//! The crate covers the objects needed to study eigenvalues of Hermitian
//! matrices supported on a graph as functions on the torus of magnetic
//! perturbations modulo gauge:
//!
//! * [`graph`]: graphs, chains, 1-forms and fundamental cycle bases.
//! * [`operators`]: supported matrices, the magnetic action, gauge
//!   transformations, signings and their gauge classes.
//! * [`spectral`]: a Jacobi eigensolver and derived spectral quantities.
//! * [`nodal`]: nodal counts, nodal surplus and surplus distributions.
//! * [`morse`]: gradients, Hessians and Morse indices of eigenvalues on the
//!   gauge-fixed torus, plus a critical point search.
//! * [`linkage`]: planar linkages and the analysis of exceptional critical
//!   points whose eigenvector vanishes at one vertex.
//! * [`transversality`]: tests for transversality to multiplicity strata.
//! * [`io`]: JSON formats for graphs, operators and 1-forms.

pub mod graph;
pub mod io;
pub mod linkage;
pub mod morse;
pub mod nodal;
pub mod operators;
pub mod spectral;
pub mod tolerance;
pub mod transversality;

pub use graph::{Chain, CycleBasis, Graph, GraphError, OneForm};
pub use operators::{GaugePhase, OperatorError, SupportedMatrix};
pub use spectral::{eigh, EigenSystem, SpectralError};
pub use tolerance::Tolerances;
