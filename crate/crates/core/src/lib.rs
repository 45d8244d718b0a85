//! A numerical laboratory for relational time in finite dimension.
//!
//! A stationary global state on a clock ⊗ rest split encodes the rest
//! system's evolution in its entanglement with the clock. This crate builds
//! that machinery exactly, with dense complex matrices:
//!
//! - [`linalg`] — dense complex matrices, Kronecker products, spectra,
//!   realignment, partial traces.
//! - [`clock`] — cyclic ideal clocks and their Weyl clock/shift pair.
//! - [`pw`] — clock + rest systems, histories, timeless states, relative
//!   states and conditional expectations.
//! - [`tps`] — tensor product structures as global unitaries: pullbacks,
//!   local-equivalence tests, recovery from generating observables,
//!   wavefunction extraction.
//! - [`ambiguity`] — the intertwiner constructions showing that ideal-clock
//!   systems with equal dimensions are unitarily equivalent as laws and
//!   histories, the spectral-washing report, and the record-decorrelation
//!   experiment.
//! - [`report`] — machine-readable run reports.
//! - [`suite`] — the end-to-end checks exercised by the `pwlab suite`
//!   command and the acceptance tests.
//!
//! Dimensions stay small (n·d ≤ 64), so everything is dense and exact to
//! machine precision; tolerances are collected in [`tol`].

pub mod ambiguity;
pub mod clock;
pub mod error;
pub mod linalg;
pub mod pw;
pub mod report;
pub mod suite;
pub mod tps;

pub use error::{Error, Result};
pub use linalg::{Complex64, ComplexMatrix, SpectrumMultiset};

/// Numerical tolerances used throughout, named by role.
pub mod tol {
    /// Gate for treating a matrix as unitary: ‖M†M − I‖_max.
    pub const UNITARY_GATE: f64 = 1e-10;
    /// Gate for treating a matrix as hermitian: ‖M − M†‖_max.
    pub const HERMITIAN_GATE: f64 = 1e-10;
    /// Eigenvalues closer than this are clustered into one spectral point.
    pub const EIG_CLUSTER: f64 = 1e-8;
    /// Unit-circle check for unitary eigenvalues: each |λ| − 1.
    pub const UNIT_CIRCLE: f64 = 1e-8;
    /// Stationarity residual bound ‖Uψ − ψ‖₂ for assembled timeless states.
    pub const STATIONARITY: f64 = 1e-9;
    /// Residual bound stored intertwiners must satisfy.
    pub const INTERTWINER: f64 = 1e-9;
    /// Product detection: second singular value below this times the first.
    pub const PRODUCT_DETECT: f64 = 1e-8;
    /// Conditional blocks below this norm signal a clock reading that never occurs.
    pub const ZERO_BLOCK: f64 = 1e-12;
    /// Gram–Schmidt candidates with residual below this are dropped.
    pub const GRAM_SCHMIDT_DROP: f64 = 1e-8;
    /// Commutator gate for generating-observable pairs.
    pub const COMMUTE: f64 = 1e-9;
    /// Unit-norm gate for state vectors.
    pub const UNIT_NORM: f64 = 1e-10;
}
