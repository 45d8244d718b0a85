//! Dense complex linear algebra substrate.
//!
//! All operators and state vectors in this crate are [`ComplexMatrix`]
//! values (a state is a single-column matrix). Spectra are reported as
//! [`SpectrumMultiset`]s, eigenvalue multisets with clustered multiplicities.

mod decomp;
mod matrix;
mod spectrum;

pub use decomp::{
    cluster_class_of, hermitian_eigen, joint_hermitian_eigen, qr_unitary_factor, singular_values,
    svd, unitary_eigen,
};
pub use matrix::{Complex64, ComplexMatrix, Keep};
pub use spectrum::{
    spectra_equal, spectrum_deviation, spectrum_hermitian, spectrum_unitary, SpectrumMultiset,
};
