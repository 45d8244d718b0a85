//! Discrete ideal clocks: a cyclic tick space ℤ_n carrying the standard
//! clock, shift, and time operators.
//!
//! The shift operator X_n advances the reading by one tick, the clock
//! operator Z_n marks readings with n-th roots of unity, and together they
//! satisfy the Weyl relation Z_n X_n = ω_n X_n Z_n with ω_n = e^{2πi/n}.
//! For n = 2 these are the Pauli matrices σ_x and σ_z.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix};

/// A cyclic clock with `n` perfectly distinguishable readings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscreteClock {
    n: usize,
}

impl DiscreteClock {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDimension("clock needs at least one tick".into()));
        }
        Ok(DiscreteClock { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// ω_n = e^{2πi/n}.
    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU / self.n as f64)
    }

    /// Shift operator X_n, the permutation |τ⟩ ↦ |τ+1 mod n⟩.
    pub fn shift_op(&self) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |i, j| {
            if i == (j + 1) % n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Clock operator Z_n = diag(ω_n^0, …, ω_n^{n−1}). Each root is computed
    /// as exp(2πiτ/n) directly rather than by repeated multiplication, so
    /// there is no phase drift for larger n.
    pub fn clock_op(&self) -> ComplexMatrix {
        let n = self.n;
        let diag: Vec<Complex64> = (0..n)
            .map(|tau| Complex64::from_polar(1.0, TAU * tau as f64 / n as f64))
            .collect();
        ComplexMatrix::diagonal(&diag)
    }

    /// Time operator T_c = Σ_τ τ|τ⟩⟨τ| = diag(0, 1, …, n−1).
    pub fn time_op(&self) -> ComplexMatrix {
        let diag: Vec<Complex64> = (0..self.n)
            .map(|tau| Complex64::new(tau as f64, 0.0))
            .collect();
        ComplexMatrix::diagonal(&diag)
    }

    /// The n-th roots of unity, one per tick, as a raw eigenvalue list.
    pub fn root_of_unity_spectrum(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / self.n as f64))
            .collect()
    }
}
