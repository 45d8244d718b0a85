//! Tensor product structures as global unitaries.
//!
//! A TPS is a unitary isomorphism from product-basis coordinates into the
//! global space, held relative to a fixed reference product basis; the
//! factor spaces are never materialized separately. Pulling a TPS back
//! through a global unitary M (iso ↦ M⁻¹·iso) rereads the active
//! transformation M passively as a change of tensor product structure: a
//! vector has, in the pulled-back TPS, the same components M·ψ has in the
//! original one.
//!
//! Two TPSs are equivalent when they differ by local unitaries on the
//! factors (possibly swapped); the test realigns the connecting unitary and
//! checks for operator-Schmidt rank one.

use crate::error::{Error, Result};
use crate::linalg::{joint_hermitian_eigen, svd, Complex64, ComplexMatrix};
use crate::pw::TimelessState;
use crate::tol;

/// A clock ⊗ rest tensor product structure on a dim_c·dim_r space.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "TpsJson", into = "TpsJson")]
pub struct Tps {
    dim_c: usize,
    dim_r: usize,
    iso: ComplexMatrix,
}

/// Wire format: `{"dim_c":…,"dim_r":…,"iso":<matrix>}`.
#[derive(serde::Serialize, serde::Deserialize)]
struct TpsJson {
    dim_c: usize,
    dim_r: usize,
    iso: ComplexMatrix,
}

impl From<Tps> for TpsJson {
    fn from(t: Tps) -> Self {
        TpsJson {
            dim_c: t.dim_c,
            dim_r: t.dim_r,
            iso: t.iso,
        }
    }
}

impl TryFrom<TpsJson> for Tps {
    type Error = Error;

    fn try_from(j: TpsJson) -> Result<Self> {
        Tps::new(j.dim_c, j.dim_r, j.iso)
    }
}

impl Tps {
    pub fn new(dim_c: usize, dim_r: usize, iso: ComplexMatrix) -> Result<Self> {
        if iso.rows() != dim_c * dim_r || !iso.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "iso is {}x{}, expected square of dimension {}",
                iso.rows(),
                iso.cols(),
                dim_c * dim_r
            )));
        }
        iso.check_unitary(tol::UNITARY_GATE)?;
        Ok(Tps { dim_c, dim_r, iso })
    }

    /// The reference TPS: iso = I.
    pub fn identity(dim_c: usize, dim_r: usize) -> Self {
        Tps {
            dim_c,
            dim_r,
            iso: ComplexMatrix::identity(dim_c * dim_r),
        }
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn iso(&self) -> &ComplexMatrix {
        &self.iso
    }

    /// The product vector |τ⟩|k⟩ of this TPS, as a global vector.
    pub fn product_vector(&self, tau: usize, k: usize) -> ComplexMatrix {
        self.iso
            .column(tau * self.dim_r + k)
    }
}

/// Pulls `reference` back through the unitary `m`: the new product vectors
/// are m⁻¹ applied to the old ones.
pub fn pullback_tps(reference: &Tps, m: &ComplexMatrix) -> Result<Tps> {
    if m.rows() != reference.iso.rows() || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "pullback by {}x{} on a TPS of dimension {}",
            m.rows(),
            m.cols(),
            reference.iso.rows()
        )));
    }
    m.check_unitary(tol::UNITARY_GATE)?;
    Tps::new(reference.dim_c, reference.dim_r, &m.dagger() * &reference.iso)
}

/// Outcome of a local-equivalence test between two TPSs.
#[derive(Clone, Debug)]
pub enum TpsEquivalence {
    /// The connecting unitary factors as clock_factor ⊗ rest_factor
    /// (after a factor swap when `swapped`). The clock factor carries unit
    /// Frobenius norm and a real-positive first entry; the rest factor
    /// absorbs the scale.
    Equivalent {
        clock_factor: ComplexMatrix,
        rest_factor: ComplexMatrix,
        swapped: bool,
    },
    /// No factorization: the realigned connecting unitary has operator-Schmidt
    /// rank above one; the ratio of its second to leading singular value is
    /// reported.
    Inequivalent { second_singular_ratio: f64 },
}

impl TpsEquivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, TpsEquivalence::Equivalent { .. })
    }
}

/// The factor-swap unitary on a d·d space: |i⟩|j⟩ ↦ |j⟩|i⟩.
pub fn swap_factors(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |p, q| {
        let (i, j) = (p / d, p % d);
        let (k, l) = (q / d, q % d);
        if i == l && j == k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Attempts to factor `q` as A ⊗ B via the realignment; returns the factors
/// or the second-to-first singular ratio that blocked it.
fn factor_pure_tensor(
    q: &ComplexMatrix,
    dim_c: usize,
    dim_r: usize,
    tol: f64,
) -> Result<std::result::Result<(ComplexMatrix, ComplexMatrix), f64>> {
    let r = q.realign(dim_c, dim_r)?;
    let (u, s, v_t) = svd(&r);
    let ratio = if s.len() > 1 { s[1] / s[0] } else { 0.0 };
    if ratio > tol {
        return Ok(Err(ratio));
    }
    let mut a = ComplexMatrix::from_fn(dim_c, dim_c, |i, i2| u[(i * dim_c + i2, 0)]);
    let mut b = ComplexMatrix::from_fn(dim_r, dim_r, |j, j2| {
        v_t[(0, j * dim_r + j2)] * s[0]
    });
    // Balanced phase convention: first nonzero entry of A real-positive.
    let lead = a
        .entries()
        .iter()
        .find(|z| z.norm() > 1e-12)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead / lead.norm();
    a = a.scale(phase.conj());
    b = b.scale(phase);
    Ok(Ok((a, b)))
}

/// Tests whether two TPSs differ only by local unitaries on the factors.
///
/// Computes Q = b.iso⁻¹·a.iso and realigns it; exactly one singular value
/// above `tol` times the leading one means Q = A ⊗ B and the factors are
/// reconstructed from the leading singular pair. When the factor dimensions
/// agree the swapped factorization is tried as well.
pub fn tps_equivalent(a: &Tps, b: &Tps, tol: f64) -> Result<TpsEquivalence> {
    if a.dim_c != b.dim_c || a.dim_r != b.dim_r {
        return Err(Error::DimensionMismatch(format!(
            "{}·{} vs {}·{}",
            a.dim_c, a.dim_r, b.dim_c, b.dim_r
        )));
    }
    let q = &b.iso.dagger() * &a.iso;
    let direct = factor_pure_tensor(&q, a.dim_c, a.dim_r, tol)?;
    match direct {
        Ok((clock_factor, rest_factor)) => Ok(TpsEquivalence::Equivalent {
            clock_factor,
            rest_factor,
            swapped: false,
        }),
        Err(ratio) => {
            if a.dim_c == a.dim_r {
                let swapped_q = &swap_factors(a.dim_c) * &q;
                if let Ok((clock_factor, rest_factor)) =
                    factor_pure_tensor(&swapped_q, a.dim_c, a.dim_r, tol)?
                {
                    return Ok(TpsEquivalence::Equivalent {
                        clock_factor,
                        rest_factor,
                        swapped: true,
                    });
                }
            }
            Ok(TpsEquivalence::Inequivalent {
                second_singular_ratio: ratio,
            })
        }
    }
}

/// Recovers the TPS induced by a commuting pair of generating observables.
///
/// `t` and `x` must be hermitian, commute, have jointly nondegenerate
/// eigenspaces, and their eigenvalue grid must be a full product set: every
/// (t-value, x-value) pair occurs exactly once. The product basis is the
/// joint eigenbasis ordered by (t-value, x-value); each vector's phase makes
/// its largest-magnitude entry real-positive. In the recovered TPS, t acts
/// as T_c ⊗ I and x as I ⊗ X.
pub fn tps_from_generating_observables(t: &ComplexMatrix, x: &ComplexMatrix) -> Result<Tps> {
    if !t.is_square() || t.rows() != x.rows() || !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            t.rows(),
            t.cols(),
            x.rows(),
            x.cols()
        )));
    }
    t.check_hermitian(tol::HERMITIAN_GATE)?;
    x.check_hermitian(tol::HERMITIAN_GATE)?;
    let commutator = &(t * x) - &(x * t);
    let dev = commutator.norm_max();
    if dev > tol::COMMUTE {
        return Err(Error::NotCommuting(dev));
    }

    let dim = t.rows();
    let (pairs, vectors) = joint_hermitian_eigen(t, x, tol::EIG_CLUSTER)?;

    // Classify each column by its clustered (t, x) eigenvalue pair.
    let t_vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let x_vals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let t_classes = crate::linalg::cluster_class_of(&t_vals, tol::EIG_CLUSTER);
    let x_classes = crate::linalg::cluster_class_of(&x_vals, tol::EIG_CLUSTER);
    let n_t = t_classes.iter().max().map_or(0, |m| m + 1);
    let n_x = x_classes.iter().max().map_or(0, |m| m + 1);

    let mut cell_of = vec![usize::MAX; n_t * n_x];
    for col in 0..dim {
        let cell = t_classes[col] * n_x + x_classes[col];
        if cell_of[cell] != usize::MAX {
            return Err(Error::DegenerateJointSpectrum(format!(
                "joint eigenvalue (t={:.6}, x={:.6}) has a multidimensional eigenspace",
                t_vals[col], x_vals[col]
            )));
        }
        cell_of[cell] = col;
    }
    if n_t * n_x != dim {
        return Err(Error::NotProductGrid(format!(
            "{n_t} t-values × {n_x} x-values cannot tile dimension {dim}"
        )));
    }

    // Columns in (t-class, x-class) order, phase-fixed.
    let columns: Vec<ComplexMatrix> = cell_of
        .iter()
        .map(|&col| {
            let v = vectors.column(col);
            let lead = v
                .entries()
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty column");
            v.scale(lead.conj() / lead.norm())
        })
        .collect();
    Tps::new(n_t, n_x, ComplexMatrix::from_columns(&columns)?)
}

/// The amplitude table ψ(τ, x) of a global state against a TPS's product
/// basis: rows are clock readings, columns rest indices. Squared column
/// sums of a row give the probability of that clock reading.
pub fn extract_wavefunction(psi: &TimelessState, tps: &Tps) -> Result<ComplexMatrix> {
    let dim = tps.dim_c * tps.dim_r;
    if psi.vector().rows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} against a TPS of dimension {dim}",
            psi.vector().rows()
        )));
    }
    let amps = &tps.iso.dagger() * psi.vector();
    Ok(ComplexMatrix::from_fn(tps.dim_c, tps.dim_r, |tau, k| {
        amps[(tau * tps.dim_r + k, 0)]
    }))
}
