//! Spectral decompositions, bridged to nalgebra.
//!
//! The bridge stays behind this module: the rest of the crate only sees
//! [`ComplexMatrix`] in and out. Unitary matrices are diagonalized through
//! the joint eigenbasis of their commuting hermitian and antihermitian
//! parts, which reuses the same machinery as the generating-observables
//! recovery.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

use super::matrix::{Complex64, ComplexMatrix};

fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_na(m: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a hermitian matrix: real eigenvalues ascending and
/// the matching orthonormal eigenvector columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    h.check_hermitian(tol::HERMITIAN_GATE)?;
    // Symmetrize first so the solver sees an exactly self-adjoint input.
    let sym = h + &h.dagger();
    let se = to_na(&sym.scale(Complex64::new(0.5, 0.0))).symmetric_eigen();
    let n = h.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Groups sorted-adjacent values into clusters whose members lie within
/// `tol` of some other member (transitive closure). Returns one cluster of
/// member indices per distinct value, ordered ascending by centroid.
pub(crate) fn cluster_real(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        match clusters.last_mut() {
            Some(cl) if (values[idx] - values[*cl.last().unwrap()]).abs() <= tol => cl.push(idx),
            _ => clusters.push(vec![idx]),
        }
    }
    clusters
}

/// Maps each value to the index of its cluster; clusters are ordered
/// ascending by value.
pub fn cluster_class_of(values: &[f64], tol: f64) -> Vec<usize> {
    let mut class = vec![0usize; values.len()];
    for (ci, cluster) in cluster_real(values, tol).iter().enumerate() {
        for &i in cluster {
            class[i] = ci;
        }
    }
    class
}

/// Joint eigenbasis of two commuting hermitian matrices.
///
/// Diagonalizes `a`, then refines every clustered eigenspace of `a` against
/// `b`. Returns the per-column eigenvalue pairs `(a_value, b_value)` and the
/// orthonormal joint eigenvector columns, ordered by `a` value then `b`
/// value. The caller is responsible for the commutation gate.
pub fn joint_hermitian_eigen(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cluster_tol: f64,
) -> Result<(Vec<(f64, f64)>, ComplexMatrix)> {
    if !a.is_square() || a.rows() != b.rows() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "joint eigenbasis of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let (avals, avecs) = hermitian_eigen(a)?;
    let mut pairs = Vec::with_capacity(n);
    let mut columns: Vec<ComplexMatrix> = Vec::with_capacity(n);
    for cluster in cluster_real(&avals, cluster_tol) {
        let k = cluster.len();
        let a_rep = cluster.iter().map(|&i| avals[i]).sum::<f64>() / k as f64;
        let block_basis = ComplexMatrix::from_fn(n, k, |i, j| avecs[(i, cluster[j])]);
        // b restricted to the eigenspace; hermitian because [a, b] = 0.
        let b_block = &(&block_basis.dagger() * b) * &block_basis;
        let b_sym = (&b_block + &b_block.dagger()).scale(Complex64::new(0.5, 0.0));
        let se = to_na(&b_sym).symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| se.eigenvalues[x].total_cmp(&se.eigenvalues[y]));
        let refined = &block_basis * &from_na(&se.eigenvectors);
        for &j in &order {
            pairs.push((a_rep, se.eigenvalues[j]));
            columns.push(refined.column(j));
        }
    }
    Ok((pairs, ComplexMatrix::from_columns(&columns)?))
}

/// Eigendecomposition of a unitary matrix: eigenvalues on the unit circle
/// and orthonormal eigenvector columns. Computed as the joint eigenbasis of
/// the hermitian parts (U + U†)/2 and (U − U†)/2i.
pub fn unitary_eigen(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    u.check_unitary(tol::UNITARY_GATE)?;
    let re_part = (u + &u.dagger()).scale(Complex64::new(0.5, 0.0));
    let im_part = (u - &u.dagger()).scale(Complex64::new(0.0, -0.5));
    let (pairs, vectors) = joint_hermitian_eigen(&re_part, &im_part, tol::EIG_CLUSTER)?;
    let values = pairs
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    Ok((values, vectors))
}

/// Eigendecomposition of the bordered matrix [[0, M], [M†, 0]], whose
/// positive eigenvalues are M's singular values and whose eigenvectors
/// carry the left/right singular vectors in the two blocks
/// (Jordan–Wielandt). This keeps zero singular values at the
/// machine-precision floor, which the realignment-based product tests rely
/// on.
fn bordered_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (r, c) = (m.rows(), m.cols());
    let zero = Complex64::new(0.0, 0.0);
    let bordered = ComplexMatrix::from_fn(r + c, r + c, |i, j| {
        if i < r && j >= r {
            m[(i, j - r)]
        } else if i >= r && j < r {
            m[(j, i - r)].conj()
        } else {
            zero
        }
    });
    let se = to_na(&bordered).symmetric_eigen();
    let mut order: Vec<usize> = (0..r + c).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(r + c, r + c, |i, j| se.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let k = m.rows().min(m.cols());
    let (values, _) = bordered_eigen(m);
    values.iter().take(k).map(|&v| v.max(0.0)).collect()
}

/// Full singular value decomposition `m = U diag(s) V†`; returns `(U, s, V†)`
/// with `s` descending. Columns belonging to zero singular values are
/// meaningful only up to the bordered kernel; they never contribute to the
/// reconstruction.
pub fn svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (r, c) = (m.rows(), m.cols());
    let k = r.min(c);
    let (values, vectors) = bordered_eigen(m);
    let s: Vec<f64> = values.iter().take(k).map(|&v| v.max(0.0)).collect();
    let scale = Complex64::new(2.0_f64.sqrt(), 0.0);
    let u = ComplexMatrix::from_fn(r, k, |i, t| vectors[(i, t)] * scale);
    let v_t = ComplexMatrix::from_fn(k, c, |t, j| vectors[(r + j, t)].conj() * scale);
    (u, s, v_t)
}

/// Unitary QR factor with the phase convention that makes the map
/// Haar-distributed for gaussian inputs: Q is multiplied by the phases of
/// R's diagonal.
pub fn qr_unitary_factor(m: &ComplexMatrix) -> ComplexMatrix {
    assert!(m.is_square());
    let qr = to_na(m).qr();
    let r = qr.r();
    let n = m.rows();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() < f64::MIN_POSITIVE {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let q = from_na(&qr.q());
    &q * &ComplexMatrix::diagonal(&phases)
}
