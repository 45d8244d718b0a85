//! Row-major dense complex matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type Complex64 = Complex<f64>;

/// Which factor to keep when tracing out the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Clock,
    Rest,
}

/// Dense complex matrix, row-major. Operators are square; state vectors are
/// single-column matrices.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Wire format: `{"rows":n,"cols":m,"entries":[[re,im],...]}` row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        ComplexMatrix::new(
            j.rows,
            j.cols,
            j.entries.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        )
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadDimension(format!("{rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::BadDimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let m = ComplexMatrix { rows, cols, entries };
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    /// Real entries, row-major.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count mismatch");
        ComplexMatrix {
            rows,
            cols,
            entries: data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Standard basis column vector |k⟩ of the given dimension.
    pub fn basis_vector(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        Self::from_fn(dim, 1, |i, _| {
            if i == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_column(data: Vec<Complex64>) -> Self {
        let rows = data.len();
        ComplexMatrix {
            rows,
            cols: 1,
            entries: data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_column(&self) -> bool {
        self.cols == 1
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Column `j` as a single-column matrix.
    pub fn column(&self, j: usize) -> ComplexMatrix {
        assert!(j < self.cols);
        ComplexMatrix::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexMatrix]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::BadDimension("no columns".into()));
        }
        let rows = columns[0].rows;
        for c in columns {
            if !c.is_column() || c.rows != rows {
                return Err(Error::DimensionMismatch("ragged column set".into()));
            }
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][(i, 0)]))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        Self::from_fn(ra * rb, ca * cb, |i, j| {
            self[(i / rb, j / cb)] * other[(i % rb, j % cb)]
        })
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * c)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm; for column vectors this is the ℓ2 norm.
    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩ for column vectors.
    pub fn inner(&self, other: &ComplexMatrix) -> Complex64 {
        assert!(self.is_column() && other.is_column() && self.rows == other.rows);
        (0..self.rows)
            .map(|i| self[(i, 0)].conj() * other[(i, 0)])
            .sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖M†M − I‖_max.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.dagger() * self;
        gram.max_abs_diff(&ComplexMatrix::identity(self.rows))
    }

    /// ‖M − M†‖_max.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.dagger())
    }

    pub fn check_unitary(&self, gate: f64) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > gate {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }

    pub fn check_hermitian(&self, gate: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > gate {
            return Err(Error::NotHermitian(dev));
        }
        Ok(())
    }

    pub fn check_unit_column(&self) -> Result<()> {
        if !self.is_column() {
            return Err(Error::BadDimension(format!(
                "{}x{} is not a column vector",
                self.rows, self.cols
            )));
        }
        let norm = self.norm_fro();
        if (norm - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }

    /// Integer power; negative exponents take the adjoint, so they are
    /// inverse powers only for unitary matrices.
    pub fn unitary_power(&self, k: i64) -> ComplexMatrix {
        assert!(self.is_square());
        let base = if k < 0 { self.dagger() } else { self.clone() };
        let mut acc = ComplexMatrix::identity(self.rows);
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Realignment (operator-Schmidt reshuffle) of a square matrix on a
    /// `dim_c · dim_r` space: output is `dim_c² × dim_r²` with entry at
    /// `(i·dim_c + i′, j·dim_r + j′)` equal to the input entry at
    /// `((i,j), (i′,j′))`. A matrix is a pure tensor A⊗B iff its
    /// realignment has rank one.
    pub fn realign(&self, dim_c: usize, dim_r: usize) -> Result<ComplexMatrix> {
        self.realign_blocks((dim_c, dim_r), (dim_c, dim_r))
    }

    /// General realignment with independent row and column splits; the row
    /// count must factor as `row_split.0 · row_split.1` and likewise for
    /// columns. Realigning the output with splits `(a, a′), (b, b′)`
    /// recovers the input, making the reshuffle an involution.
    pub fn realign_blocks(
        &self,
        row_split: (usize, usize),
        col_split: (usize, usize),
    ) -> Result<ComplexMatrix> {
        let (a, b) = row_split;
        let (a2, b2) = col_split;
        if a * b != self.rows || a2 * b2 != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot split {}x{} as ({a}·{b})x({a2}·{b2})",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(a * a2, b * b2, |p, q| {
            let (i, i2) = (p / a2, p % a2);
            let (j, j2) = (q / b2, q % b2);
            self[(i * b + j, i2 * b2 + j2)]
        }))
    }

    /// Partial trace over the discarded factor of a `dim_c · dim_r` square
    /// matrix.
    pub fn partial_trace(&self, dim_c: usize, dim_r: usize, keep: Keep) -> Result<ComplexMatrix> {
        if !self.is_square() || self.rows != dim_c * dim_r {
            return Err(Error::DimensionMismatch(format!(
                "partial trace of {}x{} with splits {dim_c}·{dim_r}",
                self.rows, self.cols
            )));
        }
        Ok(match keep {
            Keep::Clock => Self::from_fn(dim_c, dim_c, |i, i2| {
                (0..dim_r).map(|j| self[(i * dim_r + j, i2 * dim_r + j)]).sum()
            }),
            Keep::Rest => Self::from_fn(dim_r, dim_r, |j, j2| {
                (0..dim_c).map(|i| self[(i * dim_r + j, i * dim_r + j2)]).sum()
            }),
        })
    }

    /// Projector |v⟩⟨v| of a column vector.
    pub fn projector(&self) -> ComplexMatrix {
        assert!(self.is_column());
        self * &self.dagger()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out[(i, j)] + a * rhs[(k, j)];
                    out[(i, j)] = v;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    // Test-local matmul over raw entries, independent of `Mul`.
    fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = c(0.0, 0.0);
                for k in 0..a.cols() {
                    s += a[(i, k)] * b[(k, j)];
                }
                out[i * b.cols() + j] = s;
            }
        }
        out
    }

    fn pseudo_random(rows: usize, cols: usize, salt: u64) -> ComplexMatrix {
        // Cheap deterministic fill, good enough for algebraic identities.
        let mut state = salt.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn kron_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_sigma_x_fixes_bell_like_state() {
        let u = sigma_x().kron(&sigma_x());
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = ComplexMatrix::from_real(4, 1, &[0.0, s, s, 0.0]);
        let mapped = &u * &psi;
        assert!(mapped.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn kron_mixed_product_rule() {
        for salt in 0..4 {
            let a = pseudo_random(2, 2, salt);
            let b = pseudo_random(2, 2, salt + 10);
            let cc = pseudo_random(2, 2, salt + 20);
            let d = pseudo_random(2, 2, salt + 30);
            let lhs = &a.kron(&b) * &cc.kron(&d);
            let ac = ComplexMatrix::new(2, 2, naive_mul(&a, &cc)).unwrap();
            let bd = ComplexMatrix::new(2, 2, naive_mul(&b, &d)).unwrap();
            let rhs = ac.kron(&bd);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn dagger_identity_and_hermitian_product() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(i3.dagger(), i3);
        let u = sigma_x().kron(&sigma_x());
        assert!(u.dagger().max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn dagger_is_an_involution() {
        let m = pseudo_random(3, 5, 7);
        assert!(m.dagger().dagger().max_abs_diff(&m) == 0.0);
    }

    #[test]
    fn realign_of_pure_tensor_has_rank_one() {
        for salt in 0..4 {
            let a = pseudo_random(2, 2, salt);
            let b = pseudo_random(2, 2, salt + 100);
            let r = a.kron(&b).realign(2, 2).unwrap();
            let s = crate::linalg::singular_values(&r);
            assert!(s[0] > 1e-10);
            for v in &s[1..] {
                assert!(*v < 1e-10, "spurious singular value {v}");
            }
        }
    }

    #[test]
    fn realign_of_swap_has_four_singular_values() {
        // SWAP on 2x2: |i j⟩ ↦ |j i⟩.
        let swap = ComplexMatrix::from_fn(4, 4, |p, q| {
            let (i, j) = (p / 2, p % 2);
            let (k, l) = (q / 2, q % 2);
            if i == l && j == k {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let s = crate::linalg::singular_values(&swap.realign(2, 2).unwrap());
        assert_eq!(s.iter().filter(|v| **v > 1e-10).count(), 4);
        for v in &s {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn realign_is_an_involution_up_to_index_bookkeeping() {
        let m = pseudo_random(6, 6, 3);
        let r = m.realign(2, 3).unwrap();
        let back = r.realign_blocks((2, 2), (3, 3)).unwrap();
        assert!(back.max_abs_diff(&m) == 0.0);
    }

    #[test]
    fn kron_is_associative() {
        let a = pseudo_random(2, 2, 1);
        let b = pseudo_random(3, 3, 2);
        let cc = pseudo_random(2, 2, 3);
        let lhs = a.kron(&b).kron(&cc);
        let rhs = a.kron(&b.kron(&cc));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_c = pseudo_random(2, 2, 11);
        let rho_r = pseudo_random(3, 3, 12);
        let got = rho_c.kron(&rho_r).partial_trace(2, 3, Keep::Rest).unwrap();
        let want = rho_r.scale(rho_c.trace());
        assert!(got.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn partial_trace_of_bell_projector_is_maximally_mixed() {
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = ComplexMatrix::from_real(4, 1, &[0.0, s, s, 0.0]);
        let rho = psi.projector();
        let reduced = rho.partial_trace(2, 2, Keep::Rest).unwrap();
        // Direct 4x4 computation: both basis blocks contribute 1/2.
        let want = ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!(reduced.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = pseudo_random(6, 6, 42);
        // Entrywise-sum oracle for the full trace.
        let full: Complex64 = (0..6).map(|i| rho[(i, i)]).sum();
        for keep in [Keep::Clock, Keep::Rest] {
            let t = rho.partial_trace(2, 3, keep).unwrap().trace();
            assert!((t - full).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_split() {
        let rho = pseudo_random(6, 6, 1);
        assert!(matches!(
            rho.partial_trace(4, 2, Keep::Rest),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_round_trip_matches_wire_schema() {
        let m = ComplexMatrix::new(1, 2, vec![c(1.0, -2.0), c(0.0, 0.5)]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"rows":1,"cols":2,"entries":[[1.0,-2.0],[0.0,0.5]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_wrong_entry_count() {
        let bad = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn new_rejects_non_finite_entries() {
        let err = ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 0 }));
    }
}
