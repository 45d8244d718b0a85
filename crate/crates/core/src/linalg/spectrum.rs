//! Eigenvalue multisets and their comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

use super::decomp::{hermitian_eigen, unitary_eigen};
use super::matrix::{Complex64, ComplexMatrix};

/// Eigenvalue multiset: distinct values sorted lexicographically by
/// (re, im), with the multiplicity of each. Multiplicities come from
/// clustering eigenvalues closer than the clustering tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct SpectrumMultiset {
    values: Vec<Complex64>,
    multiplicities: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    values: Vec<[f64; 2]>,
    multiplicities: Vec<usize>,
}

impl From<SpectrumMultiset> for SpectrumJson {
    fn from(s: SpectrumMultiset) -> Self {
        SpectrumJson {
            values: s.values.iter().map(|z| [z.re, z.im]).collect(),
            multiplicities: s.multiplicities,
        }
    }
}

impl TryFrom<SpectrumJson> for SpectrumMultiset {
    type Error = Error;

    fn try_from(j: SpectrumJson) -> Result<Self> {
        if j.values.len() != j.multiplicities.len() {
            return Err(Error::LengthMismatch(
                "spectrum values vs multiplicities".into(),
            ));
        }
        Ok(SpectrumMultiset {
            values: j.values.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            multiplicities: j.multiplicities,
        })
    }
}

fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl SpectrumMultiset {
    /// Clusters raw eigenvalues (transitive closure of the `cluster_tol`
    /// neighborhood relation) into a multiset of centroids.
    pub fn from_eigenvalues(eigenvalues: &[Complex64], cluster_tol: f64) -> Self {
        let n = eigenvalues.len();
        // Union-find over all pairs; n is tiny.
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (eigenvalues[i] - eigenvalues[j]).norm() <= cluster_tol {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_of = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut parent, i);
            if group_of[r] == usize::MAX {
                group_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[group_of[r]].push(i);
        }
        let mut entries: Vec<(Complex64, usize)> = groups
            .iter()
            .map(|g| {
                let sum: Complex64 = g.iter().map(|&i| eigenvalues[i]).sum();
                (sum / g.len() as f64, g.len())
            })
            .collect();
        entries.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        debug_assert!(
            entries.windows(2).all(|w| lex_cmp(&w[0].0, &w[1].0).is_lt()),
            "cluster centroids must be strictly increasing"
        );
        SpectrumMultiset {
            values: entries.iter().map(|e| e.0).collect(),
            multiplicities: entries.iter().map(|e| e.1).collect(),
        }
    }

    /// Real multiset constructor, for hermitian spectra.
    pub fn from_real_eigenvalues(eigenvalues: &[f64], cluster_tol: f64) -> Self {
        let complex: Vec<Complex64> = eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_eigenvalues(&complex, cluster_tol)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Total count, i.e. the dimension of the underlying matrix.
    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Values repeated by multiplicity, in sort order.
    pub fn expand(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dimension());
        for (v, &m) in self.values.iter().zip(&self.multiplicities) {
            out.extend(std::iter::repeat_n(*v, m));
        }
        out
    }
}

/// Eigenvalue multiset of a unitary matrix; every eigenvalue must land on
/// the unit circle within the unit-circle tolerance.
pub fn spectrum_unitary(u: &ComplexMatrix) -> Result<SpectrumMultiset> {
    let (values, _) = unitary_eigen(u)?;
    for v in &values {
        debug_assert!(
            (v.norm() - 1.0).abs() <= tol::UNIT_CIRCLE,
            "unitary eigenvalue off the circle: {v}"
        );
    }
    Ok(SpectrumMultiset::from_eigenvalues(&values, tol::EIG_CLUSTER))
}

/// Real eigenvalue multiset of a hermitian matrix, ascending.
pub fn spectrum_hermitian(h: &ComplexMatrix) -> Result<SpectrumMultiset> {
    let (values, _) = hermitian_eigen(h)?;
    Ok(SpectrumMultiset::from_real_eigenvalues(&values, tol::EIG_CLUSTER))
}

/// Worst pair distance under greedy nearest-neighbor matching of the
/// expanded multisets; infinite when the dimensions differ.
pub fn spectrum_deviation(a: &SpectrumMultiset, b: &SpectrumMultiset) -> f64 {
    let xs = a.expand();
    let ys = b.expand();
    if xs.len() != ys.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; ys.len()];
    let mut worst: f64 = 0.0;
    for x in &xs {
        let best = ys
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (x - *p).norm().total_cmp(&(x - *q).norm()));
        match best {
            Some((j, y)) => {
                used[j] = true;
                worst = worst.max((x - y).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Whether two multisets match under a pairing with every pair within
/// `tol`.
pub fn spectra_equal(a: &SpectrumMultiset, b: &SpectrumMultiset, tol: f64) -> bool {
    spectrum_deviation(a, b) <= tol
}
