use std::collections::BTreeSet;

use num_complex::Complex64;

use super::{ResonanceTable, Spectrum};
use crate::linalg::CMatrix;

/// Sparsity pattern of the lower-triangular linear group: entry `(i, j)`
/// may be nonzero iff `i == j`, or `i > j` and the eigenvalue of row `i`
/// depends on the eigenvalue of row `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternMatrix {
    mask: Vec<Vec<bool>>,
}

impl PatternMatrix {
    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.mask[i][j]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.mask
    }

    /// Largest entry of `m` outside the pattern.
    pub fn max_violation(&self, m: &CMatrix) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if !self.mask[i][j] {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Renders rows as `*` / `0` strings, e.g. `["*00", "0*0", "*0*"]`.
    pub fn to_strings(&self) -> Vec<String> {
        self.mask
            .iter()
            .map(|r| r.iter().map(|&b| if b { '*' } else { '0' }).collect())
            .collect()
    }
}

pub fn g1_pattern(t: &ResonanceTable, s: &Spectrum) -> PatternMatrix {
    let n = s.dim();
    let mask = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i == j || (i > j && t.dependence[s.group_of(i)][s.group_of(j)]))
                .collect()
        })
        .collect();
    PatternMatrix { mask }
}

/// The coordinate subspaces `V_{j,k}` preserved by the pattern group, as
/// 0-based index sets. `V_{0,0}` is the whole space and is not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagBases {
    dim: usize,
    spaces: Vec<Vec<BTreeSet<usize>>>,
}

impl FlagBases {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `V_{j,k}` for group `j` (0-based) and `k` in `0..n_j`.
    pub fn space(&self, group: usize, k: usize) -> &BTreeSet<usize> {
        &self.spaces[group][k]
    }

    pub fn groups(&self) -> &[Vec<BTreeSet<usize>>] {
        &self.spaces
    }

    /// Every `(group, k, indices)` triple in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<usize>)> {
        self.spaces
            .iter()
            .enumerate()
            .flat_map(|(j, ks)| ks.iter().enumerate().map(move |(k, v)| (j, k, v)))
    }

    /// Whether `m` maps every `V_{j,k}` into itself, up to `tol`.
    pub fn preserved_by(&self, m: &CMatrix, tol: f64) -> bool {
        self.iter().all(|(_, _, v)| {
            v.iter().all(|&col| {
                (0..self.dim).all(|row| v.contains(&row) || m[(row, col)].norm() <= tol)
            })
        })
    }
}

pub fn flag_spaces(t: &ResonanceTable, s: &Spectrum) -> FlagBases {
    let n = s.dim();
    let groups = s.groups();
    let mut spaces: Vec<Vec<BTreeSet<usize>>> = Vec::with_capacity(groups.len());
    for (j, g) in groups.iter().enumerate() {
        let mut base: BTreeSet<usize> = (0..n).collect();
        for &l in &t.dependence_indices[j] {
            base = base.intersection(&spaces[l][0]).copied().collect();
        }
        let per_k = (0..g.len)
            .map(|k| {
                let removed = g.start..(g.start + g.len - k);
                base.iter().copied().filter(|i| !removed.contains(i)).collect()
            })
            .collect();
        spaces.push(per_k);
    }
    FlagBases { dim: n, spaces }
}

/// A matrix with the given pattern; allowed entries filled by `entry`.
pub fn matrix_on_pattern(
    p: &PatternMatrix,
    mut entry: impl FnMut(usize, usize) -> Complex64,
) -> CMatrix {
    let n = p.dim();
    CMatrix::from_fn(n, n, |i, j| {
        if p.allows(i, j) {
            entry(i, j)
        } else {
            Complex64::default()
        }
    })
}
