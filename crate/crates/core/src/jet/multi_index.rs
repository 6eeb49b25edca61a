use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial `z^p = z_1^{p_1} ... z_n^{p_n}`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vectors in descending lexicographic order, so that `z_1` precedes `z_2`
/// and `z_1^2` precedes `z_1 z_2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn zero(dim: usize) -> Self {
        Self { exps: vec![0; dim] }
    }

    /// The unit exponent `e_k` (0-based `k`).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[k] = 1;
        Self { exps }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn is_zero(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Returns `Some(k)` when this is `e_k`.
    pub fn as_unit(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.exps.iter().position(|&e| e == 1)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    /// Component-wise `self <= other`.
    pub fn dominated_by(&self, other: &MultiIndex) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// Largest variable index (0-based) with a nonzero exponent.
    pub fn max_variable(&self) -> Option<usize> {
        self.exps.iter().rposition(|&e| e > 0)
    }

    /// All nonzero indices `q` with `q <= self` component-wise, in graded order.
    pub fn nonzero_divisors(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (k, &e) in self.exps.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for q in &out {
                for i in 0..=e {
                    let mut q2 = q.clone();
                    q2.exps[k] = i;
                    next.push(q2);
                }
            }
            out = next;
        }
        out.retain(|q| !q.is_zero());
        out.sort();
        out
    }

    /// All exponent vectors of total degree `degree` in `dim` variables, in
    /// graded order.
    pub fn all_of_degree(dim: usize, degree: usize) -> Vec<MultiIndex> {
        fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if k + 1 == cur.len() {
                cur[k] = left;
                out.push(MultiIndex::new(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[k] = e;
                rec(k + 1, left - e, cur, out);
            }
            cur[k] = 0;
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        let mut cur = vec![0u32; dim];
        rec(0, degree as u32, &mut cur, &mut out);
        out
    }

    /// All exponent vectors with `1 <= |p| <= max_degree`, in graded order.
    pub fn all_up_to_degree(dim: usize, max_degree: usize) -> Vec<MultiIndex> {
        (1..=max_degree)
            .flat_map(|d| MultiIndex::all_of_degree(dim, d))
            .collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(exps: Vec<u32>) -> Self {
        Self::new(exps)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(exps: [u32; N]) -> Self {
        Self::new(exps.to_vec())
    }
}
