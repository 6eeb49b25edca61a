use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{JetMap, MultiIndex, Polynomial};
use crate::linalg::{self, CMatrix};
use crate::resonance::{monomial_value, SupportSet};

/// Above this many unknowns the system is solved by fixed-point iteration on
/// its nilpotent part instead of a dense factorization.
pub const DENSE_LIMIT: usize = 512;

/// Coefficients `(component, exponent)` of degree `k` that a degree-`k`
/// correction must remove. For `k = 1` only strictly-lower linear entries
/// are considered; the diagonal is never touched.
pub fn killed_set(support: &SupportSet, k: usize) -> Vec<(usize, MultiIndex)> {
    let n = support.dim();
    let mut out = Vec::new();
    for j in 0..n {
        if k == 1 {
            for l in 0..j {
                let p = MultiIndex::unit(n, l);
                if !support.contains(j, &p) {
                    out.push((j, p));
                }
            }
        } else {
            for p in MultiIndex::all_of_degree(n, k) {
                if !support.contains(j, &p) {
                    out.push((j, p));
                }
            }
        }
    }
    out
}

/// Sparse columns of `h -> u0 h - h ∘ u0` restricted to `killed`, in the
/// basis `z^p e_j`.
fn operator_columns(u0: &CMatrix, killed: &[(usize, MultiIndex)]) -> Vec<Vec<(usize, Complex64)>> {
    let n = u0.nrows();
    let k = killed.first().map_or(1, |(_, p)| p.degree());
    let row_of: std::collections::HashMap<(usize, &MultiIndex), usize> =
        killed.iter().enumerate().map(|(i, (j, p))| ((*j, p), i)).collect();
    let linear: Vec<Polynomial> = (0..n)
        .map(|l| {
            let mut q = Polynomial::zero(n);
            for m in 0..n {
                q.add_term(MultiIndex::unit(n, m), u0[(l, m)]);
            }
            q
        })
        .collect();
    killed
        .iter()
        .map(|(j, p)| {
            let mut col: std::collections::BTreeMap<usize, Complex64> = Default::default();
            for i in 0..n {
                let c = u0[(i, *j)];
                if c != Complex64::default() {
                    if let Some(&r) = row_of.get(&(i, p)) {
                        *col.entry(r).or_default() += c;
                    }
                }
            }
            let mut mono = Polynomial::zero(n);
            mono.add_term(p.clone(), Complex64::new(1.0, 0.0));
            for (q, c) in mono.substitute(&linear, k).terms() {
                if let Some(&r) = row_of.get(&(*j, q)) {
                    *col.entry(r).or_default() -= *c;
                }
            }
            col.into_iter().filter(|(_, c)| *c != Complex64::default()).collect()
        })
        .collect()
}

/// Dense matrix of the homological operator on the killed coefficients.
pub fn homological_matrix(u0: &CMatrix, killed: &[(usize, MultiIndex)]) -> CMatrix {
    let m = killed.len();
    let mut a = CMatrix::zeros(m, m);
    for (c, col) in operator_columns(u0, killed).into_iter().enumerate() {
        for (r, v) in col {
            a[(r, c)] = v;
        }
    }
    a
}

#[derive(Clone, Debug)]
pub struct HomologicalSolution {
    /// Degree-`k` correction `h`.
    pub correction: JetMap,
    pub killed: usize,
    pub condition: f64,
}

fn near_resonance(u0: &CMatrix, killed: &[(usize, MultiIndex)], condition: f64) -> Error {
    let betas: Vec<Complex64> = (0..u0.nrows()).map(|i| u0[(i, i)]).collect();
    let (j, p, gap) = killed
        .iter()
        .map(|(j, p)| (*j, p, (betas[*j] - monomial_value(&betas, p)).norm()))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("non-empty killed set");
    Error::NearResonance {
        component: j + 1,
        exponent: p.exponents().to_vec(),
        gap,
        condition,
    }
}

/// Solves `Π(u0 h - h ∘ u0) = -Π(rhs)` for a homogeneous degree-`k`
/// correction `h` supported on the killed coefficients, where `Π` projects
/// onto them. `u0` must be lower triangular. Fails with a near-resonance
/// error when the system's condition number exceeds `cond_threshold`.
pub fn homological_solve(
    u0: &CMatrix,
    k: usize,
    rhs: &JetMap,
    support: &SupportSet,
    order: usize,
    cond_threshold: f64,
) -> Result<HomologicalSolution> {
    let n = u0.nrows();
    if !linalg::is_lower_triangular(u0) {
        return Err(Error::InvalidArgument("homological operator needs a lower-triangular linear part".into()));
    }
    if k == 0 || k > order {
        return Err(Error::DegreeOutOfRange { degree: k, order });
    }
    let killed = killed_set(support, k);
    let mut correction = JetMap::zero(n, order)?;
    if killed.is_empty() {
        return Ok(HomologicalSolution {
            correction,
            killed: 0,
            condition: 1.0,
        });
    }
    let m = killed.len();
    let b = DVector::from_iterator(m, killed.iter().map(|(j, p)| -rhs.coeff(*j, p)));
    let cols = operator_columns(u0, &killed);
    let diag: Vec<Complex64> = (0..m)
        .map(|c| cols[c].iter().find(|(r, _)| *r == c).map_or(Complex64::default(), |(_, v)| *v))
        .collect();

    let (x, condition) = if linalg::is_diagonal(u0) || m > DENSE_LIMIT {
        let min = diag.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        let max = diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let condition = if min == 0.0 { f64::INFINITY } else { max / min };
        if condition.is_nan() || condition > cond_threshold {
            return Err(near_resonance(u0, &killed, condition));
        }
        // The off-diagonal part is nilpotent, so Jacobi sweeps terminate.
        let mut x = DVector::<Complex64>::zeros(m);
        for _ in 0..=m {
            let mut next = b.clone();
            for (c, col) in cols.iter().enumerate() {
                if x[c] == Complex64::default() {
                    continue;
                }
                for (r, v) in col {
                    if *r != c {
                        next[*r] -= *v * x[c];
                    }
                }
            }
            for i in 0..m {
                next[i] /= diag[i];
            }
            let done = next == x;
            x = next;
            if done {
                break;
            }
        }
        (x, condition)
    } else {
        let a = homological_matrix(u0, &killed);
        let condition = linalg::condition_number(&a);
        if condition.is_nan() || condition > cond_threshold {
            return Err(near_resonance(u0, &killed, condition));
        }
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| near_resonance(u0, &killed, f64::INFINITY))?;
        (x, condition)
    };
    for (i, (j, p)) in killed.iter().enumerate() {
        correction.set(*j, p.clone(), x[i])?;
    }
    Ok(HomologicalSolution {
        correction,
        killed: m,
        condition,
    })
}
