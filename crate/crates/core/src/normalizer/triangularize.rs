use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::resonance::spectral_clusters;

/// Lower-triangular form `t = s_inv * l * s` of a linear part.
#[derive(Clone, Debug)]
pub struct Triangularization {
    pub t: CMatrix,
    pub s: CMatrix,
    pub s_inv: CMatrix,
}

fn canonical_order(values: &[Complex64], tol: f64) -> Vec<usize> {
    spectral_clusters(values, tol).into_iter().flatten().collect()
}

fn check_contraction(values: &[Complex64]) -> Result<()> {
    for v in values {
        let m = v.norm();
        if !m.is_finite() || m == 0.0 || m >= 1.0 {
            return Err(Error::NotContraction {
                value: format!("{v}"),
                modulus: m,
            });
        }
    }
    Ok(())
}

/// Swaps diagonal entries `k` and `k + 1` of an upper-triangular `t` with a
/// unitary rotation, accumulating it into `q`.
fn swap_adjacent(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x = t[(k, k + 1)];
    let d = b - a;
    let norm = (x.norm_sqr() + d.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    // First column is the eigenvector (x, b - a) of the 2x2 block for `b`.
    let n = t.nrows();
    let mut u = CMatrix::identity(n, n);
    u[(k, k)] = x / norm;
    u[(k + 1, k)] = d / norm;
    u[(k, k + 1)] = -d.conj() / norm;
    u[(k + 1, k + 1)] = x.conj() / norm;
    *t = u.adjoint() * &*t * &u;
    *q = &*q * &u;
    t[(k + 1, k)] = Complex64::default();
}

/// Brings `l` to lower-triangular form with its eigenvalues along the
/// diagonal by non-increasing modulus, equal eigenvalues adjacent.
///
/// Lower-triangular inputs that are already ordered are returned untouched;
/// unordered diagonal inputs are permuted. Everything else goes through a
/// complex Schur form whose eigenvalues are reordered by adjacent unitary
/// swaps and then flipped from upper to lower triangular.
pub fn triangularize(l: &CMatrix, tol_res: f64) -> Result<Triangularization> {
    let n = l.nrows();
    if n == 0 || l.ncols() != n {
        return Err(Error::InvalidDimensions(format!(
            "linear part must be square and non-empty, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    if linalg::is_lower_triangular(l) {
        let diag: Vec<Complex64> = (0..n).map(|i| l[(i, i)]).collect();
        check_contraction(&diag)?;
        let order = canonical_order(&diag, tol_res);
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            let id = CMatrix::identity(n, n);
            return Ok(Triangularization {
                t: l.clone(),
                s: id.clone(),
                s_inv: id,
            });
        }
        if linalg::is_diagonal(l) {
            // Column i of s is e_{order[i]}.
            let s = CMatrix::from_fn(n, n, |r, c| {
                if r == order[c] {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::default()
                }
            });
            let s_inv = s.transpose();
            let t = CMatrix::from_fn(n, n, |r, c| if r == c { diag[order[r]] } else { Complex64::default() });
            return Ok(Triangularization { t, s, s_inv });
        }
    }

    let schur = Schur::try_new(l.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let (mut q, mut t) = schur.unpack();
    let eig: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    check_contraction(&eig)?;
    let target: Vec<Complex64> = canonical_order(&eig, tol_res).into_iter().map(|i| eig[i]).collect();
    // Upper form wants the reverse order; the final flip restores it.
    for pos in 0..n {
        let want = target[n - 1 - pos];
        let found = (pos..n)
            .min_by(|&i, &j| (t[(i, i)] - want).norm().total_cmp(&(t[(j, j)] - want).norm()))
            .expect("non-empty range");
        for k in (pos..found).rev() {
            swap_adjacent(&mut t, &mut q, k);
        }
    }
    let flip = |i: usize| n - 1 - i;
    let t_low = CMatrix::from_fn(n, n, |r, c| if c > r { Complex64::default() } else { t[(flip(r), flip(c))] });
    let s = CMatrix::from_fn(n, n, |r, c| q[(r, flip(c))]);
    let s_inv = s.adjoint();

    let residual = linalg::max_abs(&(&s_inv * l * &s - &t_low));
    let scale = linalg::max_abs(l).max(1.0);
    if residual > 1e-10 * scale {
        return Err(Error::EigenFailure(format!(
            "similarity residual {residual:.3e} after reordering"
        )));
    }
    Ok(Triangularization { t: t_low, s, s_inv })
}
