//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// 2-norm condition number `sigma_max / sigma_min`; `inf` when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse with a conditioning guard. Lower-triangular inputs are inverted
/// by forward substitution so the result stays exactly lower triangular.
pub fn checked_inverse(m: &CMatrix, cond_threshold: f64) -> Result<CMatrix> {
    let cond = condition_number(m);
    if !cond.is_finite() {
        return Err(Error::SingularLinearPart);
    }
    if cond > cond_threshold {
        return Err(Error::IllConditioned { condition: cond });
    }
    if is_lower_triangular(m) {
        let id = CMatrix::identity(m.nrows(), m.ncols());
        return m.solve_lower_triangular(&id).ok_or(Error::SingularLinearPart);
    }
    m.clone().lu().try_inverse().ok_or(Error::SingularLinearPart)
}

pub fn is_lower_triangular(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| ((i + 1)..m.ncols()).all(|j| m[(i, j)] == Complex64::default()))
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == Complex64::default()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
