use num_complex::Complex64;

use super::polynomial::PowerCache;
use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Default coefficient comparison tolerance.
pub const DEFAULT_TOL_COEFF: f64 = 1e-10;
/// Condition number above which a linear part is treated as not invertible.
pub const DEFAULT_COND_THRESHOLD: f64 = 1e12;

/// Truncated polynomial map `C^n -> C^n` fixing the origin: an element of
/// the jet group of order `order` when its linear part is invertible.
///
/// Coefficients live in one sparse table per target component, keyed by
/// [`MultiIndex`] in graded order. Absent keys read as zero and constant
/// terms are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMap {
    dim: usize,
    order: usize,
    comps: Vec<Polynomial>,
}

impl JetMap {
    pub fn zero(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidDimensions(format!(
                "dim = {dim}, order = {order}; both must be >= 1"
            )));
        }
        Ok(Self {
            dim,
            order,
            comps: vec![Polynomial::zero(dim); dim],
        })
    }

    pub fn identity(dim: usize, order: usize) -> Result<Self> {
        let mut f = Self::zero(dim, order)?;
        for j in 0..dim {
            f.comps[j] = Polynomial::variable(dim, j);
        }
        Ok(f)
    }

    /// The linear map `z -> m z` as a jet; entry `(j, k)` is the coefficient
    /// of `z_k` in component `j`.
    pub fn from_linear(m: &CMatrix, order: usize) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidDimensions(format!(
                "linear part must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut f = Self::zero(m.nrows(), order)?;
        f.set_linear_part(m);
        Ok(f)
    }

    pub fn from_components(order: usize, comps: Vec<Polynomial>) -> Result<Self> {
        let dim = comps.len();
        let mut f = Self::zero(dim, order)?;
        for (j, c) in comps.into_iter().enumerate() {
            if c.nvars() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.nvars(),
                });
            }
            for (p, v) in c.terms() {
                f.set(j, p.clone(), *v)?;
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn component(&self, j: usize) -> &Polynomial {
        &self.comps[j]
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.comps
    }

    pub fn coeff(&self, j: usize, p: &MultiIndex) -> Complex64 {
        self.comps[j].coeff(p)
    }

    fn check_key(&self, j: usize, p: &MultiIndex) -> Result<()> {
        if j >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "component {} out of range for dimension {}",
                j + 1,
                self.dim
            )));
        }
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: p.dim(),
            });
        }
        let d = p.degree();
        if d == 0 || d > self.order {
            return Err(Error::DegreeOutOfRange {
                degree: d,
                order: self.order,
            });
        }
        Ok(())
    }

    /// Sets the coefficient of `z^p` in component `j` (0-based).
    pub fn set(&mut self, j: usize, p: MultiIndex, c: Complex64) -> Result<()> {
        self.check_key(j, &p)?;
        self.comps[j].set(p, c);
        Ok(())
    }

    pub fn add_term(&mut self, j: usize, p: MultiIndex, c: Complex64) -> Result<()> {
        self.check_key(j, &p)?;
        self.comps[j].add_term(p, c);
        Ok(())
    }

    /// All stored `(component, exponent, coefficient)` triples, component
    /// major, graded order within a component.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &MultiIndex, Complex64)> {
        self.comps
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.terms().map(move |(p, v)| (j, p, *v)))
    }

    pub fn nnz(&self) -> usize {
        self.comps.iter().map(Polynomial::len).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(Polynomial::max_abs).fold(0.0, f64::max)
    }

    /// Highest degree carrying a nonzero coefficient (0 for the zero map).
    pub fn true_degree(&self) -> usize {
        self.comps.iter().filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn linear_part(&self) -> CMatrix {
        let n = self.dim;
        CMatrix::from_fn(n, n, |j, k| self.coeff(j, &MultiIndex::unit(n, k)))
    }

    pub fn set_linear_part(&mut self, m: &CMatrix) {
        let n = self.dim;
        assert_eq!(m.nrows(), n);
        for j in 0..n {
            for k in 0..n {
                self.comps[j].set(MultiIndex::unit(n, k), m[(j, k)]);
            }
        }
    }

    /// Homogeneous degree-`k` part as a jet of the same order.
    pub fn degree_slice(&self, k: usize) -> JetMap {
        JetMap {
            dim: self.dim,
            order: self.order,
            comps: self.comps.iter().map(|c| c.homogeneous_part(k)).collect(),
        }
    }

    /// Same coefficients viewed in a jet space of a different order. Raising
    /// is always exact; lowering fails if it would drop a coefficient.
    pub fn with_order(&self, order: usize) -> Result<JetMap> {
        if order == 0 {
            return Err(Error::InvalidDimensions("order must be >= 1".into()));
        }
        let deg = self.true_degree();
        if deg > order {
            return Err(Error::DegreeOutOfRange { degree: deg, order });
        }
        Ok(JetMap {
            dim: self.dim,
            order,
            comps: self.comps.clone(),
        })
    }

    fn check_same_shape(&self, other: &JetMap) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &JetMap) -> Result<JetMap> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(b, Complex64::new(1.0, 0.0));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &JetMap) -> Result<JetMap> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(b, Complex64::new(-1.0, 0.0));
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> JetMap {
        JetMap {
            dim: self.dim,
            order: self.order,
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Left multiplication of the component vector by a matrix: `z -> m f(z)`.
    pub fn left_mul(&self, m: &CMatrix) -> JetMap {
        let n = self.dim;
        let mut comps = vec![Polynomial::zero(n); n];
        for (i, out) in comps.iter_mut().enumerate() {
            for j in 0..n {
                let a = m[(i, j)];
                if a != Complex64::default() {
                    out.add_scaled(&self.comps[j], a);
                }
            }
        }
        JetMap {
            dim: n,
            order: self.order,
            comps,
        }
    }

    /// Largest coefficient difference and where it occurs.
    pub fn max_abs_diff(&self, other: &JetMap) -> (f64, Option<(usize, MultiIndex)>) {
        let mut worst = (0.0, None);
        for j in 0..self.dim.min(other.dim) {
            let a = &self.comps[j];
            let b = &other.comps[j];
            let keys = a.terms().map(|(p, _)| p).chain(b.terms().map(|(p, _)| p));
            for p in keys {
                let d = (a.coeff(p) - b.coeff(p)).norm();
                if d > worst.0 {
                    worst = (d, Some((j, p.clone())));
                }
            }
        }
        worst
    }

    /// Equality within `tol`, scaled by the larger coefficient magnitude when
    /// that exceeds one.
    pub fn approx_eq(&self, other: &JetMap, tol: f64) -> bool {
        if self.dim != other.dim || self.order != other.order {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        self.max_abs_diff(other).0 <= tol * scale
    }

    /// Truncated composition `self ∘ g`.
    pub fn compose(&self, g: &JetMap) -> Result<JetMap> {
        self.check_same_shape(g)?;
        let mut cache = PowerCache::new(&g.comps, self.order);
        let comps = self
            .comps
            .iter()
            .map(|c| c.substitute_cached(&mut cache))
            .collect();
        Ok(JetMap {
            dim: self.dim,
            order: self.order,
            comps,
        })
    }

    pub fn invert(&self) -> Result<JetMap> {
        self.invert_with(DEFAULT_COND_THRESHOLD)
    }

    /// Inverse in the jet group. The linear part is inverted densely, then
    /// each degree `k` is corrected from the degree-`k` defect of `self ∘ g`.
    pub fn invert_with(&self, cond_threshold: f64) -> Result<JetMap> {
        let linv = linalg::checked_inverse(&self.linear_part(), cond_threshold)?;
        let mut g = JetMap::from_linear(&linv, self.order)?;
        for k in 2..=self.order {
            let defect = self.compose(&g)?.degree_slice(k);
            if defect.nnz() == 0 {
                continue;
            }
            g = g.sub(&defect.left_mul(&linv))?;
        }
        Ok(g)
    }

    /// Drops every coefficient of degree above `s`.
    pub fn project(&self, s: usize) -> Result<JetMap> {
        if s == 0 || s > self.order {
            return Err(Error::ProjectionOutOfRange {
                requested: s,
                order: self.order,
            });
        }
        Ok(JetMap {
            dim: self.dim,
            order: s,
            comps: self.comps.iter().map(|c| c.truncate(s)).collect(),
        })
    }

    /// The map `w -> f(z + w) - f(z)`, expanded exactly. The jet is treated as
    /// an honest polynomial, so the result keeps the same degree bound.
    pub fn recenter(&self, z: &[Complex64]) -> Result<JetMap> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: z.len(),
            });
        }
        let mut out = JetMap::zero(self.dim, self.order)?;
        for (j, comp) in self.comps.iter().enumerate() {
            for (p, c) in comp.terms() {
                for q in p.nonzero_divisors() {
                    // C(p, q) z^{p - q}
                    let mut factor = *c;
                    for ((&pk, &qk), zk) in p.exponents().iter().zip(q.exponents()).zip(z) {
                        if pk > qk {
                            factor *= zk.powu(pk - qk) * binomial(pk, qk);
                        }
                    }
                    out.comps[j].add_term(q, factor);
                }
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: z.len(),
            });
        }
        Ok(self.comps.iter().map(|c| c.eval(z)).collect())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn jet2(order: usize, terms: &[(usize, [u32; 2], f64)]) -> JetMap {
        let mut f = JetMap::zero(2, order).unwrap();
        for (j, p, v) in terms {
            f.set(*j, (*p).into(), c(*v)).unwrap();
        }
        f
    }

    #[test]
    fn identity_has_unit_diagonal_only() {
        let id = JetMap::identity(2, 3).unwrap();
        assert_eq!(id.nnz(), 2);
        assert_eq!(id.coeff(0, &[1, 0].into()), c(1.0));
        assert_eq!(id.coeff(1, &[0, 1].into()), c(1.0));
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(matches!(JetMap::identity(0, 3), Err(Error::InvalidDimensions(_))));
        assert!(matches!(JetMap::identity(2, 0), Err(Error::InvalidDimensions(_))));
    }

    #[test]
    fn constant_and_overflow_terms_rejected() {
        let mut f = JetMap::zero(2, 2).unwrap();
        assert!(matches!(
            f.set(0, [0, 0].into(), c(1.0)),
            Err(Error::DegreeOutOfRange { degree: 0, .. })
        ));
        assert!(matches!(
            f.set(0, [2, 1].into(), c(1.0)),
            Err(Error::DegreeOutOfRange { degree: 3, .. })
        ));
        assert_eq!(f.coeff(1, &[1, 1].into()), c(0.0));
    }

    #[test]
    fn compose_cubic_shear_with_itself() {
        // (z1, z2 + z1^3) twice -> (z1, z2 + 2 z1^3)
        let f = jet2(3, &[(0, [1, 0], 1.0), (1, [0, 1], 1.0), (1, [3, 0], 1.0)]);
        let ff = f.compose(&f).unwrap();
        let expected = jet2(3, &[(0, [1, 0], 1.0), (1, [0, 1], 1.0), (1, [3, 0], 2.0)]);
        assert_eq!(ff, expected);
    }

    #[test]
    fn compose_diagonal_linear() {
        let f = jet2(2, &[(0, [1, 0], 0.5), (1, [0, 1], 0.25)]);
        let expected = jet2(2, &[(0, [1, 0], 0.25), (1, [0, 1], 1.0 / 16.0)]);
        assert_eq!(f.compose(&f).unwrap(), expected);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let a = JetMap::identity(2, 3).unwrap();
        let b = JetMap::identity(2, 2).unwrap();
        let d = JetMap::identity(3, 3).unwrap();
        assert!(matches!(a.compose(&b), Err(Error::OrderMismatch { .. })));
        assert!(matches!(a.compose(&d), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invert_quadratic_shear() {
        // (2 z1, z2 + z1^2)^-1 = (w1/2, w2 - w1^2/4)
        let f = jet2(2, &[(0, [1, 0], 2.0), (1, [0, 1], 1.0), (1, [2, 0], 1.0)]);
        let g = f.invert().unwrap();
        let expected = jet2(2, &[(0, [1, 0], 0.5), (1, [0, 1], 1.0), (1, [2, 0], -0.25)]);
        assert!(g.approx_eq(&expected, 1e-15), "{g:?}");
        let id = JetMap::identity(2, 2).unwrap();
        assert!(f.compose(&g).unwrap().approx_eq(&id, 1e-15));
        assert!(g.compose(&f).unwrap().approx_eq(&id, 1e-15));
    }

    #[test]
    fn invert_identity_and_singular() {
        let id = JetMap::identity(3, 4).unwrap();
        assert_eq!(id.invert().unwrap(), id);
        let sing = jet2(2, &[(0, [1, 0], 1.0), (1, [1, 0], 1.0)]);
        assert!(matches!(sing.invert(), Err(Error::SingularLinearPart)));
        let ill = jet2(2, &[(0, [1, 0], 1.0), (1, [0, 1], 1e-14)]);
        assert!(matches!(ill.invert(), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn project_cases() {
        let f = jet2(2, &[(0, [1, 0], 0.5), (1, [0, 1], 0.25), (1, [2, 0], 1.0)]);
        let p = f.project(1).unwrap();
        assert_eq!(p, jet2(1, &[(0, [1, 0], 0.5), (1, [0, 1], 0.25)]));
        assert_eq!(f.project(2).unwrap(), f);
        assert!(matches!(f.project(0), Err(Error::ProjectionOutOfRange { .. })));
        assert!(matches!(f.project(3), Err(Error::ProjectionOutOfRange { .. })));
        let id = JetMap::identity(3, 5).unwrap();
        assert_eq!(id.project(2).unwrap(), JetMap::identity(3, 2).unwrap());
    }

    #[test]
    fn recenter_quadratic() {
        // (2 z1, z2 + z1^2) at z = (1, 0) -> (2 w1, w2 + 2 w1 + w1^2)
        let f = jet2(2, &[(0, [1, 0], 2.0), (1, [0, 1], 1.0), (1, [2, 0], 1.0)]);
        let r = f.recenter(&[c(1.0), c(0.0)]).unwrap();
        let expected = jet2(
            2,
            &[(0, [1, 0], 2.0), (1, [0, 1], 1.0), (1, [1, 0], 2.0), (1, [2, 0], 1.0)],
        );
        assert_eq!(r, expected);
        assert_eq!(f.recenter(&[c(0.0), c(0.0)]).unwrap(), f);
        assert!(matches!(f.recenter(&[c(0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn recenter_linear_is_identity_operation() {
        let l = jet2(3, &[(0, [1, 0], 0.5), (1, [1, 0], 2.0), (1, [0, 1], 0.3)]);
        let r = l.recenter(&[Complex64::new(0.3, -1.0), c(7.0)]).unwrap();
        assert_eq!(r, l);
    }

    #[test]
    fn evaluate_cases() {
        let f = jet2(2, &[(0, [1, 0], 0.5), (1, [0, 1], 0.25), (1, [2, 0], 1.0)]);
        let v = f.evaluate(&[c(2.0), c(0.0)]).unwrap();
        assert_eq!(v, vec![c(1.0), c(4.0)]);
        assert_eq!(f.evaluate(&[c(0.0), c(0.0)]).unwrap(), vec![c(0.0), c(0.0)]);
        let z = vec![Complex64::new(0.1, 0.2), c(-3.0)];
        assert_eq!(JetMap::identity(2, 4).unwrap().evaluate(&z).unwrap(), z);
        assert!(f.evaluate(&[c(1.0)]).is_err());
    }

    #[test]
    fn linear_part_round_trip() {
        let f = jet2(3, &[(0, [1, 0], 0.5), (1, [1, 0], 2.0), (1, [0, 1], 0.3), (1, [1, 1], 9.0)]);
        let l = f.linear_part();
        let mut g = f.clone();
        g.set_linear_part(&l);
        assert_eq!(g, f);
        assert_eq!(JetMap::from_linear(&l, 3).unwrap(), f.degree_slice(1));
    }
}
