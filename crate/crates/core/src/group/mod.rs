//! The group of sub-resonant polynomial transformations attached to a
//! spectrum, its extension by translations, and the adjoint action.
//!
//! Compositions and inverses are carried out exactly as polynomials (degrees
//! up to `r^2`) and only then truncated to the support, so every operation
//! doubles as a runtime check that the support really is closed.

mod dual;

use num_complex::Complex64;
use rand::Rng;

pub use dual::DualMap;

use crate::error::{Error, Result};
use crate::jet::{JetMap, MultiIndex, Polynomial, DEFAULT_TOL_COEFF};
use crate::random::sample_disk;
use crate::resonance::{
    allowed_support, build_table, check_membership, ResonanceTable, Spectrum, SupportMode,
    SupportSet,
};

/// A validated element of the group: a polynomial map of degree at most `r`,
/// stored as a jet of order `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubresonantMap {
    jet: JetMap,
}

impl SubresonantMap {
    pub fn jet(&self) -> &JetMap {
        &self.jet
    }

    pub fn into_jet(self) -> JetMap {
        self.jet
    }

    /// Diagonal linear coefficients `a_j`.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.jet.dim();
        (0..n)
            .map(|j| self.jet.coeff(j, &MultiIndex::unit(n, j)))
            .collect()
    }

    pub fn evaluate(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.jet.evaluate(x)
    }
}

/// The automorphism `x -> translation + poly(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineExtElement {
    pub translation: Vec<Complex64>,
    pub poly: SubresonantMap,
}

impl AffineExtElement {
    pub fn evaluate(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let px = self.poly.evaluate(x)?;
        Ok(self.translation.iter().zip(px).map(|(z, p)| z + p).collect())
    }
}

/// Tangent vector at the identity of the extended group: a translation
/// velocity plus a polynomial vector field on the sub-resonant support. The
/// linear slice is unrestricted on the diagonal (it may vanish).
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub translation: Vec<Complex64>,
    pub poly: JetMap,
}

impl AlgebraElement {
    pub fn scale(&self, c: Complex64) -> AlgebraElement {
        AlgebraElement {
            translation: self.translation.iter().map(|v| v * c).collect(),
            poly: self.poly.scale(c),
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        Ok(AlgebraElement {
            translation: self
                .translation
                .iter()
                .zip(&other.translation)
                .map(|(a, b)| a + b)
                .collect(),
            poly: self.poly.add(&other.poly)?,
        })
    }

    /// Largest component difference.
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        let t = self
            .translation
            .iter()
            .zip(&other.translation)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        t.max(self.poly.max_abs_diff(&other.poly).0)
    }
}

/// The group attached to a spectrum, together with the data needed to
/// validate and operate on its elements.
#[derive(Clone, Debug)]
pub struct SubresonantGroup {
    spectrum: Spectrum,
    table: ResonanceTable,
    support: SupportSet,
    tol_coeff: f64,
}

impl SubresonantGroup {
    pub fn new(spectrum: Spectrum) -> Self {
        let table = build_table(&spectrum, spectrum.tol_res());
        Self::from_table(spectrum, table)
    }

    pub fn from_table(spectrum: Spectrum, table: ResonanceTable) -> Self {
        let support = allowed_support(&table, SupportMode::Subresonant);
        Self {
            spectrum,
            table,
            support,
            tol_coeff: DEFAULT_TOL_COEFF,
        }
    }

    pub fn with_tol_coeff(mut self, tol_coeff: f64) -> Self {
        self.tol_coeff = tol_coeff;
        self
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Maximal resonance length `r`; also the degree bound of every element.
    pub fn r(&self) -> usize {
        self.table.max_length
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn table(&self) -> &ResonanceTable {
        &self.table
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn tol_coeff(&self) -> f64 {
        self.tol_coeff
    }

    /// Order at which compositions of elements are exact.
    fn exact_order(&self) -> usize {
        self.r() * self.r()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: d,
            });
        }
        Ok(())
    }

    fn scaled_tol(&self, f: &JetMap) -> f64 {
        self.tol_coeff * f.max_abs().max(1.0)
    }

    /// Asserts that `full` (an exact polynomial result) lives on the support
    /// and truncates it there, at order `r`.
    fn close(&self, full: &JetMap) -> Result<JetMap> {
        let rep = check_membership(full, &self.support, self.scaled_tol(full));
        if let Some(v) = rep.violations.first() {
            return Err(Error::ClosureViolation {
                component: v.component + 1,
                exponent: v.exponent.exponents().to_vec(),
                magnitude: v.magnitude,
            });
        }
        if !rep.zero_diagonal.is_empty() {
            return Err(Error::NotMember(format!(
                "vanishing diagonal coefficient in component {}",
                rep.zero_diagonal[0] + 1
            )));
        }
        self.support.restrict(full).project(self.r().min(full.order()))?.with_order(self.r())
    }

    /// Validates a jet as a group element.
    pub fn element(&self, jet: &JetMap) -> Result<SubresonantMap> {
        self.check_dim(jet.dim())?;
        let rep = check_membership(jet, &self.support, self.tol_coeff);
        if let Some(v) = rep.violations.first() {
            return Err(Error::NotMember(format!(
                "coefficient {:.3e} of z^{:?} in component {} is outside the sub-resonant support",
                v.magnitude,
                v.exponent,
                v.component + 1
            )));
        }
        if let Some(j) = rep.zero_diagonal.first() {
            return Err(Error::NotMember(format!(
                "diagonal coefficient of component {} vanishes",
                j + 1
            )));
        }
        let lifted = if jet.order() < self.r() {
            jet.with_order(self.r())?
        } else {
            jet.project(self.r())?
        };
        Ok(SubresonantMap {
            jet: self.support.restrict(&lifted),
        })
    }

    pub fn identity(&self) -> SubresonantMap {
        SubresonantMap {
            jet: JetMap::identity(self.dim(), self.r()).expect("dimension is positive"),
        }
    }

    /// Composition `p ∘ q`, computed exactly and checked for closure.
    pub fn compose(&self, p: &SubresonantMap, q: &SubresonantMap) -> Result<SubresonantMap> {
        let k = self.exact_order();
        let full = p.jet.with_order(k)?.compose(&q.jet.with_order(k)?)?;
        Ok(SubresonantMap {
            jet: self.close(&full)?,
        })
    }

    /// Inverse by triangular back-substitution:
    /// `z_j = (w_j - P_j(z_1, ..., z_{j-1})) / a_j`.
    pub fn invert(&self, p: &SubresonantMap) -> Result<SubresonantMap> {
        let n = self.dim();
        let k = self.exact_order();
        let a = p.diagonal();
        let mut inv: Vec<Polynomial> = (0..n).map(|j| Polynomial::variable(n, j)).collect();
        for j in 0..n {
            let mut rest = p.jet.component(j).clone();
            rest.remove(&MultiIndex::unit(n, j));
            let sub = rest.substitute(&inv, k);
            let mut qj = Polynomial::variable(n, j);
            qj.add_scaled(&sub, Complex64::new(-1.0, 0.0));
            inv[j] = qj.scale(a[j].inv());
        }
        let full = JetMap::from_components(k, inv)?;
        let q = SubresonantMap {
            jet: self.close(&full)?,
        };
        let round = self.compose(p, &q)?;
        let (dev, _) = round.jet.max_abs_diff(&self.identity().jet);
        let tol = self.scaled_tol(&round.jet);
        if dev > tol {
            return Err(Error::ResidualExceeded {
                what: "group inverse",
                residual: dev,
                tolerance: tol,
            });
        }
        Ok(q)
    }

    /// `θ_{-P(z)} ∘ P ∘ θ_z`, checked to lie in the group.
    pub fn conj_by_translation(&self, p: &SubresonantMap, z: &[Complex64]) -> Result<SubresonantMap> {
        self.check_dim(z.len())?;
        let r = p.jet.recenter(z)?;
        Ok(SubresonantMap {
            jet: self.close(&r)?,
        })
    }

    /// `(z, P)(w, Q) = (z + P(w), θ_{-P(w)} P θ_w Q)`.
    pub fn tilde_compose(&self, a: &AffineExtElement, b: &AffineExtElement) -> Result<AffineExtElement> {
        self.check_dim(a.translation.len())?;
        self.check_dim(b.translation.len())?;
        let pw = a.poly.evaluate(&b.translation)?;
        let translation = a.translation.iter().zip(pw).map(|(z, v)| z + v).collect();
        let shifted = self.conj_by_translation(&a.poly, &b.translation)?;
        let poly = self.compose(&shifted, &b.poly)?;
        Ok(AffineExtElement { translation, poly })
    }

    pub fn tilde_invert(&self, a: &AffineExtElement) -> Result<AffineExtElement> {
        self.check_dim(a.translation.len())?;
        let p_inv = self.invert(&a.poly)?;
        let minus_z: Vec<Complex64> = a.translation.iter().map(|z| -z).collect();
        let w = p_inv.evaluate(&minus_z)?;
        let shifted = self.conj_by_translation(&a.poly, &w)?;
        let poly = self.invert(&shifted)?;
        Ok(AffineExtElement { translation: w, poly })
    }

    pub fn tilde_identity(&self) -> AffineExtElement {
        AffineExtElement {
            translation: vec![Complex64::default(); self.dim()],
            poly: self.identity(),
        }
    }

    /// Validates an algebra element: its polynomial part must sit on the
    /// sub-resonant support.
    pub fn algebra_element(&self, translation: Vec<Complex64>, poly: &JetMap) -> Result<AlgebraElement> {
        self.check_dim(translation.len())?;
        self.check_dim(poly.dim())?;
        let rep = check_membership(poly, &self.support, self.tol_coeff);
        if let Some(v) = rep.violations.first() {
            return Err(Error::NotMember(format!(
                "algebra element has z^{:?} in component {} outside the support",
                v.exponent,
                v.component + 1
            )));
        }
        let poly = if poly.order() < self.r() {
            poly.with_order(self.r())?
        } else {
            poly.project(self.r())?
        };
        Ok(AlgebraElement {
            translation,
            poly: self.support.restrict(&poly),
        })
    }

    /// Adjoint action of `p` on `v`: the ε-linear part of
    /// `P ∘ θ_{ε v_0} ∘ (id + ε W) ∘ P^{-1}`, split into its value at the
    /// origin and the remaining polynomial field.
    pub fn adjoint_action(&self, p: &SubresonantMap, v: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(v.translation.len())?;
        let n = self.dim();
        let k = self.exact_order().max(self.r() + 1);
        let p_inv = self.invert(p)?.jet.with_order(k)?;
        let w = v.poly.with_order(k)?;
        let tangent = (0..n)
            .map(|j| {
                let mut t = w.component(j).clone();
                t.add_term(MultiIndex::zero(n), v.translation[j]);
                t
            })
            .collect();
        let start = DualMap::new(JetMap::identity(n, k)?, tangent)?;
        let pushed = DualMap::push_forward(&p.jet.with_order(k)?, &start.compose_right(&p_inv)?)?;

        let translation: Vec<Complex64> = pushed.tangent.iter().map(Polynomial::constant_term).collect();
        let mut field = JetMap::zero(n, k)?;
        for (j, t) in pushed.tangent.iter().enumerate() {
            for (q, c) in t.terms() {
                if !q.is_zero() {
                    field.set(j, q.clone(), *c)?;
                }
            }
        }
        let rep = check_membership(&field, &self.support, self.scaled_tol(&field));
        if let Some(v) = rep.violations.first() {
            return Err(Error::ClosureViolation {
                component: v.component + 1,
                exponent: v.exponent.exponents().to_vec(),
                magnitude: v.magnitude,
            });
        }
        Ok(AlgebraElement {
            translation,
            poly: self.support.restrict(&field).project(self.r())?,
        })
    }

    /// Random element: diagonal entries `1 + disk(0.5)`, other supported
    /// coefficients uniform in the disk of radius `scale`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> SubresonantMap {
        let n = self.dim();
        let mut jet = JetMap::zero(n, self.r()).expect("dimension is positive");
        for j in 0..n {
            for q in self.support.component(j) {
                let c = if q.as_unit() == Some(j) {
                    Complex64::new(1.0, 0.0) + sample_disk(rng, 0.5)
                } else {
                    sample_disk(rng, scale)
                };
                jet.set(j, q.clone(), c).expect("support indices have degree <= r");
            }
        }
        SubresonantMap { jet }
    }

    pub fn random_algebra_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let n = self.dim();
        let mut poly = JetMap::zero(n, self.r()).expect("dimension is positive");
        for j in 0..n {
            for q in self.support.component(j) {
                poly.set(j, q.clone(), sample_disk(rng, scale))
                    .expect("support indices have degree <= r");
            }
        }
        AlgebraElement {
            translation: (0..n).map(|_| sample_disk(rng, scale)).collect(),
            poly,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn group(values: &[f64]) -> SubresonantGroup {
        SubresonantGroup::new(Spectrum::from_real(values).unwrap())
    }

    fn map2(g: &SubresonantGroup, terms: &[(usize, [u32; 2], f64)]) -> SubresonantMap {
        let mut f = JetMap::zero(2, g.r()).unwrap();
        for (j, p, v) in terms {
            f.set(*j, (*p).into(), c(*v)).unwrap();
        }
        g.element(&f).unwrap()
    }

    #[test]
    fn cubic_shear_composes() {
        let g = group(&[0.5, 0.125]);
        let p = map2(&g, &[(0, [1, 0], 1.0), (1, [0, 1], 1.0), (1, [3, 0], 1.0)]);
        let pp = g.compose(&p, &p).unwrap();
        let expected = map2(&g, &[(0, [1, 0], 1.0), (1, [0, 1], 1.0), (1, [3, 0], 2.0)]);
        assert_eq!(pp, expected);
        assert_eq!(g.compose(&p, &g.identity()).unwrap(), p);
    }

    #[test]
    fn quadratic_shear_inverse() {
        let g = group(&[0.5, 0.25]);
        let p = map2(&g, &[(0, [1, 0], 2.0), (1, [0, 1], 1.0), (1, [2, 0], 1.0)]);
        let q = g.invert(&p).unwrap();
        let expected = map2(&g, &[(0, [1, 0], 0.5), (1, [0, 1], 1.0), (1, [2, 0], -0.25)]);
        assert!(q.jet().approx_eq(expected.jet(), 1e-15));
        assert_eq!(g.invert(&g.identity()).unwrap(), g.identity());
    }

    #[test]
    fn element_rejects_off_support() {
        let g = group(&[0.5, 1.0 / 3.0]);
        let mut f = JetMap::identity(2, 2).unwrap();
        f.set(1, [2, 0].into(), c(1.0)).unwrap();
        assert!(matches!(g.element(&f), Err(Error::NotMember(_))));
    }

    #[test]
    fn translation_conjugation_worked_case() {
        // P = (z1/2, z2/4 + z1^2) at z = (1, 1) -> (w1/2, w2/4 + 2 w1 + w1^2)
        let g = group(&[0.5, 0.25]);
        let p = map2(&g, &[(0, [1, 0], 0.5), (1, [0, 1], 0.25), (1, [2, 0], 1.0)]);
        let r = g.conj_by_translation(&p, &[c(1.0), c(1.0)]).unwrap();
        let expected = map2(
            &g,
            &[(0, [1, 0], 0.5), (1, [0, 1], 0.25), (1, [1, 0], 2.0), (1, [2, 0], 1.0)],
        );
        assert_eq!(r, expected);
        assert_eq!(g.conj_by_translation(&p, &[c(0.0), c(0.0)]).unwrap(), p);
    }

    #[test]
    fn translation_only_elements_add() {
        let g = group(&[0.5, 0.25]);
        let a = AffineExtElement {
            translation: vec![c(1.0), c(2.0)],
            poly: g.identity(),
        };
        let b = AffineExtElement {
            translation: vec![c(-3.0), Complex64::new(0.0, 1.0)],
            poly: g.identity(),
        };
        let ab = g.tilde_compose(&a, &b).unwrap();
        assert_eq!(ab.translation, vec![c(-2.0), Complex64::new(2.0, 1.0)]);
        assert_eq!(ab.poly, g.identity());
        let inv = g.tilde_invert(&a).unwrap();
        assert_eq!(inv.translation, vec![c(-1.0), c(-2.0)]);
        assert_eq!(inv.poly, g.identity());
    }

    #[test]
    fn embedded_subgroup_composes_as_group() {
        let g = group(&[0.5, 0.25]);
        let mut rng = rng_from_seed(3);
        let p = g.random_element(&mut rng, 0.5);
        let q = g.random_element(&mut rng, 0.5);
        let a = AffineExtElement {
            translation: vec![c(0.0); 2],
            poly: p.clone(),
        };
        let b = AffineExtElement {
            translation: vec![c(0.0); 2],
            poly: q.clone(),
        };
        let ab = g.tilde_compose(&a, &b).unwrap();
        assert_eq!(ab.poly, g.compose(&p, &q).unwrap());
        assert!(ab.translation.iter().all(|z| z.norm() == 0.0));
        assert_eq!(g.tilde_invert(&a).unwrap().poly, g.invert(&p).unwrap());
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let g = group(&[0.5, 0.25, 0.125]);
        let mut rng = rng_from_seed(11);
        let v = g.random_algebra_element(&mut rng, 0.7);
        let out = g.adjoint_action(&g.identity(), &v).unwrap();
        assert!(out.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn adjoint_of_diagonal_on_translation() {
        let g = group(&[0.5, 1.0 / 3.0]);
        let p = map2(&g, &[(0, [1, 0], 2.0), (1, [0, 1], -3.0)]);
        let v = g
            .algebra_element(vec![c(1.0), Complex64::new(0.5, 1.0)], &JetMap::zero(2, 1).unwrap())
            .unwrap();
        let out = g.adjoint_action(&p, &v).unwrap();
        assert_eq!(out.translation, vec![c(2.0), Complex64::new(-1.5, -3.0)]);
        assert_eq!(out.poly.nnz(), 0);
    }
}
