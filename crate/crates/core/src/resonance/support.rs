use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::ResonanceTable;
use crate::error::Error;
use crate::jet::{JetMap, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SupportMode {
    /// `{e_j} ∪ P_j`: classical Poincaré-Dulac normal forms.
    Resonant,
    /// `{e_j} ∪ Q_j`: the sub-resonant polynomial group.
    Subresonant,
}

impl fmt::Display for SupportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportMode::Resonant => "resonant",
            SupportMode::Subresonant => "subresonant",
        })
    }
}

impl FromStr for SupportMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "resonant" => Ok(SupportMode::Resonant),
            "subresonant" | "sub-resonant" => Ok(SupportMode::Subresonant),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected resonant or subresonant)"
            ))),
        }
    }
}

/// Allowed monomials per target component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    pub mode: SupportMode,
    allowed: Vec<BTreeSet<MultiIndex>>,
}

impl SupportSet {
    pub fn dim(&self) -> usize {
        self.allowed.len()
    }

    pub fn contains(&self, component: usize, p: &MultiIndex) -> bool {
        self.allowed[component].contains(p)
    }

    pub fn component(&self, j: usize) -> &BTreeSet<MultiIndex> {
        &self.allowed[j]
    }

    pub fn max_degree(&self) -> usize {
        self.allowed
            .iter()
            .flat_map(|s| s.iter().map(MultiIndex::degree))
            .max()
            .unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.allowed.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Zeroes every coefficient outside the support.
    pub fn restrict(&self, f: &JetMap) -> JetMap {
        let mut out = JetMap::zero(f.dim(), f.order()).expect("source jet is valid");
        for (j, p, c) in f.terms() {
            if self.contains(j, p) {
                out.set(j, p.clone(), c).expect("key taken from a valid jet");
            }
        }
        out
    }
}

pub fn allowed_support(t: &ResonanceTable, mode: SupportMode) -> SupportSet {
    let n = t.dim();
    let allowed = (0..n)
        .map(|j| {
            let base = match mode {
                SupportMode::Resonant => &t.p_sets[j],
                SupportMode::Subresonant => &t.q_sets[j],
            };
            let mut s = base.clone();
            s.insert(MultiIndex::unit(n, j));
            s
        })
        .collect();
    SupportSet { mode, allowed }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub component: usize,
    pub exponent: MultiIndex,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub passed: bool,
    /// Coefficients outside the support above tolerance, largest first.
    pub violations: Vec<Violation>,
    /// Components whose diagonal linear coefficient vanishes.
    pub zero_diagonal: Vec<usize>,
}

impl MembershipReport {
    pub fn max_violation(&self) -> f64 {
        self.violations.first().map_or(0.0, |v| v.magnitude)
    }
}

/// Checks that `f` is supported on `sup` (within `tol_coeff`) and has
/// nonzero diagonal linear coefficients.
pub fn check_membership(f: &JetMap, sup: &SupportSet, tol_coeff: f64) -> MembershipReport {
    let n = f.dim();
    let mut violations: Vec<Violation> = f
        .terms()
        .filter(|(j, p, c)| !sup.contains(*j, p) && c.norm() > tol_coeff)
        .map(|(j, p, c)| Violation {
            component: j,
            exponent: p.clone(),
            magnitude: c.norm(),
        })
        .collect();
    violations.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    let zero_diagonal: Vec<usize> = (0..n)
        .filter(|&j| f.coeff(j, &MultiIndex::unit(n, j)).norm() <= tol_coeff)
        .collect();
    MembershipReport {
        passed: violations.is_empty() && zero_diagonal.is_empty() && sup.dim() == n,
        violations,
        zero_diagonal,
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::super::{build_table, Spectrum};
    use super::*;

    fn table(values: &[f64]) -> ResonanceTable {
        let s = Spectrum::from_real(values).unwrap();
        build_table(&s, s.tol_res())
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn example_map() -> JetMap {
        // (z1, z2 + 2 z1 - z1^3, z3 + z1 + z1 z2 - 2 z1^2 z2 + z1^4 + z1^5)
        let mut f = JetMap::identity(3, 5).unwrap();
        for (j, p, v) in [
            (1, [1, 0, 0], 2.0),
            (1, [3, 0, 0], -1.0),
            (2, [1, 0, 0], 1.0),
            (2, [1, 1, 0], 1.0),
            (2, [2, 1, 0], -2.0),
            (2, [4, 0, 0], 1.0),
            (2, [5, 0, 0], 1.0),
        ] {
            f.set(j, p.into(), c(v)).unwrap();
        }
        f
    }

    #[test]
    fn subresonant_component_three_has_nine_indices() {
        let a: f64 = 0.5;
        let t = table(&[a, a.powi(3), a.powi(5)]);
        let sup = allowed_support(&t, SupportMode::Subresonant);
        assert_eq!(sup.component(2).len(), 9);
        assert!(sup.component(2).contains(&MultiIndex::unit(3, 2)));
    }

    #[test]
    fn resonant_first_component_is_diagonal_only() {
        for values in [&[0.5, 0.25][..], &[0.5, 0.5, 0.25], &[0.3, 0.09, 0.027]] {
            let sup = allowed_support(&table(values), SupportMode::Resonant);
            assert_eq!(sup.component(0).len(), 1);
        }
    }

    #[test]
    fn resonant_half_quarter() {
        let sup = allowed_support(&table(&[0.5, 0.25]), SupportMode::Resonant);
        let expected: BTreeSet<MultiIndex> = [[0, 1].into(), [2, 0].into()].into_iter().collect();
        assert_eq!(sup.component(1), &expected);
    }

    #[test]
    fn resonant_within_subresonant() {
        let t = table(&[0.5, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 12.0]);
        let r = allowed_support(&t, SupportMode::Resonant);
        let s = allowed_support(&t, SupportMode::Subresonant);
        for j in 0..4 {
            assert!(r.component(j).is_subset(s.component(j)));
            assert!(s.component(j).iter().all(|p| p.degree() <= t.max_length));
        }
    }

    #[test]
    fn example_map_is_subresonant() {
        let a: f64 = 0.5;
        let t = table(&[a, a.powi(3), a.powi(5)]);
        let sup = allowed_support(&t, SupportMode::Subresonant);
        let rep = check_membership(&example_map(), &sup, 1e-10);
        assert!(rep.passed, "{rep:?}");
        // Not resonant: z1 e2 is only sub-resonant.
        let res = allowed_support(&t, SupportMode::Resonant);
        assert!(!check_membership(&example_map(), &res, 1e-10).passed);
    }

    #[test]
    fn identity_passes_both_modes() {
        let t = table(&[0.5, 0.25, 0.125]);
        let id = JetMap::identity(3, 3).unwrap();
        for mode in [SupportMode::Resonant, SupportMode::Subresonant] {
            assert!(check_membership(&id, &allowed_support(&t, mode), 1e-10).passed);
        }
    }

    #[test]
    fn quartic_outside_q2_for_eighth() {
        let t = table(&[0.5, 0.125]);
        let sup = allowed_support(&t, SupportMode::Subresonant);
        let mut f = JetMap::identity(2, 4).unwrap();
        f.set(1, [2, 0].into(), c(1.0)).unwrap();
        assert!(check_membership(&f, &sup, 1e-10).passed);
        let mut g = JetMap::identity(2, 4).unwrap();
        g.set(1, [4, 0].into(), c(1.0)).unwrap();
        let rep = check_membership(&g, &sup, 1e-10);
        assert!(!rep.passed);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].component, 1);
        assert_eq!(rep.violations[0].exponent, MultiIndex::from([4, 0]));
    }

    #[test]
    fn zero_diagonal_fails() {
        let t = table(&[0.5, 0.25]);
        let sup = allowed_support(&t, SupportMode::Subresonant);
        let mut f = JetMap::identity(2, 2).unwrap();
        f.set(1, [0, 1].into(), c(0.0)).unwrap();
        let rep = check_membership(&f, &sup, 1e-10);
        assert!(!rep.passed);
        assert_eq!(rep.zero_diagonal, vec![1]);
    }
}
