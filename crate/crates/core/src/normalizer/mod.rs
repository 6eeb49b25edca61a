//! Poincaré-Dulac normalization of contraction germs.

mod homological;
mod sample;
mod triangularize;

pub use homological::{homological_matrix, homological_solve, killed_set, HomologicalSolution, DENSE_LIMIT};
pub use sample::{default_sample_order, sample_instance, SampleOptions, SampledInstance};
pub use triangularize::{triangularize, Triangularization};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{JetMap, MultiIndex, DEFAULT_COND_THRESHOLD, DEFAULT_TOL_COEFF};
use crate::linalg::CMatrix;
use crate::resonance::{allowed_support, build_table, validate_spectrum, ResonanceTable, Spectrum, SupportMode, SupportSet, DEFAULT_TOL_RES};

pub const DEFAULT_TOL_ROUNDTRIP: f64 = 1e-8;

/// A holomorphic contraction germ fixing the origin, given by its jet.
#[derive(Clone, Debug)]
pub struct ContractionGerm {
    jet: JetMap,
    spectrum: Spectrum,
    table: ResonanceTable,
    triangularization: Triangularization,
    /// `s_inv ∘ jet ∘ s`, with lower-triangular linear part.
    triangular: JetMap,
}

impl ContractionGerm {
    pub fn new(jet: JetMap) -> Result<Self> {
        Self::with_tol_res(jet, DEFAULT_TOL_RES)
    }

    pub fn with_tol_res(jet: JetMap, tol_res: f64) -> Result<Self> {
        let tri = triangularize(&jet.linear_part(), tol_res)?;
        let n = jet.dim();
        let diag: Vec<Complex64> = (0..n).map(|i| tri.t[(i, i)]).collect();
        let spectrum = validate_spectrum(&diag, tol_res)?;
        if spectrum.betas() != diag.as_slice() {
            return Err(Error::EigenFailure(
                "eigenvalue ordering is unstable at the requested resonance tolerance".into(),
            ));
        }
        let table = build_table(&spectrum, tol_res);
        let triangular = if tri.s == CMatrix::identity(n, n) {
            jet.clone()
        } else {
            let order = jet.order();
            let s = JetMap::from_linear(&tri.s, order)?;
            let mut t = JetMap::from_linear(&tri.s_inv, order)?.compose(&jet)?.compose(&s)?;
            // Clear round-off above the diagonal.
            t.set_linear_part(&tri.t);
            t
        };
        Ok(Self {
            jet,
            spectrum,
            table,
            triangularization: tri,
            triangular,
        })
    }

    pub fn dim(&self) -> usize {
        self.jet.dim()
    }

    pub fn jet(&self) -> &JetMap {
        &self.jet
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn table(&self) -> &ResonanceTable {
        &self.table
    }

    pub fn triangularization(&self) -> &Triangularization {
        &self.triangularization
    }

    pub fn triangular_jet(&self) -> &JetMap {
        &self.triangular
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizeOptions {
    pub tol_coeff: f64,
    pub tol_roundtrip: f64,
    pub cond_threshold: f64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            tol_coeff: DEFAULT_TOL_COEFF,
            tol_roundtrip: DEFAULT_TOL_ROUNDTRIP,
            cond_threshold: DEFAULT_COND_THRESHOLD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeReport {
    pub degree: usize,
    /// Dimension of the coefficient space removed at this degree.
    pub killed: usize,
    pub condition: f64,
}

#[derive(Clone, Debug)]
pub struct NormalizationResult {
    pub mode: SupportMode,
    pub order: usize,
    /// `Φ` with `Φ⁻¹ ∘ γ ∘ Φ = normal_form` modulo degree `order + 1`.
    pub conjugator: JetMap,
    /// Conjugator of the triangularized germ, i.e. `S⁻¹ ∘ Φ`.
    pub conjugator_triangular: JetMap,
    /// Linear change of coordinates `S` that triangularizes the linear part.
    pub triangularizer: CMatrix,
    pub normal_form: JetMap,
    pub per_degree: Vec<DegreeReport>,
    /// Largest normal-form coefficient outside the allowed support.
    pub residual: f64,
    /// `|π_N(Φ⁻¹ ∘ γ ∘ Φ) - normal_form|`.
    pub roundtrip_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyReport {
    pub residual: f64,
    pub worst: Option<(usize, MultiIndex)>,
}

/// Largest coefficient of `f` outside `support`.
pub fn support_residual(f: &JetMap, support: &SupportSet) -> f64 {
    f.terms()
        .filter(|(j, p, _)| !support.contains(*j, p))
        .map(|(_, _, c)| c.norm())
        .fold(0.0, f64::max)
}

/// Compares `π_N(Φ⁻¹ ∘ γ ∘ Φ)` with `normal_form` coefficient by coefficient.
pub fn verify_conjugacy(gamma: &JetMap, phi: &JetMap, normal_form: &JetMap, order: usize) -> Result<ConjugacyReport> {
    let g = gamma.project(order)?;
    let p = phi.project(order)?;
    let nf = normal_form.project(order)?;
    let lhs = p.invert()?.compose(&g)?.compose(&p)?;
    let (residual, worst) = lhs.max_abs_diff(&nf);
    Ok(ConjugacyReport { residual, worst })
}

fn conjugate(current: &JetMap, h: &JetMap) -> Result<JetMap> {
    let id = JetMap::identity(h.dim(), h.order())?;
    let big_h = id.add(h)?;
    big_h.invert()?.compose(current)?.compose(&big_h)
}

/// Normalizes `germ` up to degree `order`, removing every coefficient
/// outside the support of `mode`.
///
/// The linear part is first made lower triangular with ordered diagonal.
/// Off-diagonal linear entries are removed by conjugating with
/// `id + h` where `h` solves the diagonal homological equation; since the
/// linear part is triangular each pass clears one more sub-diagonal level.
/// Every degree `k >= 2` is then handled by one homological solve against
/// the current (lower-triangular) linear part, followed by an exact
/// conjugation of the truncated jet.
pub fn normalize(germ: &ContractionGerm, order: usize, mode: SupportMode, opts: &NormalizeOptions) -> Result<NormalizationResult> {
    let n = germ.dim();
    let r = germ.table.max_length;
    if order < 2 || order < r {
        return Err(Error::InvalidArgument(format!(
            "normalization order {order} must be at least max(2, r) = {}",
            r.max(2)
        )));
    }
    if germ.jet.order() < order {
        return Err(Error::ProjectionOutOfRange {
            requested: order,
            order: germ.jet.order(),
        });
    }
    let support = allowed_support(&germ.table, mode);
    let mut current = germ.triangular.project(order)?;
    let mut phi = JetMap::identity(n, order)?;
    let mut per_degree = Vec::with_capacity(order);

    let diag = CMatrix::from_fn(n, n, |i, j| if i == j { current.linear_part()[(i, i)] } else { Complex64::default() });
    let mut linear = DegreeReport {
        degree: 1,
        killed: killed_set(&support, 1).len(),
        condition: 1.0,
    };
    for _ in 1..n {
        let sol = homological_solve(&diag, 1, &current.degree_slice(1), &support, order, opts.cond_threshold)?;
        linear.condition = linear.condition.max(sol.condition);
        if sol.correction.nnz() == 0 {
            break;
        }
        current = conjugate(&current, &sol.correction)?;
        phi = phi.compose(&JetMap::identity(n, order)?.add(&sol.correction)?)?;
    }
    per_degree.push(linear);

    for k in 2..=order {
        let u0 = current.linear_part();
        let sol = homological_solve(&u0, k, &current.degree_slice(k), &support, order, opts.cond_threshold)?;
        per_degree.push(DegreeReport {
            degree: k,
            killed: sol.killed,
            condition: sol.condition,
        });
        if sol.correction.nnz() == 0 {
            continue;
        }
        current = conjugate(&current, &sol.correction)?;
        phi = phi.compose(&JetMap::identity(n, order)?.add(&sol.correction)?)?;
    }

    let s = JetMap::from_linear(&germ.triangularization.s, order)?;
    let conjugator = s.compose(&phi)?;
    let residual = support_residual(&current, &support);
    if residual > opts.tol_coeff {
        return Err(Error::ResidualExceeded {
            what: "normal-form support",
            residual,
            tolerance: opts.tol_coeff,
        });
    }
    let check = verify_conjugacy(&germ.jet, &conjugator, &current, order)?;
    if check.residual > opts.tol_roundtrip {
        return Err(Error::ResidualExceeded {
            what: "conjugacy round-trip",
            residual: check.residual,
            tolerance: opts.tol_roundtrip,
        });
    }
    Ok(NormalizationResult {
        mode,
        order,
        conjugator,
        conjugator_triangular: phi,
        triangularizer: germ.triangularization.s.clone(),
        normal_form: current,
        per_degree,
        residual,
        roundtrip_residual: check.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn jet(order: usize, terms: &[(usize, &[u32], f64)]) -> JetMap {
        let n = terms[0].1.len();
        let mut f = JetMap::zero(n, order).unwrap();
        for (j, p, v) in terms {
            f.set(*j, MultiIndex::new(p.to_vec()), c(*v)).unwrap();
        }
        f
    }

    #[test]
    fn removes_cubic_keeps_resonant_quadratic() {
        let gamma = jet(3, &[(0, &[1, 0], 0.5), (1, &[0, 1], 0.25), (1, &[2, 0], 1.0), (1, &[3, 0], 1.0)]);
        let germ = ContractionGerm::new(gamma).unwrap();
        let res = normalize(&germ, 3, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        let expected_nf = jet(3, &[(0, &[1, 0], 0.5), (1, &[0, 1], 0.25), (1, &[2, 0], 1.0)]);
        assert!(res.normal_form.max_abs_diff(&expected_nf).0 < 1e-12);
        let expected_phi = jet(3, &[(0, &[1, 0], 1.0), (1, &[0, 1], 1.0), (1, &[3, 0], -8.0)]);
        assert!(res.conjugator.max_abs_diff(&expected_phi).0 < 1e-12);
        assert!(res.roundtrip_residual < 1e-12);
        assert_eq!(res.per_degree.len(), 3);
        assert_eq!(res.per_degree[1].killed, 5);
        assert_eq!(res.per_degree[2].killed, 8);
    }

    #[test]
    fn linearizes_non_resonant_germ() {
        let gamma = jet(2, &[(0, &[1, 0], 0.5), (0, &[0, 2], 1.0), (1, &[0, 1], 1.0 / 3.0)]);
        let germ = ContractionGerm::new(gamma).unwrap();
        let res = normalize(&germ, 2, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        let lin = jet(2, &[(0, &[1, 0], 0.5), (1, &[0, 1], 1.0 / 3.0)]);
        assert!(res.normal_form.max_abs_diff(&lin).0 < 1e-12);
        let phi = jet(2, &[(0, &[1, 0], 1.0), (0, &[0, 2], -18.0 / 7.0), (1, &[0, 1], 1.0)]);
        assert!(res.conjugator.max_abs_diff(&phi).0 < 1e-12);
    }

    #[test]
    fn removes_non_resonant_linear_coupling() {
        let gamma = jet(2, &[(0, &[1, 0], 0.5), (1, &[1, 0], 0.7), (1, &[0, 1], 0.3)]);
        let germ = ContractionGerm::new(gamma.clone()).unwrap();
        let res = normalize(&germ, 2, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        assert!(res.normal_form.linear_part()[(1, 0)].norm() < 1e-14);
        assert_eq!(res.normal_form.coeff(0, &[1, 0].into()), c(0.5));
        assert_eq!(res.normal_form.coeff(1, &[0, 1].into()), c(0.3));
        assert!(verify_conjugacy(&gamma, &res.conjugator, &res.normal_form, 2).unwrap().residual < 1e-12);
    }

    #[test]
    fn jordan_block_is_kept() {
        let gamma = jet(3, &[(0, &[1, 0], 0.5), (1, &[1, 0], 1.0), (1, &[0, 1], 0.5), (1, &[1, 1], 2.0)]);
        let germ = ContractionGerm::new(gamma).unwrap();
        let res = normalize(&germ, 3, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        assert_eq!(res.per_degree[0].killed, 0);
        assert_eq!(res.normal_form.coeff(1, &[1, 0].into()), c(1.0));
        assert_eq!(res.normal_form.degree_slice(2).nnz(), 0);
        assert_eq!(res.normal_form.degree_slice(3).nnz(), 0);
    }

    #[test]
    fn unordered_linear_part_is_permuted() {
        let gamma = jet(3, &[(0, &[1, 0], 0.25), (0, &[0, 2], 1.0), (1, &[0, 1], 0.5), (1, &[0, 3], 1.0)]);
        let germ = ContractionGerm::new(gamma.clone()).unwrap();
        let res = normalize(&germ, 3, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        assert_eq!(res.normal_form.coeff(0, &[1, 0].into()), c(0.5));
        assert_eq!(res.normal_form.coeff(1, &[0, 1].into()), c(0.25));
        // Resonant z1^2 e2 survives in the reordered coordinates.
        assert_eq!(res.normal_form.coeff(1, &[2, 0].into()), c(1.0));
        assert!(res.roundtrip_residual < 1e-12);
    }

    #[test]
    fn order_below_resonance_length_rejected() {
        let a: f64 = 0.5;
        let gamma = jet(3, &[(0, &[1, 0], a), (1, &[0, 1], a.powi(3))]);
        let germ = ContractionGerm::new(gamma).unwrap();
        assert!(normalize(&germ, 2, SupportMode::Resonant, &NormalizeOptions::default()).is_err());
    }
}
