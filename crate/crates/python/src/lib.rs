//! Python bindings for the `dulac` library.
//!
//! Components and variables are 0-based on the Python side; the JSON
//! documents produced by `Jet.to_json` keep the 1-based `target` field of the
//! command-line tool.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dulac::group::{AffineExtElement, SubresonantGroup, SubresonantMap};
use dulac::normalizer::{self, ContractionGerm, NormalizeOptions, SampleOptions};
use dulac::random::rng_from_seed;
use dulac::resonance::{build_table, flag_spaces, g1_pattern, validate_spectrum, Spectrum, SupportMode};
use dulac::{JetMap, MultiIndex};

pyo3::create_exception!(pydulac, NumericalError, PyArithmeticError);

const DEFAULT_TOL_RES: f64 = 1e-9;

fn err(e: dulac::Error) -> PyErr {
    match e.exit_code() {
        2 => NumericalError::new_err(e.to_string()),
        3 => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn spectrum(eigenvalues: Vec<Complex64>, tol_res: f64) -> PyResult<Spectrum> {
    validate_spectrum(&eigenvalues, tol_res).map_err(err)
}

fn exponents(p: &MultiIndex) -> Vec<u32> {
    p.exponents().to_vec()
}

/// Truncated polynomial map `C^n -> C^n` without constant term.
#[pyclass(name = "Jet", module = "pydulac", frozen, from_py_object)]
#[derive(Clone)]
struct PyJet {
    inner: JetMap,
}

impl PyJet {
    fn wrap(inner: JetMap) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyJet {
    /// Builds a jet from `(component, exponents, coefficient)` triples.
    /// Repeated keys are summed.
    #[new]
    #[pyo3(signature = (dim, order, terms = Vec::new()))]
    fn new(dim: usize, order: usize, terms: Vec<(usize, Vec<u32>, Complex64)>) -> PyResult<Self> {
        let mut f = JetMap::zero(dim, order).map_err(err)?;
        for (j, e, c) in terms {
            if j >= dim {
                return Err(PyValueError::new_err(format!("component {j} out of range for dimension {dim}")));
            }
            f.add_term(j, MultiIndex::new(e), c).map_err(err)?;
        }
        Ok(Self::wrap(f))
    }

    #[staticmethod]
    fn identity(dim: usize, order: usize) -> PyResult<Self> {
        JetMap::identity(dim, order).map(Self::wrap).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        dulac::documents::parse_map(text).map(Self::wrap).map_err(err)
    }

    fn to_json(&self) -> String {
        dulac::documents::serialize_map(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn terms(&self) -> Vec<(usize, Vec<u32>, Complex64)> {
        self.inner.terms().map(|(j, p, c)| (j, exponents(p), c)).collect()
    }

    fn coeff(&self, component: usize, exps: Vec<u32>) -> PyResult<Complex64> {
        if component >= self.inner.dim() || exps.len() != self.inner.dim() {
            return Err(PyValueError::new_err("component or exponent length out of range"));
        }
        Ok(self.inner.coeff(component, &MultiIndex::new(exps)))
    }

    fn linear_part(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.linear_part();
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    /// `self ∘ other`, truncated.
    fn compose(&self, other: &PyJet) -> PyResult<Self> {
        self.inner.compose(&other.inner).map(Self::wrap).map_err(err)
    }

    fn invert(&self) -> PyResult<Self> {
        self.inner.invert().map(Self::wrap).map_err(err)
    }

    fn project(&self, s: usize) -> PyResult<Self> {
        self.inner.project(s).map(Self::wrap).map_err(err)
    }

    /// `x -> f(z + x) - f(z)`.
    fn recenter(&self, z: Vec<Complex64>) -> PyResult<Self> {
        self.inner.recenter(&z).map(Self::wrap).map_err(err)
    }

    fn evaluate(&self, z: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.evaluate(&z).map_err(err)
    }

    #[pyo3(signature = (other, tol = 1e-10))]
    fn approx_eq(&self, other: &PyJet, tol: f64) -> bool {
        self.inner.approx_eq(&other.inner, tol)
    }

    fn max_abs_diff(&self, other: &PyJet) -> f64 {
        self.inner.max_abs_diff(&other.inner).0
    }

    fn __eq__(&self, other: &PyJet) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Jet(dim={}, order={}, nnz={})", self.inner.dim(), self.inner.order(), self.inner.nnz())
    }
}

/// Resonance table of a spectrum as a dict. Exponent sets are sorted lists.
#[pyfunction]
#[pyo3(signature = (eigenvalues, tol_res = DEFAULT_TOL_RES))]
fn resonances<'py>(py: Python<'py>, eigenvalues: Vec<Complex64>, tol_res: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = spectrum(eigenvalues, tol_res)?;
    let t = build_table(&s, tol_res);
    let sets = |v: &[std::collections::BTreeSet<MultiIndex>]| -> Vec<Vec<Vec<u32>>> {
        v.iter().map(|set| set.iter().map(exponents).collect()).collect()
    };
    let d = PyDict::new(py);
    d.set_item("max_length", t.max_length)?;
    d.set_item("lengths", t.lengths.clone())?;
    d.set_item("p_sets", sets(&t.p_sets))?;
    d.set_item("q_sets", sets(&t.q_sets))?;
    d.set_item("dependence", t.dependence.clone())?;
    let near: Vec<(usize, Vec<u32>, f64)> = t
        .near_resonances
        .iter()
        .map(|r| (r.component, exponents(&r.exponent), r.relative_gap))
        .collect();
    d.set_item("near_resonances", near)?;
    Ok(d)
}

/// Star pattern of the linear part of the group, one string per row.
#[pyfunction]
#[pyo3(signature = (eigenvalues, tol_res = DEFAULT_TOL_RES))]
fn pattern(eigenvalues: Vec<Complex64>, tol_res: f64) -> PyResult<Vec<String>> {
    let s = spectrum(eigenvalues, tol_res)?;
    Ok(g1_pattern(&build_table(&s, tol_res), &s).to_strings())
}

/// Flag spaces as `(group, k, basis)` with 0-based basis indices.
#[pyfunction]
#[pyo3(signature = (eigenvalues, tol_res = DEFAULT_TOL_RES))]
fn flags(eigenvalues: Vec<Complex64>, tol_res: f64) -> PyResult<Vec<(usize, usize, Vec<usize>)>> {
    let s = spectrum(eigenvalues, tol_res)?;
    let f = flag_spaces(&build_table(&s, tol_res), &s);
    Ok(f.iter().map(|(g, k, b)| (g, k, b.iter().copied().collect())).collect())
}

type Affine = (Vec<Complex64>, PyJet);

/// The sub-resonant polynomial group of a spectrum. Elements are `Jet`s of
/// order `r`; every operation validates membership.
#[pyclass(name = "SubresonantGroup", module = "pydulac", frozen)]
struct PyGroup {
    inner: SubresonantGroup,
}

impl PyGroup {
    fn element(&self, f: &PyJet) -> PyResult<SubresonantMap> {
        self.inner.element(&f.inner).map_err(err)
    }

    fn affine(&self, a: &Affine) -> PyResult<AffineExtElement> {
        Ok(AffineExtElement {
            translation: a.0.clone(),
            poly: self.element(&a.1)?,
        })
    }

    fn out(a: AffineExtElement) -> Affine {
        (a.translation, PyJet::wrap(a.poly.into_jet()))
    }
}

#[pymethods]
impl PyGroup {
    #[new]
    #[pyo3(signature = (eigenvalues, tol_res = DEFAULT_TOL_RES))]
    fn new(eigenvalues: Vec<Complex64>, tol_res: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SubresonantGroup::new(spectrum(eigenvalues, tol_res)?),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    /// Validates `f` and returns it truncated to the support.
    fn member(&self, f: &PyJet) -> PyResult<PyJet> {
        Ok(PyJet::wrap(self.element(f)?.into_jet()))
    }

    fn identity(&self) -> PyJet {
        PyJet::wrap(self.inner.identity().into_jet())
    }

    fn compose(&self, p: &PyJet, q: &PyJet) -> PyResult<PyJet> {
        let out = self.inner.compose(&self.element(p)?, &self.element(q)?).map_err(err)?;
        Ok(PyJet::wrap(out.into_jet()))
    }

    fn invert(&self, p: &PyJet) -> PyResult<PyJet> {
        let out = self.inner.invert(&self.element(p)?).map_err(err)?;
        Ok(PyJet::wrap(out.into_jet()))
    }

    fn conj_by_translation(&self, p: &PyJet, z: Vec<Complex64>) -> PyResult<PyJet> {
        let out = self.inner.conj_by_translation(&self.element(p)?, &z).map_err(err)?;
        Ok(PyJet::wrap(out.into_jet()))
    }

    /// Product in the extension by translations; elements are
    /// `(translation, jet)` pairs.
    fn tilde_compose(&self, a: Affine, b: Affine) -> PyResult<Affine> {
        let out = self.inner.tilde_compose(&self.affine(&a)?, &self.affine(&b)?).map_err(err)?;
        Ok(Self::out(out))
    }

    fn tilde_invert(&self, a: Affine) -> PyResult<Affine> {
        Ok(Self::out(self.inner.tilde_invert(&self.affine(&a)?).map_err(err)?))
    }

    /// Adjoint action of `p` on the algebra element `(v0, w)`.
    fn adjoint_action(&self, p: &PyJet, v0: Vec<Complex64>, w: &PyJet) -> PyResult<(Vec<Complex64>, PyJet)> {
        let v = self.inner.algebra_element(v0, &w.inner).map_err(err)?;
        let out = self.inner.adjoint_action(&self.element(p)?, &v).map_err(err)?;
        Ok((out.translation, PyJet::wrap(out.poly)))
    }

    #[pyo3(signature = (seed, scale = 0.5))]
    fn random_element(&self, seed: u64, scale: f64) -> PyJet {
        let mut rng = rng_from_seed(seed);
        PyJet::wrap(self.inner.random_element(&mut rng, scale).into_jet())
    }
}

/// Normalizes a contraction germ; returns a dict with `conjugator`,
/// `normal_form`, `residual`, `roundtrip_residual` and `per_degree`.
#[pyfunction]
#[pyo3(signature = (germ, order = None, mode = "resonant", tol_res = DEFAULT_TOL_RES, tol_coeff = None, tol_roundtrip = None))]
fn normalize<'py>(
    py: Python<'py>,
    germ: &PyJet,
    order: Option<usize>,
    mode: &str,
    tol_res: f64,
    tol_coeff: Option<f64>,
    tol_roundtrip: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: SupportMode = mode.parse().map_err(err)?;
    let germ = ContractionGerm::with_tol_res(germ.inner.clone(), tol_res).map_err(err)?;
    let mut opts = NormalizeOptions::default();
    opts.tol_coeff = tol_coeff.unwrap_or(opts.tol_coeff);
    opts.tol_roundtrip = tol_roundtrip.unwrap_or(opts.tol_roundtrip);
    let order = order.unwrap_or(germ.jet().order());
    let res = py.detach(|| normalizer::normalize(&germ, order, mode, &opts)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mode", res.mode.to_string())?;
    d.set_item("order", res.order)?;
    d.set_item("conjugator", PyJet::wrap(res.conjugator))?;
    d.set_item("normal_form", PyJet::wrap(res.normal_form))?;
    d.set_item("residual", res.residual)?;
    d.set_item("roundtrip_residual", res.roundtrip_residual)?;
    let per: Vec<(usize, usize, f64)> = res.per_degree.iter().map(|r| (r.degree, r.killed, r.condition)).collect();
    d.set_item("per_degree", per)?;
    Ok(d)
}

/// Largest coefficient of `π_N(Φ⁻¹ ∘ γ ∘ Φ) - normal_form`.
#[pyfunction]
fn verify(germ: &PyJet, conjugator: &PyJet, normal_form: &PyJet, order: usize) -> PyResult<f64> {
    let rep = normalizer::verify_conjugacy(&germ.inner, &conjugator.inner, &normal_form.inner, order).map_err(err)?;
    Ok(rep.residual)
}

/// Seeded random germ with known normal form; returns a dict with `germ`,
/// `conjugator` and `normal_form`.
#[pyfunction]
#[pyo3(signature = (eigenvalues, seed = 0, conj_degree = 3, noise = 0.2, order = None, tol_res = DEFAULT_TOL_RES))]
fn sample<'py>(
    py: Python<'py>,
    eigenvalues: Vec<Complex64>,
    seed: u64,
    conj_degree: usize,
    noise: f64,
    order: Option<usize>,
    tol_res: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spectrum(eigenvalues, tol_res)?;
    let opts = SampleOptions {
        seed,
        conj_degree,
        noise,
        order,
    };
    let inst = normalizer::sample_instance(&s, &opts).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("germ", PyJet::wrap(inst.germ.jet().clone()))?;
    d.set_item("conjugator", PyJet::wrap(inst.ground_truth.conjugator))?;
    d.set_item("normal_form", PyJet::wrap(inst.ground_truth.normal_form))?;
    d.set_item("order", inst.ground_truth.order)?;
    Ok(d)
}

#[pymodule]
fn pydulac(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyJet>()?;
    m.add_class::<PyGroup>()?;
    m.add_function(wrap_pyfunction!(resonances, m)?)?;
    m.add_function(wrap_pyfunction!(pattern, m)?)?;
    m.add_function(wrap_pyfunction!(flags, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}
