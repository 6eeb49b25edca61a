use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_TOL_RES: f64 = 1e-9;

/// A block of consecutive equal eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    /// Representative value (mean of the members).
    pub value: Complex64,
    /// First row index of the block (0-based).
    pub start: usize,
    /// Multiplicity.
    pub len: usize,
}

/// Two eigenvalues closer than `10 * tol_res` but not within `tol_res`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupingWarning {
    pub first: usize,
    pub second: usize,
    pub relative_gap: f64,
}

/// Eigenvalues of a contraction's linear part, ordered by non-increasing
/// modulus with equal values adjacent.
#[derive(Clone, Debug)]
pub struct Spectrum {
    betas: Vec<Complex64>,
    groups: Vec<EigenGroup>,
    group_of: Vec<usize>,
    tol_res: f64,
    warnings: Vec<GroupingWarning>,
}

pub(crate) fn approx_equal(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

/// Clusters of equal values (indices into `values`, input order kept inside a
/// cluster), listed in the canonical order: modulus descending, then argument
/// ascending among clusters of equal modulus.
pub(crate) fn spectral_clusters(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters
            .iter_mut()
            .find(|c| approx_equal(values[c[0]], v, tol))
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    let rep = |c: &Vec<usize>| values[c[0]];
    clusters.sort_by(|a, b| {
        rep(b)
            .norm()
            .partial_cmp(&rep(a).norm())
            .unwrap_or(Ordering::Equal)
    });
    // Chain clusters of equal modulus (within tolerance) and order each chain
    // by argument.
    let mut ordered = Vec::with_capacity(clusters.len());
    let mut start = 0;
    while start < clusters.len() {
        let mut end = start + 1;
        while end < clusters.len() {
            let (m0, m1) = (rep(&clusters[end - 1]).norm(), rep(&clusters[end]).norm());
            if (m0 - m1).abs() <= tol * m0.max(m1) {
                end += 1;
            } else {
                break;
            }
        }
        let mut chain: Vec<Vec<usize>> = clusters[start..end].to_vec();
        chain.sort_by(|a, b| {
            principal_arg(rep(a))
                .partial_cmp(&principal_arg(rep(b)))
                .unwrap_or(Ordering::Equal)
        });
        ordered.extend(chain);
        start = end;
    }
    ordered
}

/// Sorts and groups a list of contraction eigenvalues.
pub fn validate_spectrum(values: &[Complex64], tol_res: f64) -> Result<Spectrum> {
    if values.is_empty() {
        return Err(Error::InvalidDimensions("empty spectrum".into()));
    }
    if !(tol_res > 0.0 && tol_res.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol_res must be positive, got {tol_res}")));
    }
    for v in values {
        let m = v.norm();
        if !m.is_finite() || m == 0.0 || m >= 1.0 {
            return Err(Error::NotContraction {
                value: format!("{v}"),
                modulus: m,
            });
        }
    }
    let clusters = spectral_clusters(values, tol_res);
    let mut betas = Vec::with_capacity(values.len());
    let mut groups = Vec::with_capacity(clusters.len());
    let mut group_of = Vec::with_capacity(values.len());
    for (g, c) in clusters.iter().enumerate() {
        let start = betas.len();
        let mut sum = Complex64::default();
        for &i in c {
            betas.push(values[i]);
            group_of.push(g);
            sum += values[i];
        }
        groups.push(EigenGroup {
            value: sum / c.len() as f64,
            start,
            len: c.len(),
        });
    }
    let mut warnings = Vec::new();
    for i in 0..betas.len() {
        for j in (i + 1)..betas.len() {
            if group_of[i] == group_of[j] {
                continue;
            }
            let gap = relative_gap(betas[i], betas[j]);
            if gap <= 10.0 * tol_res {
                warnings.push(GroupingWarning {
                    first: i,
                    second: j,
                    relative_gap: gap,
                });
            }
        }
    }
    Ok(Spectrum {
        betas,
        groups,
        group_of,
        tol_res,
        warnings,
    })
}

impl Spectrum {
    pub fn new(values: &[Complex64]) -> Result<Self> {
        validate_spectrum(values, DEFAULT_TOL_RES)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(&v)
    }

    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len).collect()
    }

    /// Group index (0-based) of row `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn tol_res(&self) -> f64 {
        self.tol_res
    }

    pub fn warnings(&self) -> &[GroupingWarning] {
        &self.warnings
    }

    /// Upper bound on resonance lengths: `|beta^p| <= |beta_1|^{|p|}` and
    /// `|beta^p| >= |beta_n|` force `|p| <= ln|beta_n| / ln|beta_1|`. The
    /// relative tolerance is folded in so float round-off cannot push an exact
    /// integer ratio below the next integer.
    pub fn resonance_bound(&self) -> usize {
        self.length_bound(self.tol_res)
    }

    pub(crate) fn length_bound(&self, tol: f64) -> usize {
        let top = self.betas[0].norm().ln();
        let bottom = self.betas[self.betas.len() - 1].norm().ln();
        let ratio = (bottom + (1.0 - tol.min(0.5)).ln()) / top;
        (ratio.floor() as usize).max(1)
    }
}

pub fn resonance_bound(s: &Spectrum) -> usize {
    s.resonance_bound()
}
