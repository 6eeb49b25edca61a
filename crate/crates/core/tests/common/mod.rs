//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dulac::resonance::{Spectrum, SupportSet};
use dulac::{Complex64, JetMap, MultiIndex};
use proptest::prelude::*;
use rand::Rng;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn real_spectrum(values: &[f64]) -> Spectrum {
    Spectrum::from_real(values).unwrap()
}

/// Spectra used across the property and acceptance suites.
pub fn spectrum_fixtures() -> Vec<(&'static str, Spectrum)> {
    let a: f64 = 0.5;
    vec![
        ("(1/2, 1/4)", real_spectrum(&[0.5, 0.25])),
        ("(1/2, 1/3)", real_spectrum(&[0.5, 1.0 / 3.0])),
        ("(0.6, 0.216)", real_spectrum(&[0.6, 0.216])),
        ("(0.5, 0.3+0.1i)", Spectrum::new(&[c(0.5), Complex64::new(0.3, 0.1)]).unwrap()),
        ("(a, a^3, a^5)", real_spectrum(&[a, a.powi(3), a.powi(5)])),
        ("(1/2, 1/3, 1/6)", real_spectrum(&[0.5, 1.0 / 3.0, 1.0 / 6.0])),
        ("(1/2, 1/2, 1/4)", real_spectrum(&[0.5, 0.5, 0.25])),
        ("(1/2, 1/4, 1/8)", real_spectrum(&[0.5, 0.25, 0.125])),
    ]
}

/// All exponent vectors of length `n` with total degree in `1..=max`.
pub fn exponents_up_to(n: usize, max: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            if cur.iter().any(|&e| e > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur.push(e as u32);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max, &mut Vec::new(), &mut out);
    out
}

pub fn power(betas: &[Complex64], p: &[u32]) -> Complex64 {
    let mut v = c(1.0);
    for (b, &e) in betas.iter().zip(p) {
        for _ in 0..e {
            v *= b;
        }
    }
    v
}

/// Every `(j, p)` with `|beta_j - beta^p| <= tol |beta_j|` and `|p| <= max`,
/// by exhaustive scan.
pub fn brute_force_resonances(betas: &[Complex64], tol: f64, max: usize) -> BTreeSet<(usize, Vec<u32>)> {
    let mut out = BTreeSet::new();
    for p in exponents_up_to(betas.len(), max) {
        let v = power(betas, &p);
        for (j, b) in betas.iter().enumerate() {
            if (b - v).norm() <= tol * b.norm() {
                out.insert((j, p.clone()));
            }
        }
    }
    out
}

/// `{q != 0 : q <= p componentwise for some p in ps}`.
pub fn dominance_closure(ps: &BTreeSet<MultiIndex>) -> BTreeSet<MultiIndex> {
    let mut out = BTreeSet::new();
    for p in ps {
        let e = p.exponents();
        for q in exponents_up_to(e.len(), p.degree()) {
            if q.iter().zip(e).all(|(a, b)| a <= b) {
                out.insert(MultiIndex::new(q));
            }
        }
    }
    out
}

/// Largest coefficient of `f` outside `sup`.
pub fn outside_support(f: &JetMap, sup: &SupportSet) -> f64 {
    f.terms()
        .filter(|(j, p, _)| !sup.contains(*j, p))
        .map(|(_, _, c)| c.norm())
        .fold(0.0, f64::max)
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<Complex64> {
    dulac::random::sample_vector(rng, n, radius)
}

/// Random invertible matrix with the given lower-triangular mask.
pub fn random_on_pattern<R: Rng>(rng: &mut R, p: &dulac::resonance::PatternMatrix) -> dulac::linalg::CMatrix {
    dulac::resonance::matrix_on_pattern(p, |i, j| {
        if i == j {
            c(1.0) + dulac::random::sample_disk(rng, 0.5)
        } else {
            dulac::random::sample_disk(rng, 1.0)
        }
    })
}

/// A jet of the given shape whose linear part is `I + 0.3 * noise`.
pub fn build_jet(n: usize, order: usize, coeffs: &[(f64, f64)]) -> JetMap {
    let mut f = JetMap::identity(n, order).unwrap();
    let mut it = coeffs.iter().cycle();
    for j in 0..n {
        for p in exponents_up_to(n, order) {
            let (re, im) = *it.next().unwrap();
            let deg: u32 = p.iter().sum();
            let scale = if deg == 1 { 0.3 } else { 1.0 };
            f.add_term(j, MultiIndex::new(p), Complex64::new(re, im) * scale).unwrap();
        }
    }
    f
}

pub fn arb_jet(n: usize, order: usize) -> impl Strategy<Value = JetMap> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..64).prop_map(move |cs| build_jet(n, order, &cs))
}

pub fn arb_shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=4)
}

pub fn arb_point(n: usize, radius: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(move |v| v.into_iter().map(|(a, b)| Complex64::new(a, b) * (radius / 2f64.sqrt())).collect())
}
