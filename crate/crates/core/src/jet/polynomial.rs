use std::collections::BTreeMap;

use num_complex::Complex64;

use super::MultiIndex;

/// Sparse scalar polynomial in `nvars` complex variables. Unlike a [`JetMap`]
/// component it may carry a constant term.
///
/// [`JetMap`]: super::JetMap
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::zero(nvars), c);
        p
    }

    /// The coordinate function `z_k` (0-based).
    pub fn variable(nvars: usize, k: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::unit(nvars, k), Complex64::new(1.0, 0.0));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &MultiIndex) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Overwrites a coefficient; exact zeros are not stored.
    pub fn set(&mut self, p: MultiIndex, c: Complex64) {
        debug_assert_eq!(p.dim(), self.nvars);
        if c == Complex64::default() {
            self.terms.remove(&p);
        } else {
            self.terms.insert(p, c);
        }
    }

    pub fn remove(&mut self, p: &MultiIndex) -> Complex64 {
        self.terms.remove(p).unwrap_or_default()
    }

    /// Accumulates `c` into the coefficient of `p`.
    pub fn add_term(&mut self, p: MultiIndex, c: Complex64) {
        debug_assert_eq!(p.dim(), self.nvars);
        if c == Complex64::default() {
            return;
        }
        let entry = self.terms.entry(p);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == Complex64::default() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Highest total degree present, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&MultiIndex::zero(self.nvars))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (p, v) in &self.terms {
            out.add_term(p.clone(), v * c);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Polynomial, c: Complex64) {
        for (p, v) in &other.terms {
            self.add_term(p.clone(), v * c);
        }
    }

    pub fn truncate(&self, max_degree: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.degree() <= max_degree)
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    /// Homogeneous part of the given degree.
    pub fn homogeneous_part(&self, degree: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.degree() == degree)
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    /// Product with every term of degree above `max_degree` dropped.
    pub fn mul_truncated(&self, other: &Polynomial, max_degree: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (p, a) in &self.terms {
            let dp = p.degree();
            if dp > max_degree {
                continue;
            }
            for (q, b) in &other.terms {
                if dp + q.degree() > max_degree {
                    continue;
                }
                out.add_term(p.add(q), a * b);
            }
        }
        out
    }

    pub fn derivative(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (p, c) in &self.terms {
            let e = p.exponents()[k];
            if e == 0 {
                continue;
            }
            let mut q = p.exponents().to_vec();
            q[k] -= 1;
            out.add_term(MultiIndex::new(q), c * e as f64);
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.nvars);
        let mut acc = Complex64::default();
        for (p, c) in &self.terms {
            let mut m = *c;
            for (zk, &e) in z.iter().zip(p.exponents()) {
                if e > 0 {
                    m *= zk.powu(e);
                }
            }
            acc += m;
        }
        acc
    }

    /// `self(g_1, ..., g_n)` truncated at `max_degree`. Intermediate products
    /// are truncated as they are formed.
    pub fn substitute(&self, args: &[Polynomial], max_degree: usize) -> Polynomial {
        let mut cache = PowerCache::new(args, max_degree);
        self.substitute_cached(&mut cache)
    }

    pub(crate) fn substitute_cached(&self, cache: &mut PowerCache<'_>) -> Polynomial {
        debug_assert_eq!(cache.args.len(), self.nvars);
        let out_vars = cache.args.first().map_or(0, Polynomial::nvars);
        let mut out = Polynomial::zero(out_vars);
        for (p, c) in &self.terms {
            out.add_scaled(cache.monomial(p), *c);
        }
        out
    }
}

/// Memoised truncated monomials `g^p` of a list of substitution arguments.
/// Each new monomial costs one product with a single argument.
pub(crate) struct PowerCache<'a> {
    args: &'a [Polynomial],
    max_degree: usize,
    monomials: BTreeMap<MultiIndex, Polynomial>,
}

impl<'a> PowerCache<'a> {
    pub(crate) fn new(args: &'a [Polynomial], max_degree: usize) -> Self {
        let nvars = args.first().map_or(0, Polynomial::nvars);
        let mut monomials = BTreeMap::new();
        monomials.insert(MultiIndex::zero(args.len()), Polynomial::constant(nvars, Complex64::new(1.0, 0.0)));
        Self {
            args,
            max_degree,
            monomials,
        }
    }

    fn monomial(&mut self, p: &MultiIndex) -> &Polynomial {
        if !self.monomials.contains_key(p) {
            let k = p.max_variable().expect("the zero monomial is always cached");
            let mut e = p.exponents().to_vec();
            e[k] -= 1;
            let q = MultiIndex::new(e);
            self.monomial(&q);
            let next = self.monomials[&q].mul_truncated(&self.args[k], self.max_degree);
            self.monomials.insert(p.clone(), next);
        }
        &self.monomials[p]
    }
}
