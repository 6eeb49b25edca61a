use std::collections::BTreeSet;

use num_complex::Complex64;

use super::Spectrum;
use crate::jet::MultiIndex;

/// A resonance `beta_j = beta^p` (0-based component `j`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Resonance {
    pub component: usize,
    pub exponent: MultiIndex,
}

/// A relation that misses the resonance tolerance by less than a factor ten.
#[derive(Clone, Debug, PartialEq)]
pub struct NearResonance {
    pub component: usize,
    pub exponent: MultiIndex,
    pub relative_gap: f64,
}

/// Resonance structure of a spectrum.
#[derive(Clone, Debug)]
pub struct ResonanceTable {
    dim: usize,
    /// Maximal resonance length `r`, trivial resonances included.
    pub max_length: usize,
    /// `r_j` per component.
    pub lengths: Vec<usize>,
    /// Every resonance found, trivial ones (`p = e_k`, `beta_k = beta_j`) included.
    pub resonances: Vec<Resonance>,
    /// `P_j`: resonances of `beta_j` other than `e_k` for `k >= j`.
    pub p_sets: Vec<BTreeSet<MultiIndex>>,
    /// `Q_j`: nonzero indices dominated by an element of `P_j`.
    pub q_sets: Vec<BTreeSet<MultiIndex>>,
    /// `dependence[a][b]`: group `a` depends on group `b`.
    pub dependence: Vec<Vec<bool>>,
    /// Earlier groups each group depends on; the full space `V_{0,0}` is
    /// implicit.
    pub dependence_indices: Vec<Vec<usize>>,
    pub near_resonances: Vec<NearResonance>,
    pub tol_res: f64,
}

impl ResonanceTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_resonant(&self, component: usize, p: &MultiIndex) -> bool {
        self.resonances
            .binary_search(&Resonance {
                component,
                exponent: p.clone(),
            })
            .is_ok()
    }

    /// `true` when no component has a nontrivial resonance.
    pub fn is_non_resonant(&self) -> bool {
        self.p_sets.iter().all(BTreeSet::is_empty)
    }
}

pub(crate) fn monomial_value(betas: &[Complex64], p: &MultiIndex) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (b, &e) in betas.iter().zip(p.exponents()) {
        if e > 0 {
            v *= b.powu(e);
        }
    }
    v
}

/// Enumerates every exponent `p` with `1 <= |p| <= max_len` and
/// `|beta^p| >= floor`, pruning on the monotone decrease of partial products.
fn enumerate_candidates(betas: &[Complex64], max_len: usize, floor: f64) -> Vec<MultiIndex> {
    fn rec(
        betas: &[Complex64],
        k: usize,
        left: usize,
        modulus: f64,
        floor: f64,
        cur: &mut Vec<u32>,
        out: &mut Vec<MultiIndex>,
    ) {
        if k == betas.len() {
            if cur.iter().any(|&e| e > 0) {
                out.push(MultiIndex::new(cur.clone()));
            }
            return;
        }
        let m = betas[k].norm();
        let mut e = 0;
        let mut md = modulus;
        loop {
            cur[k] = e as u32;
            rec(betas, k + 1, left - e, md, floor, cur, out);
            if e == left {
                break;
            }
            md *= m;
            if md < floor {
                break;
            }
            e += 1;
        }
        cur[k] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; betas.len()];
    rec(betas, 0, max_len, 1.0, floor, &mut cur, &mut out);
    out.sort();
    out
}

/// Builds the resonance table of `s` at relative tolerance `tol_res`.
pub fn build_table(s: &Spectrum, tol_res: f64) -> ResonanceTable {
    let n = s.dim();
    let betas = s.betas();
    let near_tol = 10.0 * tol_res;
    let min_mod = betas.iter().map(|b| b.norm()).fold(f64::INFINITY, f64::min);
    let search_len = s.length_bound(near_tol);
    let candidates = enumerate_candidates(betas, search_len, min_mod * (1.0 - near_tol));

    let mut resonances = Vec::new();
    let mut near_resonances = Vec::new();
    for p in &candidates {
        let v = monomial_value(betas, p);
        for (j, b) in betas.iter().enumerate() {
            let gap = (b - v).norm() / b.norm();
            if gap <= tol_res {
                resonances.push(Resonance {
                    component: j,
                    exponent: p.clone(),
                });
            } else if gap <= near_tol {
                near_resonances.push(NearResonance {
                    component: j,
                    exponent: p.clone(),
                    relative_gap: gap,
                });
            }
        }
    }
    resonances.sort();

    let mut lengths = vec![1usize; n];
    let mut p_sets = vec![BTreeSet::new(); n];
    for r in &resonances {
        let j = r.component;
        lengths[j] = lengths[j].max(r.exponent.degree());
        let trivial_upper = matches!(r.exponent.as_unit(), Some(k) if k >= j);
        if !trivial_upper {
            p_sets[j].insert(r.exponent.clone());
        }
    }
    let max_length = lengths.iter().copied().max().unwrap_or(1);
    let q_sets: Vec<BTreeSet<MultiIndex>> = p_sets
        .iter()
        .map(|ps| ps.iter().flat_map(MultiIndex::nonzero_divisors).collect())
        .collect();

    let m = s.groups().len();
    let mut dependence = vec![vec![false; m]; m];
    for (a, row) in dependence.iter_mut().enumerate() {
        row[a] = true;
    }
    for r in &resonances {
        let a = s.group_of(r.component);
        for (l, &e) in r.exponent.exponents().iter().enumerate() {
            if e > 0 {
                dependence[a][s.group_of(l)] = true;
            }
        }
    }
    let dependence_indices = (0..m)
        .map(|a| (0..a).filter(|&b| dependence[a][b]).collect())
        .collect();

    ResonanceTable {
        dim: n,
        max_length,
        lengths,
        resonances,
        p_sets,
        q_sets,
        dependence,
        dependence_indices,
        near_resonances,
        tol_res,
    }
}
