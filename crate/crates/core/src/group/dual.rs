use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{JetMap, Polynomial};

/// First-order perturbation `base + ε·tangent` of a jet. The tangent is a
/// polynomial vector field and may have a constant term, so translations
/// can be differentiated too.
#[derive(Clone, Debug)]
pub struct DualMap {
    pub base: JetMap,
    pub tangent: Vec<Polynomial>,
}

impl DualMap {
    pub fn new(base: JetMap, tangent: Vec<Polynomial>) -> Result<Self> {
        if tangent.len() != base.dim() || tangent.iter().any(|t| t.nvars() != base.dim()) {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                actual: tangent.len(),
            });
        }
        Ok(Self { base, tangent })
    }

    /// `(f + ε f') ∘ g = f ∘ g + ε (f' ∘ g)`.
    pub fn compose_right(&self, g: &JetMap) -> Result<DualMap> {
        let base = self.base.compose(g)?;
        let order = base.order();
        let tangent = self
            .tangent
            .iter()
            .map(|t| t.substitute(g.components(), order))
            .collect();
        Ok(DualMap { base, tangent })
    }

    /// `f ∘ (g + ε g') = f ∘ g + ε Df(g) · g'`.
    pub fn push_forward(f: &JetMap, d: &DualMap) -> Result<DualMap> {
        let base = f.compose(&d.base)?;
        let order = base.order();
        let n = f.dim();
        let mut tangent = vec![Polynomial::zero(n); n];
        for (i, out) in tangent.iter_mut().enumerate() {
            for (k, gk) in d.tangent.iter().enumerate() {
                if gk.is_zero() {
                    continue;
                }
                let partial = f.component(i).derivative(k);
                if partial.is_zero() {
                    continue;
                }
                let at_g = partial.substitute(d.base.components(), order);
                out.add_scaled(&at_g.mul_truncated(gk, order), Complex64::new(1.0, 0.0));
            }
        }
        Ok(DualMap { base, tangent })
    }
}
