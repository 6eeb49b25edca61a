use super::{support_residual, verify_conjugacy, ContractionGerm, NormalizationResult};
use crate::error::{Error, Result};
use crate::jet::{JetMap, MultiIndex};
use crate::random::{rng_from_seed, sample_disk};
use crate::resonance::{allowed_support, build_table, Spectrum, SupportMode};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    pub seed: u64,
    /// Highest degree of the random conjugator.
    pub conj_degree: usize,
    /// Radius of the disk random coefficients are drawn from.
    pub noise: f64,
    /// Jet order of the sampled germ; `None` picks [`default_sample_order`].
    pub order: Option<usize>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            conj_degree: 3,
            noise: 0.2,
            order: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampledInstance {
    pub germ: ContractionGerm,
    /// Normal form and conjugator used to build the germ.
    pub ground_truth: NormalizationResult,
}

pub fn default_sample_order(s: &Spectrum, conj_degree: usize) -> usize {
    build_table(s, s.tol_res()).max_length.max(conj_degree).max(2)
}

/// Builds `γ = π_N(φ ∘ F ∘ φ⁻¹)` from a random resonant normal form `F`
/// with linear diagonal `s` and a random tangent-to-identity `φ`. The result
/// is fully determined by the spectrum and the options.
pub fn sample_instance(s: &Spectrum, opts: &SampleOptions) -> Result<SampledInstance> {
    if !(opts.noise >= 0.0 && opts.noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise must be non-negative, got {}", opts.noise)));
    }
    let n = s.dim();
    let table = build_table(s, s.tol_res());
    let order = opts.order.unwrap_or_else(|| default_sample_order(s, opts.conj_degree));
    if order < 2 || order < table.max_length {
        return Err(Error::InvalidArgument(format!(
            "sample order {order} must be at least max(2, r) = {}",
            table.max_length.max(2)
        )));
    }
    let support = allowed_support(&table, SupportMode::Resonant);
    let mut rng = rng_from_seed(opts.seed);

    let mut nf = JetMap::zero(n, order)?;
    for (j, beta) in s.betas().iter().enumerate() {
        nf.set(j, MultiIndex::unit(n, j), *beta)?;
        for p in support.component(j) {
            if p.as_unit() != Some(j) && p.degree() <= order {
                nf.set(j, p.clone(), sample_disk(&mut rng, opts.noise))?;
            }
        }
    }
    let mut phi = JetMap::identity(n, order)?;
    for k in 2..=opts.conj_degree.min(order) {
        for j in 0..n {
            for p in MultiIndex::all_of_degree(n, k) {
                phi.set(j, p, sample_disk(&mut rng, opts.noise))?;
            }
        }
    }
    let gamma = phi.compose(&nf)?.compose(&phi.invert()?)?;
    let germ = ContractionGerm::with_tol_res(gamma, s.tol_res())?;
    let check = verify_conjugacy(germ.jet(), &phi, &nf, order)?;
    let id = crate::linalg::CMatrix::identity(n, n);
    let ground_truth = NormalizationResult {
        mode: SupportMode::Resonant,
        order,
        conjugator: phi.clone(),
        conjugator_triangular: phi,
        triangularizer: id,
        residual: support_residual(&nf, &support),
        normal_form: nf,
        per_degree: Vec::new(),
        roundtrip_residual: check.residual,
    };
    debug_assert_eq!(ground_truth.residual, 0.0);
    Ok(SampledInstance { germ, ground_truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::{normalize, NormalizeOptions};

    #[test]
    fn reproducible_and_normalizable() {
        let s = Spectrum::from_real(&[0.5, 0.25, 0.2]).unwrap();
        let opts = SampleOptions {
            seed: 11,
            ..Default::default()
        };
        let a = sample_instance(&s, &opts).unwrap();
        let b = sample_instance(&s, &opts).unwrap();
        assert_eq!(a.germ.jet(), b.germ.jet());
        assert!(a.ground_truth.roundtrip_residual < 1e-12);
        let res = normalize(&a.germ, a.ground_truth.order, SupportMode::Resonant, &NormalizeOptions::default()).unwrap();
        assert!(res.residual <= 1e-10);
        assert!(res.roundtrip_residual <= 1e-8);
    }
}
