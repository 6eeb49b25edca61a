//! Seeded sampling helpers. All generators are ChaCha8 seeded from a `u64`,
//! so a seed fully determines every sampled object.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed disk of the given radius.
pub fn sample_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    if radius == 0.0 {
        return Complex64::default();
    }
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, theta)
}

pub fn sample_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<Complex64> {
    (0..dim).map(|_| sample_disk(rng, radius)).collect()
}
