pub mod error;
pub mod jet;
pub mod linalg;

pub use error::{Error, Result};
pub use jet::{JetMap, MultiIndex, Polynomial};
pub use num_complex::Complex64;
pub mod resonance;
pub mod group;
pub mod random;
pub mod normalizer;
pub mod documents;
pub mod cli;
