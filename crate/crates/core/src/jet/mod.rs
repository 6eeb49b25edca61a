//! Truncated polynomial maps of `C^n` fixing the origin and their group
//! operations under truncated composition.

mod map;
mod multi_index;
mod polynomial;

pub use map::{JetMap, DEFAULT_COND_THRESHOLD, DEFAULT_TOL_COEFF};
pub use multi_index::MultiIndex;
pub use polynomial::Polynomial;
