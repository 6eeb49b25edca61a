//! Resonance analysis of a contraction spectrum: resonances, dependence,
//! the lower-triangular linear pattern, its invariant flags and the allowed
//! monomial supports.

mod pattern;
mod spectrum;
mod support;
mod table;

pub use pattern::{flag_spaces, g1_pattern, matrix_on_pattern, FlagBases, PatternMatrix};
pub use spectrum::{
    resonance_bound, validate_spectrum, EigenGroup, GroupingWarning, Spectrum, DEFAULT_TOL_RES,
};
pub(crate) use spectrum::spectral_clusters;
pub use support::{
    allowed_support, check_membership, MembershipReport, SupportMode, SupportSet, Violation,
};
pub(crate) use table::monomial_value;
pub use table::{build_table, NearResonance, Resonance, ResonanceTable};
