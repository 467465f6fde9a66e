//! D-optimal approximate designs for `K`-factor two-level models with all
//! two-factor interactions, when the number of active factors is restricted
//! to `[L, U]`.
//!
//! Designs are invariant under factor permutations, so they are described by
//! orbit weights (see [`orbit`]). The information matrix of such a design
//! depends only on four moments ([`moments`]) and, for sign-flip symmetric
//! designs, has a chess-board structure with closed-form determinant and
//! inverse ([`info`]). [`construct`] builds the optimal designs for wide and
//! narrow bounds and [`verify`] certifies them with the Kiefer-Wolfowitz
//! equivalence theorem.

pub mod construct;
pub mod error;
pub mod info;
pub mod moments;
mod optimize;
pub mod orbit;
pub mod verify;

pub use construct::{
    admissible_ells, asymmetric_reduce, central_orbit, integer_threshold, is_integer_threshold,
    is_wide_lower, lemma2_design, narrow_design, narrow_lowers, threshold_b, wide_design,
    NarrowDesignSpec, WideDesignSpec,
};
pub use error::{DesignError, Result};
pub use info::{
    assemble_general, block_eigenvalues, build_s_matrix, inverse_coefficients, log_det_symmetric,
    regularity, Block, BlockEigenvalues, InfoMatrix, InverseCoefficients, ModelDims, Regularity,
};
pub use moments::{design_moments, exact_design_moments, orbit_moment, MomentSet, Moments};
pub use orbit::{
    active_count, enumerate_orbit, orbit_size, point_weight, DesignPoint, ExactDesign, OrbitDesign,
    Region,
};
pub use verify::{
    brute_force_info, d_efficiency, kw_check, sensitivity_poly, KwReport, SensitivityMethod,
    SensitivityPoly, KW_TOL,
};

/// Exact rational scalar used for moment and weight arithmetic.
pub type Rational = num_rational::Ratio<i128>;

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
