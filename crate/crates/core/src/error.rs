use thiserror::Error;

use crate::info::Block;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("{what} out of range: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("binomial C({n}, {k}) overflows exact integer arithmetic (K must be at most 64)")]
    Overflow { n: usize, k: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("information matrix is singular (failing blocks: {})", fmt_blocks(.failing))]
    Singular { failing: Vec<Block> },

    #[error("moments are not symmetric (m1 = {m1:e}, m3 = {m3:e}); the chess-board closed forms do not apply")]
    Asymmetric { m1: f64, m3: f64 },

    #[error("K = {k} with L = {lower}: the model is not estimable; every orbit of the full 2^K factorial is required")]
    NotEstimable { k: usize, lower: usize },

    #[error("L = {lower} exceeds the threshold B_K = {threshold:.4} for K = {k}; use the narrow-bound construction")]
    NarrowRegime {
        k: usize,
        lower: usize,
        threshold: f64,
    },

    #[error("L = {lower} does not exceed the threshold B_K = {threshold:.4} for K = {k}; use the wide-bound construction")]
    WideRegime {
        k: usize,
        lower: usize,
        threshold: f64,
    },

    #[error("region [{lower}, {upper}] for K = {k} contains a single symmetric orbit; no design on it is regular")]
    SingleOrbitRegion {
        k: usize,
        lower: usize,
        upper: usize,
    },

    #[error("asymmetric bounds [{lower}, {upper}] for K = {k} are narrower than the threshold B_K = {threshold:.4}; not supported")]
    UnsupportedAsymmetric {
        k: usize,
        lower: usize,
        upper: usize,
        threshold: f64,
    },

    #[error("brute-force enumeration refused for K = {k} (limit {limit}); pass the override to force it")]
    CostGuard { k: usize, limit: usize },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("Kiefer-Wolfowitz check failed: max violation {max_violation:e} at orbit {orbit}")]
    NotOptimal { max_violation: f64, orbit: usize },
}

fn fmt_blocks(blocks: &[Block]) -> String {
    blocks
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = DesignError> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> DesignError {
    DesignError::Domain {
        what,
        detail: detail.into(),
    }
}
