//! Information matrices of invariant designs.
//!
//! Parameters are ordered as intercept, the `K` main effects, then the
//! `C(K,2)` interactions in lexicographic pair order `(1,2), (1,3), ...,
//! (K-1,K)`. For sign-flip symmetric designs the odd moments vanish and
//! the matrix splits into the main-effect block `M11` and the
//! intercept/interaction block, whose Schur complement `M22 - m2² J` has
//! three distinct eigenvalues. Determinant, inverse and regularity are all
//! read off those scalars.

use std::fmt;

use nalgebra::{DMatrix, Scalar};
use num_traits::Num;

use crate::error::{domain, DesignError, Result};
use crate::moments::{MomentSet, Moments};
use crate::orbit::{binom, OrbitDesign, MAX_FACTORS};

/// Relative tolerance below which an eigenvalue factor counts as zero.
pub const FACTOR_ZERO_TOL: f64 = 1e-12;

/// Tolerance on `|m1|`, `|m3|` for treating moments as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub k_factors: usize,
    /// `1 + K(K+1)/2`
    pub p: usize,
    pub n_inter: usize,
}

impl ModelDims {
    pub fn new(k_factors: usize) -> Result<Self> {
        if !(2..=MAX_FACTORS).contains(&k_factors) {
            return Err(domain("K", format!("{k_factors} not in 2..={MAX_FACTORS}")));
        }
        let n_inter = k_factors * (k_factors - 1) / 2;
        Ok(Self {
            k_factors,
            p: 1 + k_factors + n_inter,
            n_inter,
        })
    }
}

/// Interaction pairs in lexicographic order (0-based factor indices).
pub fn interaction_pairs(k_factors: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k_factors * k_factors.saturating_sub(1) / 2);
    for i in 0..k_factors {
        for j in i + 1..k_factors {
            out.push((i, j));
        }
    }
    out
}

/// `C(K,2) x K` incidence matrix of interactions against main effects.
pub fn build_s_matrix(k_factors: usize) -> Result<DMatrix<u8>> {
    if k_factors < 2 {
        return Err(domain("K", format!("{k_factors} < 2 has no interactions")));
    }
    let pairs = interaction_pairs(k_factors);
    Ok(DMatrix::from_fn(pairs.len(), k_factors, |r, c| {
        let (a, b) = pairs[r];
        u8::from(c == a || c == b)
    }))
}

/// Dense information matrix together with the moments it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix<T: Scalar = f64> {
    pub dims: ModelDims,
    pub dense: DMatrix<T>,
    pub moments: Moments<T>,
}

/// Assembles the `p x p` matrix from the block formulas. Works for any
/// invariant design, symmetric or not, over `f64` or exact rationals.
pub fn assemble_general<T>(k_factors: usize, m: &Moments<T>) -> Result<InfoMatrix<T>>
where
    T: Scalar + Num + Copy,
{
    let dims = ModelDims::new(k_factors)?;
    let one = T::one();
    let pairs = interaction_pairs(k_factors);
    let kf = k_factors;
    let diag_i = one - m.m2 - m.m2 + m.m4;

    let dense = DMatrix::from_fn(dims.p, dims.p, |r, c| {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        if r == 0 {
            return match c {
                0 => one,
                c if c <= kf => m.m1,
                _ => m.m2,
            };
        }
        if r <= kf {
            let i = r - 1;
            if c <= kf {
                // M11 = (1 - m2) I + m2 J
                let delta = if i == c - 1 { one } else { T::zero() };
                return (one - m.m2) * delta + m.m2;
            }
            // M12 = (m1 - m3) Sᵀ + m3 1 1ᵀ
            let (a, b) = pairs[c - kf - 1];
            let s = if i == a || i == b { one } else { T::zero() };
            return (m.m1 - m.m3) * s + m.m3;
        }
        // M22 = (1 - 2m2 + m4) I + (m2 - m4) S Sᵀ + m4 J
        let (a, b) = pairs[r - kf - 1];
        let (c1, d1) = pairs[c - kf - 1];
        let shared = [a == c1 || a == d1, b == c1 || b == d1]
            .iter()
            .filter(|&&x| x)
            .count();
        let mut sst = T::zero();
        for _ in 0..shared {
            sst = sst + one;
        }
        let delta = if r == c { one } else { T::zero() };
        diag_i * delta + (m.m2 - m.m4) * sst + m.m4
    });
    Ok(InfoMatrix {
        dims,
        dense,
        moments: *m,
    })
}

/// The determinant factors of a symmetric information matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    /// `M11`, main effects.
    M11,
    /// Eigenvalue of `M22 - m2² J` along the all-ones vector.
    LambdaOne,
    /// Eigenvalue on the rest of the range of `S Sᵀ`.
    LambdaS,
    /// Eigenvalue on the orthogonal complement of the range of `S Sᵀ`.
    LambdaI,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::M11 => "M11",
            Block::LambdaOne => "lambda_1",
            Block::LambdaS => "lambda_S",
            Block::LambdaI => "lambda_I",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigenvalues {
    pub lambda_one: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub mult_one: usize,
    pub mult_s: usize,
    pub mult_i: usize,
    /// `1 + (K-1) m2`, multiplicity one.
    pub det_m11_factor_big: f64,
    /// `1 - m2`, multiplicity `K-1`.
    pub det_m11_factor_small: f64,
    scales: [f64; 5],
}

impl BlockEigenvalues {
    /// `(block, value, multiplicity, scale)` for each determinant factor.
    fn factors(&self) -> [(Block, f64, usize, f64); 5] {
        let k1 = self.mult_s.max(1);
        [
            (Block::M11, self.det_m11_factor_big, 1, self.scales[0]),
            (Block::M11, self.det_m11_factor_small, k1, self.scales[1]),
            (
                Block::LambdaOne,
                self.lambda_one,
                self.mult_one,
                self.scales[2],
            ),
            (Block::LambdaS, self.lambda_s, self.mult_s, self.scales[3]),
            (Block::LambdaI, self.lambda_i, self.mult_i, self.scales[4]),
        ]
    }

    /// Blocks with a vanishing (or negative) factor of nonzero multiplicity.
    pub fn singular_blocks(&self) -> Vec<Block> {
        let mut out: Vec<Block> = self
            .factors()
            .iter()
            .filter(|(_, v, mult, scale)| *mult > 0 && *v <= FACTOR_ZERO_TOL * (1.0 + scale))
            .map(|(b, ..)| *b)
            .collect();
        out.dedup();
        out
    }

    pub fn is_regular(&self) -> bool {
        self.singular_blocks().is_empty()
    }
}

fn require_symmetric(m: &MomentSet) -> Result<()> {
    if m.is_symmetric(SYMMETRY_TOL) {
        Ok(())
    } else {
        Err(DesignError::Asymmetric { m1: m.m1, m3: m.m3 })
    }
}

/// Block eigenvalues for symmetric moments (`m1 = m3 = 0`).
pub fn block_eigenvalues(k_factors: usize, m: &MomentSet) -> Result<BlockEigenvalues> {
    let dims = ModelDims::new(k_factors)?;
    require_symmetric(m)?;
    let kf = k_factors as f64;
    let (m2, m4) = (m.m2, m.m4);

    let l1_terms = [
        2.0 * (kf - 2.0) * m2,
        0.5 * (kf - 2.0) * (kf - 3.0) * m4,
        -0.5 * kf * (kf - 1.0) * m2 * m2,
    ];
    let ls_terms = [(kf - 4.0) * m2, -(kf - 3.0) * m4];
    let li_terms = [-2.0 * m2, m4];
    let scale = |t: &[f64]| t.iter().map(|x| x.abs()).sum::<f64>();

    let (mult_s, mult_i) = if k_factors == 2 {
        (0, 0)
    } else {
        (k_factors - 1, k_factors * (k_factors - 3) / 2)
    };
    debug_assert_eq!(1 + mult_s + mult_i, dims.n_inter);

    Ok(BlockEigenvalues {
        lambda_one: 1.0 + l1_terms.iter().sum::<f64>(),
        lambda_s: 1.0 + ls_terms.iter().sum::<f64>(),
        lambda_i: 1.0 + li_terms.iter().sum::<f64>(),
        mult_one: 1,
        mult_s,
        mult_i,
        det_m11_factor_big: 1.0 + (kf - 1.0) * m2,
        det_m11_factor_small: 1.0 - m2,
        scales: [
            ((kf - 1.0) * m2).abs(),
            m2.abs(),
            scale(&l1_terms),
            scale(&ls_terms),
            scale(&li_terms),
        ],
    })
}

/// `log det M` from the block factorization; `-inf` when singular.
pub fn log_det_symmetric(k_factors: usize, m: &MomentSet) -> Result<f64> {
    let ev = block_eigenvalues(k_factors, m)?;
    if !ev.is_regular() {
        return Ok(f64::NEG_INFINITY);
    }
    let kf = k_factors as f64;
    // factors of multiplicity zero (K = 2, 3) may be negative; skip them
    let block = |value: f64, mult: usize| {
        if mult == 0 {
            0.0
        } else {
            mult as f64 * value.ln()
        }
    };
    Ok(ev.det_m11_factor_big.ln()
        + (kf - 1.0) * ev.det_m11_factor_small.ln()
        + ev.lambda_one.ln()
        + block(ev.lambda_s, ev.mult_s)
        + block(ev.lambda_i, ev.mult_i))
}

/// Outcome of the regularity classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    /// Blocks whose determinant factor vanishes.
    pub failing: Vec<Block>,
    /// Supported symmetric orbits (`k <= K/2`).
    pub symmetric_support: Vec<usize>,
}

/// Classifies a symmetric design as regular or singular from its support
/// alone.
///
/// `λ_1` needs two distinct symmetric orbits, `λ_S` an orbit with
/// `0 < k < K/2`, `λ_I` an orbit with `k > 1`; `M11` is singular only for a
/// design on `Õ_0` alone or on the central orbit alone.
pub fn regularity(k_factors: usize, design: &OrbitDesign) -> Result<Regularity> {
    ModelDims::new(k_factors)?;
    if design.k_factors() != k_factors {
        return Err(domain(
            "design",
            format!("has K = {}, expected {k_factors}", design.k_factors()),
        ));
    }
    if !design.is_symmetric() {
        return Err(domain(
            "design",
            "regularity classifier needs a symmetric design",
        ));
    }
    let support = design.symmetric_support();
    let kf = k_factors;
    let mut failing = Vec::new();

    let m11_singular = match support.as_slice() {
        [0] => true,
        [k] => kf.is_multiple_of(2) && 2 * k == kf,
        _ => false,
    };
    if m11_singular {
        failing.push(Block::M11);
    }
    if support.len() < 2 {
        failing.push(Block::LambdaOne);
    }
    if kf >= 3 && !support.iter().any(|&k| k > 0 && 2 * k < kf) {
        failing.push(Block::LambdaS);
    }
    if kf >= 4 && !support.iter().any(|&k| k > 1) {
        failing.push(Block::LambdaI);
    }
    Ok(Regularity {
        regular: failing.is_empty(),
        failing,
        symmetric_support: support,
    })
}

/// The pairwise support condition for nonsingularity: two distinct
/// symmetric orbits `k < l <= K/2` with `K <= 3`, `k > 0`, or
/// `2 <= l < K/2`.
pub fn support_condition(k_factors: usize, symmetric_support: &[usize]) -> bool {
    let mut s = symmetric_support.to_vec();
    s.sort_unstable();
    s.dedup();
    for (i, &k) in s.iter().enumerate() {
        for &l in &s[i + 1..] {
            if k_factors <= 3 || k > 0 || (l >= 2 && 2 * l < k_factors) {
                return true;
            }
        }
    }
    false
}

/// Scalars defining `M⁻¹` in the symmetric case:
///
/// ```text
///         [ c0       0        -c2 1ᵀ ]
/// M⁻¹ =   [ 0        M11⁻¹     0     ]
///         [ -c2 1    0         C22   ]
///
/// C22 = (I - δ_S S Sᵀ - δ_J J) / (1 - 2 m2 + m4)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseCoefficients {
    pub c0: f64,
    pub c2: f64,
    pub delta_s: f64,
    pub delta_j: f64,
    pub m11_inv_diag: f64,
    pub m11_inv_offdiag: f64,
    /// `1 - 2 m2 + m4`, the common divisor of `C22`.
    pub lambda_i: f64,
}

impl InverseCoefficients {
    /// Materializes `M⁻¹`. Intended for checks at small `K`.
    pub fn dense(&self, k_factors: usize) -> Result<DMatrix<f64>> {
        let dims = ModelDims::new(k_factors)?;
        let kf = k_factors;
        let pairs = interaction_pairs(kf);
        Ok(DMatrix::from_fn(dims.p, dims.p, |r, c| {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            if r == 0 {
                return match c {
                    0 => self.c0,
                    c if c <= kf => 0.0,
                    _ => -self.c2,
                };
            }
            if r <= kf {
                if c <= kf {
                    return if r == c {
                        self.m11_inv_diag
                    } else {
                        self.m11_inv_offdiag
                    };
                }
                return 0.0;
            }
            let (a, b) = pairs[r - kf - 1];
            let (x, y) = pairs[c - kf - 1];
            let shared = usize::from(a == x || a == y) + usize::from(b == x || b == y);
            let delta = if r == c { 1.0 } else { 0.0 };
            (delta - self.delta_s * shared as f64 - self.delta_j) / self.lambda_i
        }))
    }
}

/// Closed-form inverse coefficients. Requires `K >= 4`; below that the
/// `I`, `S Sᵀ`, `J` decomposition of the interaction block degenerates.
pub fn inverse_coefficients(k_factors: usize, m: &MomentSet) -> Result<InverseCoefficients> {
    if k_factors < 4 {
        return Err(domain(
            "K",
            format!("closed-form inverse needs K >= 4, got {k_factors}"),
        ));
    }
    let ev = block_eigenvalues(k_factors, m)?;
    let failing = ev.singular_blocks();
    if !failing.is_empty() {
        return Err(DesignError::Singular { failing });
    }
    let kf = k_factors as f64;
    let (m2, m4) = (m.m2, m.m4);
    let n_inter = binom(k_factors, 2) as f64;

    // 2 λ_1 and 2 (λ_1 + C(K,2) m2²)
    let two_lambda_one =
        2.0 + 4.0 * (kf - 2.0) * m2 + (kf - 2.0) * (kf - 3.0) * m4 - kf * (kf - 1.0) * m2 * m2;
    let two_m22_one = 2.0 + 4.0 * (kf - 2.0) * m2 + (kf - 2.0) * (kf - 3.0) * m4;

    let c2 = 2.0 * m2 / two_lambda_one;
    let c0 = 1.0 + c2 * n_inter * m2;
    let lambda_i = 1.0 - 2.0 * m2 + m4;
    let delta_s = (m2 - m4) / (1.0 + (kf - 4.0) * m2 - (kf - 3.0) * m4);
    let delta_j =
        (2.0 * m4 - 4.0 * delta_s * ((kf - 3.0) * m4 + 2.0 * m2) - 2.0 * c2 * m2 * lambda_i)
            / two_m22_one;

    let big = 1.0 + (kf - 1.0) * m2;
    let m11_inv_offdiag = -m2 / ((1.0 - m2) * big);
    let m11_inv_diag = 1.0 / (1.0 - m2) + m11_inv_offdiag;

    Ok(InverseCoefficients {
        c0,
        c2,
        delta_s,
        delta_j,
        m11_inv_diag,
        m11_inv_offdiag,
        lambda_i,
    })
}

/// `log |det A|` by LU; `-inf` for an exactly singular pivot.
pub fn dense_log_det(a: &DMatrix<f64>) -> f64 {
    let lu = a.clone().lu();
    let u = lu.u();
    u.diagonal().iter().map(|d| d.abs().ln()).sum()
}

/// Numerical rank from singular values relative to the largest.
pub fn dense_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max.max(1.0)).count()
}
