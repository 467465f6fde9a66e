//! Optimal symmetric designs on `X_{L,K-L}`.
//!
//! With `B_K = (K - sqrt(3K-2))/2` (even `K`) or `(K - sqrt(3K))/2` (odd `K`):
//!
//! * `L <= B_K` (wide bounds): designs with `M = I_p` exist on at most three
//!   symmetric orbits, the outer `Õ_L`, an intermediate `Õ_ℓ` and the central
//!   orbit(s). Their weights are rational.
//! * `B_K < L < K/2` (narrow bounds): the optimum sits on `Õ_L` and the
//!   central orbit(s) only, with one weight found numerically.
//!
//! Comparisons against `B_K` are done in integer arithmetic.

use num_traits::{One, Zero};

use crate::error::{DesignError, Result};
use crate::info::{log_det_symmetric, ModelDims};
use crate::moments::{design_moments, exact_design_moments, orbit_moments, Moments};
use crate::optimize::{brent_minimize, brent_root};
use crate::orbit::{ExactDesign, OrbitDesign, Region};
use crate::verify::{d_efficiency, kw_check, sensitivity_poly, KwReport, KW_TOL};
use crate::Rational;

/// Discriminant under the square root of `B_K`: `3K-2` or `3K`.
fn threshold_disc(k_factors: usize) -> u64 {
    if k_factors.is_multiple_of(2) {
        3 * k_factors as u64 - 2
    } else {
        3 * k_factors as u64
    }
}

fn isqrt_exact(n: u64) -> Option<u64> {
    let r = num_integer::Roots::sqrt(&n);
    (r * r == n).then_some(r)
}

/// The threshold `B_K` separating wide from narrow bounds.
pub fn threshold_b(k_factors: usize) -> f64 {
    let kf = k_factors as f64;
    (kf - (threshold_disc(k_factors) as f64).sqrt()) / 2.0
}

/// `Some(B_K)` when the threshold is a nonnegative integer.
pub fn integer_threshold(k_factors: usize) -> Option<usize> {
    let root = isqrt_exact(threshold_disc(k_factors))?;
    let kf = k_factors as u64;
    (root <= kf && (kf - root).is_multiple_of(2)).then(|| ((kf - root) / 2) as usize)
}

pub fn is_integer_threshold(k_factors: usize) -> bool {
    integer_threshold(k_factors).is_some()
}

/// `v <= B_K`, exactly.
fn at_most_threshold(k_factors: usize, v: usize) -> bool {
    // v <= (K - √D)/2  ⇔  K - 2v >= 0 and (K - 2v)² >= D
    let gap = k_factors as i64 - 2 * v as i64;
    gap >= 0 && (gap * gap) as u64 >= threshold_disc(k_factors)
}

/// `L <= B_K`: the wide-bound construction applies.
pub fn is_wide_lower(k_factors: usize, lower: usize) -> bool {
    at_most_threshold(k_factors, lower)
}

/// `v >= B_K`, exactly.
fn at_least_threshold(k_factors: usize, v: usize) -> bool {
    let gap = k_factors as i64 - 2 * v as i64;
    gap <= 0 || (gap * gap) as u64 <= threshold_disc(k_factors)
}

/// `v <= (K - √K)/2`, the largest intermediate orbit with a valid inner
/// weight.
fn within_inner_limit(k_factors: usize, v: usize) -> bool {
    let gap = k_factors as i64 - 2 * v as i64;
    gap >= 0 && (gap * gap) as u64 >= k_factors as u64
}

/// Admissible intermediate orbits `ℓ` with `B_K <= ℓ <= (K - √K)/2`.
pub fn admissible_ells(k_factors: usize) -> Vec<usize> {
    (0..=k_factors / 2)
        .filter(|&l| at_least_threshold(k_factors, l) && within_inner_limit(k_factors, l))
        .collect()
}

/// Lower bounds `L` in the narrow regime, `B_K < L < K/2`, excluding the
/// single-orbit case `L = (K-1)/2` for odd `K`.
pub fn narrow_lowers(k_factors: usize) -> Vec<usize> {
    if k_factors < 4 {
        return Vec::new();
    }
    (0..=k_factors / 2)
        .filter(|&l| !at_most_threshold(k_factors, l) && l < central_orbit(k_factors))
        .collect()
}

/// Central orbit index `c`: `K/2` or `(K-1)/2`.
pub fn central_orbit(k_factors: usize) -> usize {
    k_factors / 2
}

/// A wide-bound design with `M = I_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WideDesignSpec {
    pub k_factors: usize,
    pub lower: usize,
    /// Intermediate orbit; `None` for the threshold design.
    pub ell: Option<usize>,
    /// Mixing weight of the outer-orbit component.
    pub alpha: Rational,
    /// Outer weight of the component design on `Õ_L`.
    pub w_lower: Rational,
    /// Outer weight of the component design on `Õ_ℓ`.
    pub w_ell: Option<Rational>,
    pub exact: ExactDesign,
    pub design: OrbitDesign,
}

impl WideDesignSpec {
    fn from_exact(
        k_factors: usize,
        lower: usize,
        ell: Option<usize>,
        alpha: Rational,
        w_lower: Rational,
        w_ell: Option<Rational>,
        exact: ExactDesign,
    ) -> Result<Self> {
        let m = exact_design_moments(&exact);
        if m != Moments::zero() {
            return Err(DesignError::Optimizer(format!(
                "construction for K = {k_factors}, L = {lower}, ell = {ell:?} left moments {m:?}"
            )));
        }
        let design = exact.to_orbit_design()?;
        Ok(Self {
            k_factors,
            lower,
            ell,
            alpha,
            w_lower,
            w_ell,
            exact,
            design,
        })
    }

    /// Orbit weight on `O_L`; zero when that orbit was dropped.
    pub fn weight_lower(&self) -> Rational {
        self.exact.weight(self.lower)
    }

    /// Orbit weight on `O_ℓ`; zero when absent or dropped.
    pub fn weight_ell(&self) -> Rational {
        self.ell
            .map(|l| self.exact.weight(l))
            .unwrap_or_else(Rational::zero)
    }

    /// Weight on each central orbit.
    pub fn weight_central(&self) -> Rational {
        self.exact.weight(central_orbit(self.k_factors))
    }
}

/// Inner weight `w̄_v` making `m2 = 0` for the design on `Õ_v` and the centre.
fn inner_weight(k_factors: usize, v: usize) -> Rational {
    let kf = k_factors as i128;
    let t = 2 * v as i128 - kf;
    if k_factors.is_multiple_of(2) {
        Rational::new(kf, 2 * t * t)
    } else {
        Rational::new(kf - 1, 2 * (t * t - 1))
    }
}

/// Symmetric exact design from outer orbit weights and the remainder on the
/// centre.
fn centred_design(k_factors: usize, outer: &[(usize, Rational)]) -> Result<ExactDesign> {
    let c = central_orbit(k_factors);
    let mut weights = Vec::new();
    let mut used = Rational::zero();
    for &(k, w) in outer {
        if w.is_zero() {
            continue;
        }
        weights.push((k, w));
        weights.push((k_factors - k, w));
        used += w + w;
    }
    let rest = Rational::one() - used;
    if k_factors.is_multiple_of(2) {
        weights.push((c, rest));
    } else {
        let half = rest / Rational::from_integer(2);
        weights.push((c, half));
        weights.push((c + 1, half));
    }
    ExactDesign::new(k_factors, weights)
}

/// The threshold design for integer `B_K`, whose information matrix is the
/// identity.
pub fn lemma2_design(k_factors: usize) -> Result<WideDesignSpec> {
    ModelDims::new(k_factors)?;
    let lower = integer_threshold(k_factors).ok_or_else(|| DesignError::Domain {
        what: "K",
        detail: format!(
            "threshold_b({k_factors}) = {:.6} is not an integer",
            threshold_b(k_factors)
        ),
    })?;
    let kf = k_factors as i128;
    let w_lower = if k_factors.is_multiple_of(2) {
        Rational::new(kf, 2 * (3 * kf - 2))
    } else {
        Rational::new(kf - 1, 2 * (3 * kf - 1))
    };
    let exact = centred_design(k_factors, &[(lower, w_lower)])?;
    WideDesignSpec::from_exact(
        k_factors,
        lower,
        None,
        Rational::one(),
        w_lower,
        None,
        exact,
    )
}

/// Wide-bound design `α ξ̄_(L) + (1-α) ξ̄_(ℓ)` with `M = I_p`.
///
/// Without `ell`, the smallest admissible intermediate orbit is used, and
/// `L = B_K` falls back to [`lemma2_design`]. `K = 2, 3` with `L = 0` give
/// the full factorial.
pub fn wide_design(k_factors: usize, lower: usize, ell: Option<usize>) -> Result<WideDesignSpec> {
    ModelDims::new(k_factors)?;
    if k_factors <= 3 {
        if lower > 0 {
            return Err(DesignError::NotEstimable {
                k: k_factors,
                lower,
            });
        }
        if ell.is_some() {
            return Err(DesignError::Domain {
                what: "ell",
                detail: format!("K = {k_factors} admits only the full factorial"),
            });
        }
        // B_2 = B_3 = 0, and the threshold design is the full factorial
        return lemma2_design(k_factors);
    }
    if !at_most_threshold(k_factors, lower) {
        return Err(DesignError::NarrowRegime {
            k: k_factors,
            lower,
            threshold: threshold_b(k_factors),
        });
    }
    let admissible = admissible_ells(k_factors);
    let ell = match ell {
        Some(l) => {
            if l <= lower || !admissible.contains(&l) {
                return Err(DesignError::Domain {
                    what: "ell",
                    detail: format!(
                        "{l} must exceed L = {lower} and lie in {admissible:?} for K = {k_factors}"
                    ),
                });
            }
            l
        }
        None => match admissible.iter().copied().find(|&l| l >= lower) {
            Some(l) if l == lower => return lemma2_design(k_factors),
            Some(l) => l,
            None => {
                return Err(DesignError::Domain {
                    what: "ell",
                    detail: format!("no admissible intermediate orbit for K = {k_factors}"),
                })
            }
        },
    };

    let kf = k_factors as i128;
    let (l, e) = (lower as i128, ell as i128);
    let te = 2 * e - kf;
    let disc = threshold_disc(k_factors) as i128;
    let alpha = Rational::new(disc - te * te, 4 * (e - l) * (kf - l - e));
    if alpha < Rational::zero() || alpha > Rational::one() {
        return Err(DesignError::Optimizer(format!(
            "mixing weight {alpha} outside [0, 1] for K = {k_factors}, L = {lower}, ell = {ell}"
        )));
    }
    let w_lower = inner_weight(k_factors, lower);
    let w_ell = inner_weight(k_factors, ell);
    let exact = centred_design(
        k_factors,
        &[
            (lower, alpha * w_lower),
            (ell, (Rational::one() - alpha) * w_ell),
        ],
    )?;
    WideDesignSpec::from_exact(
        k_factors,
        lower,
        Some(ell),
        alpha,
        w_lower,
        Some(w_ell),
        exact,
    )
}

/// Narrow-bound optimum on `Õ_L` and the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct NarrowDesignSpec {
    pub k_factors: usize,
    pub lower: usize,
    /// Optimal orbit weight on each of `O_L`, `O_{K-L}`.
    pub w_star: f64,
    pub design: OrbitDesign,
    pub log_det: f64,
    pub d_efficiency: f64,
    pub kw: KwReport,
}

impl NarrowDesignSpec {
    /// Weight on each central orbit.
    pub fn weight_central(&self) -> f64 {
        self.design.weight(central_orbit(self.k_factors))
    }
}

fn two_orbit_design(k_factors: usize, lower: usize, w: f64) -> Result<OrbitDesign> {
    let c = central_orbit(k_factors);
    let centre = if k_factors.is_multiple_of(2) {
        1.0 - 2.0 * w
    } else {
        0.5 - w
    };
    OrbitDesign::symmetric(k_factors, [(lower, w), (c, centre)])
}

/// Maximizes `log det` over the weight `w` on `Õ_L`, the rest going to the
/// central orbit(s), then certifies the optimum on `X_{L,K-L}`.
pub fn narrow_design(k_factors: usize, lower: usize) -> Result<NarrowDesignSpec> {
    ModelDims::new(k_factors)?;
    Region::symmetric_bounds(k_factors, lower)?;
    if k_factors <= 3 {
        return Err(DesignError::NotEstimable {
            k: k_factors,
            lower,
        });
    }
    if at_most_threshold(k_factors, lower) {
        return Err(DesignError::WideRegime {
            k: k_factors,
            lower,
            threshold: threshold_b(k_factors),
        });
    }
    if lower == central_orbit(k_factors) {
        return Err(DesignError::SingleOrbitRegion {
            k: k_factors,
            lower,
            upper: k_factors - lower,
        });
    }

    let c = central_orbit(k_factors);
    let outer = orbit_moments(k_factors, lower)?;
    let centre = orbit_moments(k_factors, c)?;
    // moments are affine in w: m(w) = 2w m(L) + (1 - 2w) m(c)
    let moments_at = |w: f64| Moments {
        m1: 0.0,
        m2: 2.0 * w * outer.m2 + (1.0 - 2.0 * w) * centre.m2,
        m3: 0.0,
        m4: 2.0 * w * outer.m4 + (1.0 - 2.0 * w) * centre.m4,
    };
    let neg_log_det = |w: f64| match log_det_symmetric(k_factors, &moments_at(w)) {
        Ok(v) if v.is_finite() => -v,
        _ => f64::INFINITY,
    };
    let (w_coarse, _) = brent_minimize(neg_log_det, 0.0, 0.5, 1e-10, 500);

    // d/dw log det = 2 (ψ̃(L) - ψ̃(c)); decreasing in w by concavity
    let slope = |w: f64| -> f64 {
        match sensitivity_poly(k_factors, &moments_at(w)) {
            Ok(poly) => poly.eval(lower) - poly.eval(c),
            Err(_) => f64::NAN,
        }
    };
    let mut half_width = 1e-6;
    let w_star = loop {
        let lo = (w_coarse - half_width).max(f64::MIN_POSITIVE);
        let hi = (w_coarse + half_width).min(0.5 - f64::EPSILON);
        let (s_lo, s_hi) = (slope(lo), slope(hi));
        if s_lo.is_finite() && s_hi.is_finite() && s_lo > 0.0 && s_hi < 0.0 {
            break brent_root(slope, lo, hi, 1e-16, 200)
                .ok_or_else(|| DesignError::Optimizer("root polish lost its bracket".into()))?;
        }
        if s_lo == 0.0 {
            break lo;
        }
        if s_hi == 0.0 {
            break hi;
        }
        half_width *= 4.0;
        if half_width > 0.5 {
            return Err(DesignError::Optimizer(format!(
                "no sign change of the log-det derivative around w = {w_coarse}"
            )));
        }
    };
    if !(w_star > 0.0 && w_star < 0.5) {
        return Err(DesignError::Optimizer(format!(
            "optimum w = {w_star} not interior"
        )));
    }

    let design = two_orbit_design(k_factors, lower, w_star)?;
    let m = design_moments(&design);
    let log_det = log_det_symmetric(k_factors, &m)?;
    let d_eff = d_efficiency(k_factors, &design)?;
    let kw = kw_check(k_factors, lower, k_factors - lower, &design, KW_TOL)?;
    if !kw.passed {
        return Err(DesignError::NotOptimal {
            max_violation: kw.max_violation,
            orbit: kw.argmax_orbit,
        });
    }
    Ok(NarrowDesignSpec {
        k_factors,
        lower,
        w_star,
        design,
        log_det,
        d_efficiency: d_eff,
        kw,
    })
}

/// Wide design for `X_{L,U}` with possibly unequal margins, using the
/// binding margin `max(L, K-U)`.
pub fn asymmetric_reduce(k_factors: usize, lower: usize, upper: usize) -> Result<WideDesignSpec> {
    Region::new(k_factors, lower, upper)?;
    let binding = lower.max(k_factors - upper);
    if k_factors >= 4 && !at_most_threshold(k_factors, binding) {
        return Err(DesignError::UnsupportedAsymmetric {
            k: k_factors,
            lower,
            upper,
            threshold: threshold_b(k_factors),
        });
    }
    wide_design(k_factors, binding, None)
}
