//! Optimality certificates.
//!
//! A design `ξ*` is D-optimal on a region iff the sensitivity
//! `ψ(x) = f(x)ᵀ M(ξ*)⁻¹ f(x)` never exceeds `p` there. For invariant designs
//! `ψ` is constant on orbits, and for symmetric ones it is an even quartic in
//! `t = 2k - K`, so checking a region is a finite scan over its orbits.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{domain, DesignError, Result};
use crate::info::{
    assemble_general, dense_log_det, inverse_coefficients, log_det_symmetric, regularity,
    InfoMatrix, ModelDims,
};
use crate::moments::{design_moments, exact_design_moments, MomentSet};
use crate::orbit::{binom, enumerate_orbit, ExactDesign, OrbitDesign, Region};
use crate::Rational;

/// Default tolerance on `max_k ψ̃(k) - p`.
pub const KW_TOL: f64 = 1e-9;

/// Largest `K` the brute-force oracle accepts without an override.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Largest `K` for the exact-rational brute-force oracle.
pub const EXACT_BRUTE_FORCE_LIMIT: usize = 8;

/// `ψ̃(k) = a4 t⁴ + a2 t² + a0` with `t = 2k - K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPoly {
    pub k_factors: usize,
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
}

impl SensitivityPoly {
    pub fn eval(&self, k: usize) -> f64 {
        let t = 2.0 * k as f64 - self.k_factors as f64;
        let t2 = t * t;
        (self.a4 * t2 + self.a2) * t2 + self.a0
    }
}

/// Sensitivity polynomial of a regular symmetric design (`K >= 4`).
///
/// Uses `xᵀx = K`, `x̃ᵀx̃ = K(K-1)/2`, `xᵀ1 = t`, `x̃ᵀ1 = (t² - K)/2` and
/// `x̃ᵀ S Sᵀ x̃ = (K-2) t² + K` for `x` in `O_k`.
pub fn sensitivity_poly(k_factors: usize, m: &MomentSet) -> Result<SensitivityPoly> {
    let ic = inverse_coefficients(k_factors, m)?;
    let kf = k_factors as f64;
    let m2 = m.m2;
    let li = ic.lambda_i;

    let a4 = -ic.delta_j / (4.0 * li);
    let a2 = -(ic.c2 + m2 / ((1.0 - m2) * (1.0 + (kf - 1.0) * m2)) + ic.delta_s * (kf - 2.0) / li
        - ic.delta_j * kf / (2.0 * li));
    // -2 c2 x̃ᵀ1 = -c2 t² + c2 K contributes the c2 K term
    let a0 = ic.c0 + ic.c2 * kf + kf / (1.0 - m2) + kf * (kf - 1.0) / (2.0 * li)
        - ic.delta_s * kf / li
        - ic.delta_j * kf * kf / (4.0 * li);

    Ok(SensitivityPoly {
        k_factors,
        a0,
        a2,
        a4,
    })
}

/// How the per-orbit sensitivities were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityMethod {
    /// Closed-form quartic from the chess-board inverse.
    Polynomial,
    /// Dense inverse of the assembled matrix (asymmetric designs, `K < 4`).
    Dense,
}

/// Result of a Kiefer-Wolfowitz check over a region.
#[derive(Debug, Clone, PartialEq)]
pub struct KwReport {
    pub k_factors: usize,
    pub lower: usize,
    pub upper: usize,
    pub p: usize,
    pub tolerance: f64,
    /// `ψ̃(k)` for every orbit of the region.
    pub per_orbit: BTreeMap<usize, f64>,
    /// `max_k ψ̃(k) - p` over the region.
    pub max_violation: f64,
    pub argmax_orbit: usize,
    /// Largest `|ψ̃(k) - p|` over supported orbits.
    pub support_gap: f64,
    pub method: SensitivityMethod,
    pub poly: Option<SensitivityPoly>,
    pub passed: bool,
}

/// Dense `f(x)ᵀ M⁻¹ f(x)` at the first point of every orbit in `orbits`.
fn dense_sensitivities(
    info: &InfoMatrix,
    orbits: impl Iterator<Item = usize>,
) -> Result<BTreeMap<usize, f64>> {
    let kf = info.dims.k_factors;
    let chol = info
        .dense
        .clone()
        .cholesky()
        .ok_or(DesignError::Singular { failing: vec![] })?;
    let mut out = BTreeMap::new();
    for k in orbits {
        let x = enumerate_orbit(kf, k)?.next().expect("orbits are nonempty");
        let f = nalgebra::DVector::from_iterator(
            info.dims.p,
            x.regression_vector().into_iter().map(f64::from),
        );
        let sol = chol.solve(&f);
        out.insert(k, f.dot(&sol));
    }
    Ok(out)
}

/// Checks `ψ̃(k) <= p + tol` on every orbit of `X_{L,U}`.
pub fn kw_check(
    k_factors: usize,
    lower: usize,
    upper: usize,
    design: &OrbitDesign,
    tol: f64,
) -> Result<KwReport> {
    let dims = ModelDims::new(k_factors)?;
    let region = Region::new(k_factors, lower, upper)?;
    if design.k_factors() != k_factors {
        return Err(domain(
            "design",
            format!("has K = {}, expected {k_factors}", design.k_factors()),
        ));
    }
    if !design.support_within(&region) {
        return Err(DesignError::InvalidDesign(format!(
            "support {:?} leaves the region [{lower}, {upper}]",
            design.support()
        )));
    }

    let (per_orbit, method, poly) = if design.is_symmetric() {
        let reg = regularity(k_factors, design)?;
        if !reg.regular {
            return Err(DesignError::Singular {
                failing: reg.failing,
            });
        }
        let m = design_moments(design);
        if k_factors >= 4 {
            let poly = sensitivity_poly(k_factors, &m)?;
            let per = region.orbits().map(|k| (k, poly.eval(k))).collect();
            (per, SensitivityMethod::Polynomial, Some(poly))
        } else {
            let info = assemble_general(k_factors, &m)?;
            (
                dense_sensitivities(&info, region.orbits())?,
                SensitivityMethod::Dense,
                None,
            )
        }
    } else {
        let info = assemble_general(k_factors, &design_moments(design))?;
        (
            dense_sensitivities(&info, region.orbits())?,
            SensitivityMethod::Dense,
            None,
        )
    };

    let p = dims.p as f64;
    let (argmax_orbit, max_violation) = per_orbit.iter().map(|(&k, &psi)| (k, psi - p)).fold(
        (lower, f64::NEG_INFINITY),
        |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        },
    );
    let support_gap = design
        .support()
        .into_iter()
        .map(|k| (per_orbit[&k] - p).abs())
        .fold(0.0, f64::max);

    Ok(KwReport {
        k_factors,
        lower,
        upper,
        p: dims.p,
        tolerance: tol,
        per_orbit,
        max_violation,
        argmax_orbit,
        support_gap,
        method,
        poly,
        passed: max_violation <= tol,
    })
}

/// `det(M)^{1/p}`, the efficiency relative to the full factorial; 0 when
/// singular.
pub fn d_efficiency(k_factors: usize, design: &OrbitDesign) -> Result<f64> {
    let dims = ModelDims::new(k_factors)?;
    let m = design_moments(design);
    let log_det = if design.is_symmetric() {
        log_det_symmetric(k_factors, &m)?
    } else {
        let info = assemble_general(k_factors, &m)?;
        match info.dense.clone().cholesky() {
            Some(_) => dense_log_det(&info.dense),
            None => f64::NEG_INFINITY,
        }
    };
    Ok((log_det / dims.p as f64).exp())
}

/// `Σ_{x ∈ O_k} f(x) f(x)ᵀ` by enumeration; entries are integers.
pub fn orbit_outer_sum(k_factors: usize, k: usize) -> Result<DMatrix<i64>> {
    let dims = ModelDims::new(k_factors)?;
    let mut acc = DMatrix::<i64>::zeros(dims.p, dims.p);
    for x in enumerate_orbit(k_factors, k)? {
        let f = x.regression_vector();
        for (r, &fr) in f.iter().enumerate() {
            for (c, &fc) in f.iter().enumerate().skip(r) {
                acc[(r, c)] += i64::from(fr * fc);
            }
        }
    }
    for r in 0..dims.p {
        for c in 0..r {
            acc[(r, c)] = acc[(c, r)];
        }
    }
    Ok(acc)
}

/// Brute-force `Σ_x ξ(x) f(x) f(x)ᵀ` for `K <= 12`.
pub fn brute_force_info(k_factors: usize, design: &OrbitDesign) -> Result<InfoMatrix> {
    brute_force_info_with(k_factors, design, false)
}

/// As [`brute_force_info`], optionally lifting the size guard.
pub fn brute_force_info_with(
    k_factors: usize,
    design: &OrbitDesign,
    allow_large: bool,
) -> Result<InfoMatrix> {
    if k_factors > BRUTE_FORCE_LIMIT && !allow_large {
        return Err(DesignError::CostGuard {
            k: k_factors,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let dims = ModelDims::new(k_factors)?;
    if design.k_factors() != k_factors {
        return Err(domain("design", "factor count mismatch"));
    }
    let p = dims.p;
    // Neumaier-compensated accumulation per entry
    let mut sum = DMatrix::<f64>::zeros(p, p);
    let mut comp = DMatrix::<f64>::zeros(p, p);
    for (k, w) in design.orbit_weights() {
        let scale = w / binom(k_factors, k) as f64;
        let outer = orbit_outer_sum(k_factors, k)?;
        for (i, &o) in outer.iter().enumerate() {
            let term = scale * o as f64;
            let s = sum[i];
            let t = s + term;
            comp[i] += if s.abs() >= term.abs() {
                (s - t) + term
            } else {
                (term - t) + s
            };
            sum[i] = t;
        }
    }
    let dense = sum + comp;
    let moments = MomentSet {
        m1: dense[(0, 1)],
        m2: dense[(0, k_factors + 1)],
        m3: if k_factors >= 3 {
            dense[(3, k_factors + 1)]
        } else {
            0.0
        },
        m4: if k_factors >= 4 {
            dense[(k_factors + 1, p - 1)]
        } else {
            0.0
        },
    };
    Ok(InfoMatrix {
        dims,
        dense,
        moments,
    })
}

/// Brute-force information matrix in exact rational arithmetic, `K <= 8`.
pub fn brute_force_info_exact(k_factors: usize, design: &ExactDesign) -> Result<DMatrix<Rational>> {
    if k_factors > EXACT_BRUTE_FORCE_LIMIT {
        return Err(DesignError::CostGuard {
            k: k_factors,
            limit: EXACT_BRUTE_FORCE_LIMIT,
        });
    }
    let dims = ModelDims::new(k_factors)?;
    let mut acc = DMatrix::from_element(dims.p, dims.p, Rational::from_integer(0));
    for (k, w) in design.iter() {
        let scale = w / Rational::from_integer(binom(k_factors, k) as i128);
        let outer = orbit_outer_sum(k_factors, k)?;
        for (a, &o) in acc.iter_mut().zip(outer.iter()) {
            *a += scale * Rational::from_integer(i128::from(o));
        }
    }
    Ok(acc)
}

/// Information matrix of an exact design, assembled from its exact moments.
pub fn exact_info(k_factors: usize, design: &ExactDesign) -> Result<InfoMatrix<Rational>> {
    assemble_general(k_factors, &exact_design_moments(design))
}
