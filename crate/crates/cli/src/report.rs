//! Regime dispatch and the design report printed by `optimal`.

use std::fmt::Write as _;

use orbit_design::{
    asymmetric_reduce, design_moments, is_wide_lower, kw_check, log_det_symmetric, narrow_design,
    orbit_size, point_weight, wide_design, DesignError, KwReport, ModelDims, OrbitDesign, Region,
};
use serde::Serialize;

use crate::InputError;

/// Largest K accepted without `--allow-large`.
pub const SOFT_K_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Wide,
    Threshold,
    Narrow,
    FullFactorial,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Wide => "wide",
            Regime::Threshold => "threshold",
            Regime::Narrow => "narrow",
            Regime::FullFactorial => "full-factorial",
        }
    }
}

/// A constructed design and the region it was built for.
#[derive(Debug, Clone)]
pub struct Generated {
    pub region: Region,
    pub regime: Regime,
    pub ell: Option<usize>,
    pub design: OrbitDesign,
}

/// Picks the construction from `L`, `K-U` and `B_K` and runs it.
pub fn generate(
    k: usize,
    lower: usize,
    upper: Option<usize>,
    ell: Option<usize>,
    allow_large: bool,
) -> anyhow::Result<Generated> {
    if k > SOFT_K_CAP && !allow_large {
        return Err(InputError(format!(
            "K = {k} is above {SOFT_K_CAP}; pass --allow-large to proceed"
        ))
        .into());
    }
    ModelDims::new(k)?;
    if lower > k {
        return Err(InputError(format!("L = {lower} exceeds K = {k}")).into());
    }
    let upper = upper.unwrap_or(k - lower);
    let region = Region::new(k, lower, upper)?;

    if !region.symmetric() {
        if ell.is_some() {
            return Err(
                InputError("--ell applies to symmetric bounds U = K - L only".into()).into(),
            );
        }
        let spec = asymmetric_reduce(k, lower, upper)?;
        return Ok(Generated {
            region,
            regime: wide_regime(k, spec.ell),
            ell: spec.ell,
            design: spec.design,
        });
    }

    if k <= 3 || is_wide_lower(k, lower) {
        let spec = wide_design(k, lower, ell)?;
        return Ok(Generated {
            region,
            regime: wide_regime(k, spec.ell),
            ell: spec.ell,
            design: spec.design,
        });
    }
    if ell.is_some() {
        return Err(InputError(format!(
            "--ell applies only to wide bounds; L = {lower} exceeds the threshold for K = {k}"
        ))
        .into());
    }
    let spec = narrow_design(k, lower)?;
    Ok(Generated {
        region,
        regime: Regime::Narrow,
        ell: None,
        design: spec.design,
    })
}

fn wide_regime(k: usize, ell: Option<usize>) -> Regime {
    match ell {
        _ if k <= 3 => Regime::FullFactorial,
        None => Regime::Threshold,
        Some(_) => Regime::Wide,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRow {
    pub k: usize,
    pub orbit_weight: f64,
    pub point_weight: f64,
    pub orbit_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentsRow {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub k_factors: usize,
    pub lower: usize,
    pub upper: usize,
    pub p: usize,
    pub regime: Regime,
    pub ell: Option<usize>,
    pub orbits: Vec<OrbitRow>,
    pub moments: MomentsRow,
    pub log_det: f64,
    pub d_efficiency: f64,
    pub kw_max_violation: f64,
    pub kw_argmax_orbit: usize,
    pub passed: bool,
}

pub fn orbit_rows(design: &OrbitDesign) -> Result<Vec<OrbitRow>, DesignError> {
    let k = design.k_factors();
    design
        .orbit_weights()
        .into_iter()
        .map(|(j, w)| {
            Ok(OrbitRow {
                k: j,
                orbit_weight: w,
                point_weight: point_weight(design, j)?,
                orbit_size: orbit_size(k, j)? as u64,
            })
        })
        .collect()
}

/// Certifies `gen` over its region and collects the report.
pub fn build_report(gen: &Generated, tol: f64) -> anyhow::Result<(DesignReport, KwReport)> {
    let k = gen.region.k_factors();
    let p = ModelDims::new(k)?.p;
    let kw = kw_check(k, gen.region.lower(), gen.region.upper(), &gen.design, tol)?;
    let m = design_moments(&gen.design);
    // every construction is symmetric
    let log_det = log_det_symmetric(k, &m)?;
    let report = DesignReport {
        k_factors: k,
        lower: gen.region.lower(),
        upper: gen.region.upper(),
        p,
        regime: gen.regime,
        ell: gen.ell,
        orbits: orbit_rows(&gen.design)?,
        moments: MomentsRow {
            m1: m.m1,
            m2: m.m2,
            m3: m.m3,
            m4: m.m4,
        },
        log_det,
        d_efficiency: (log_det / p as f64).exp(),
        kw_max_violation: kw.max_violation,
        kw_argmax_orbit: kw.argmax_orbit,
        passed: kw.passed,
    };
    Ok((report, kw))
}

impl DesignReport {
    pub fn render(&self, tol: f64) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "K = {}, L = {}, U = {}, p = {}",
            self.k_factors, self.lower, self.upper, self.p
        );
        let ell = self.ell.map(|l| format!(", ell = {l}")).unwrap_or_default();
        let _ = writeln!(s, "regime: {}{ell}", self.regime.as_str());
        let _ = writeln!(
            s,
            "{:>5}  {:>14}  {:>14}  {:>10}",
            "orbit", "orbit_weight", "point_weight", "size"
        );
        for o in &self.orbits {
            let _ = writeln!(
                s,
                "{:>5}  {:>14.10}  {:>14.10}  {:>10}",
                o.k, o.orbit_weight, o.point_weight, o.orbit_size
            );
        }
        let m = &self.moments;
        let _ = writeln!(
            s,
            "moments: m1 = {:.3e}, m2 = {:.3e}, m3 = {:.3e}, m4 = {:.3e}",
            m.m1, m.m2, m.m3, m.m4
        );
        let _ = writeln!(
            s,
            "log det = {:.12}, D-efficiency = {:.10}",
            self.log_det, self.d_efficiency
        );
        let _ = writeln!(
            s,
            "equivalence check: max(psi - p) = {:.3e} at orbit {} (tol {tol:e}): {}",
            self.kw_max_violation,
            self.kw_argmax_orbit,
            pass_word(self.passed)
        );
        s
    }

    /// Orbit summary with 17 significant digits.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "orbit_weight", "point_weight", "orbit_size"])?;
        for o in &self.orbits {
            w.write_record([
                o.k.to_string(),
                sig17(o.orbit_weight),
                sig17(o.point_weight),
                o.orbit_size.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn pass_word(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

/// Positional decimal with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}
