//! Plain-text regeneration of the wide- and narrow-bound design tables,
//! rounded to four decimals.

use std::ops::RangeInclusive;

use orbit_design::{
    admissible_ells, central_orbit, integer_threshold, is_wide_lower, lemma2_design, narrow_design,
    narrow_lowers, threshold_b, wide_design, Rational, Result, WideDesignSpec,
};

pub const WIDE_HEADER: &str = "K L ell c w_L w_ell w_c B_K";
pub const NARROW_HEADER: &str = "K L c w_L w_c D_eff B_K";

fn cell(x: f64) -> String {
    if x == 0.0 {
        "-".to_string()
    } else {
        format!("{x:.4}")
    }
}

fn rcell(x: Rational) -> String {
    cell(*x.numer() as f64 / *x.denom() as f64)
}

fn b_cell(k: usize) -> String {
    format!("{:.2}", threshold_b(k))
}

fn wide_row(spec: &WideDesignSpec) -> String {
    let k = spec.k_factors;
    format!(
        "{k} {} {} {} {} {} {} {}",
        spec.lower,
        spec.ell.map_or("-".to_string(), |l| l.to_string()),
        central_orbit(k),
        rcell(spec.weight_lower()),
        rcell(spec.weight_ell()),
        rcell(spec.weight_central()),
        b_cell(k)
    )
}

/// Rows for one K: every `L <= B_K`, the threshold design when `L = B_K`,
/// and one row per admissible `ℓ > L`.
pub fn wide_rows(k: usize) -> Result<Vec<String>> {
    let mut rows = Vec::new();
    let ells = admissible_ells(k);
    for lower in (0..=k / 2).filter(|&l| is_wide_lower(k, l)) {
        if integer_threshold(k) == Some(lower) {
            rows.push(wide_row(&lemma2_design(k)?));
        }
        for &ell in ells.iter().filter(|&&l| l > lower) {
            rows.push(wide_row(&wide_design(k, lower, Some(ell))?));
        }
    }
    Ok(rows)
}

pub fn narrow_rows(k: usize) -> Result<Vec<String>> {
    narrow_lowers(k)
        .into_iter()
        .map(|lower| {
            let d = narrow_design(k, lower)?;
            Ok(format!(
                "{k} {lower} {} {} {} {} {}",
                central_orbit(k),
                cell(d.w_star),
                cell(d.weight_central()),
                cell(d.d_efficiency),
                b_cell(k)
            ))
        })
        .collect()
}

pub fn wide_table(ks: RangeInclusive<usize>) -> Result<String> {
    let mut out = String::from(WIDE_HEADER);
    out.push('\n');
    for k in ks {
        for row in wide_rows(k)? {
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn narrow_table(ks: RangeInclusive<usize>) -> Result<String> {
    let mut out = String::from(NARROW_HEADER);
    out.push('\n');
    for k in ks {
        for row in narrow_rows(k)? {
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}
