//! Library side of the `orbit-design` binary.
//!
//! Exit codes: 0 success or pass, 1 internal failure, 2 usage or input
//! error, 3 singular or non-estimable region, 4 equivalence check failed.

pub mod args;
pub mod design_file;
pub mod report;
pub mod tables;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use anyhow::Context;
use orbit_design::{
    enumerate_orbit, kw_check, point_weight, DesignError, KwReport, Region, SensitivityMethod,
};

use args::{Cli, Command, ExpandArgs, OptimalArgs, TablesArgs, VerifyArgs, Which};
use design_file::DesignFile;
use report::{build_report, generate, pass_word};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SINGULAR: u8 = 3;
pub const EXIT_NOT_OPTIMAL: u8 = 4;

/// Bad flags or a bad design file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<DesignError>() {
            return match e {
                DesignError::Singular { .. }
                | DesignError::NotEstimable { .. }
                | DesignError::SingleOrbitRegion { .. }
                | DesignError::UnsupportedAsymmetric { .. } => EXIT_SINGULAR,
                DesignError::NotOptimal { .. } => EXIT_NOT_OPTIMAL,
                DesignError::Optimizer(_) => EXIT_INTERNAL,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_INTERNAL
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> anyhow::Result<u8> {
    match cli.command {
        Command::Optimal(a) => optimal(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Tables(a) => tables_cmd(a, out),
        Command::Expand(a) => expand(a, out),
    }
}

fn optimal(a: OptimalArgs, out: &mut dyn std::io::Write) -> anyhow::Result<u8> {
    let gen = generate(a.k, a.lower, a.upper, a.ell, a.allow_large)?;
    let (report, _) = build_report(&gen, a.tol)?;
    out.write_all(report.render(a.tol).as_bytes())?;
    if let Some(path) = &a.json {
        let file = DesignFile::from_design(&gen.design, report.lower, report.upper);
        fs::write(path, file.to_json() + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_NOT_OPTIMAL
    })
}

pub fn render_kw(kw: &KwReport) -> String {
    let mut s = String::new();
    let method = match kw.method {
        SensitivityMethod::Polynomial => "polynomial",
        SensitivityMethod::Dense => "dense",
    };
    let _ = writeln!(
        s,
        "K = {}, region [{}, {}], p = {}, method: {method}",
        kw.k_factors, kw.lower, kw.upper, kw.p
    );
    let _ = writeln!(s, "{:>5}  {:>20}  {:>12}", "orbit", "psi", "psi - p");
    for (&k, &psi) in &kw.per_orbit {
        let _ = writeln!(s, "{k:>5}  {psi:>20.12}  {:>12.3e}", psi - kw.p as f64);
    }
    let _ = writeln!(
        s,
        "max violation: {:.3e} at orbit {} (tol {:e})",
        kw.max_violation, kw.argmax_orbit, kw.tolerance
    );
    let _ = writeln!(s, "support gap: {:.3e}", kw.support_gap);
    let _ = writeln!(s, "result: {}", pass_word(kw.passed));
    s
}

fn verify(a: VerifyArgs, out: &mut dyn std::io::Write) -> anyhow::Result<u8> {
    let file = DesignFile::load(&a.file)?;
    if let Some(k) = a.k {
        if k != file.k {
            return Err(
                InputError(format!("--k {k} does not match K = {} in the file", file.k)).into(),
            );
        }
    }
    let lower = a.lower.unwrap_or(file.lower);
    let upper = a.upper.unwrap_or(file.upper);
    let region = Region::new(file.k, lower, upper).map_err(|e| InputError(e.to_string()))?;
    let design = file.to_design(&region)?;
    let kw = kw_check(file.k, lower, upper, &design, a.tol)?;
    out.write_all(render_kw(&kw).as_bytes())?;
    Ok(if kw.passed { EXIT_OK } else { EXIT_NOT_OPTIMAL })
}

fn tables_cmd(a: TablesArgs, out: &mut dyn std::io::Write) -> anyhow::Result<u8> {
    let mut text = String::new();
    if matches!(a.which, Which::Wide | Which::Both) {
        text.push_str(&tables::wide_table(a.k.clone())?);
    }
    if a.which == Which::Both {
        text.push('\n');
    }
    if matches!(a.which, Which::Narrow | Which::Both) {
        text.push_str(&tables::narrow_table(a.k.clone())?);
    }
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

fn expand(a: ExpandArgs, out: &mut dyn std::io::Write) -> anyhow::Result<u8> {
    let design = match &a.design {
        Some(path) => {
            let file = DesignFile::load(path)?;
            let region = Region::new(file.k, file.lower, file.upper)
                .map_err(|e| InputError(e.to_string()))?;
            file.to_design(&region)?
        }
        None => {
            let (k, lower) = (
                a.k.expect("clap requires --k"),
                a.lower.expect("clap requires --lower"),
            );
            generate(k, lower, a.upper, a.ell, a.allow_large)?.design
        }
    };
    let kf = design.k_factors();
    let mut text = String::new();
    let mut total: u64 = 0;
    match a.n {
        Some(_) => text.push_str("k point point_weight count\n"),
        None => text.push_str("k point point_weight\n"),
    }
    for k in design.support() {
        let pw = point_weight(&design, k)?;
        for x in enumerate_orbit(kf, k)? {
            match a.n {
                Some(n) => {
                    let count = (n as f64 * pw).round() as u64;
                    total += count;
                    let _ = writeln!(text, "{k} {x} {} {count}", report::sig17(pw));
                }
                None => {
                    let _ = writeln!(text, "{k} {x} {}", report::sig17(pw));
                }
            }
        }
    }
    out.write_all(text.as_bytes())?;
    if let Some(n) = a.n {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(
            err,
            "warning: counts are round(N * w) per point; optimal rounding to an exact design is not attempted"
        );
        if total != n {
            let _ = writeln!(err, "warning: rounded counts sum to {total}, not N = {n}");
        }
    }
    Ok(EXIT_OK)
}
