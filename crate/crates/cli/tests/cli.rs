use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_orbit-design");
const TABLE_WIDE: &str = include_str!("../../core/tests/data/table_wide.txt");
const TABLE_NARROW: &str = include_str!("../../core/tests/data/table_narrow.txt");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn optimal_narrow_worked_example() {
    let o = run(&["optimal", "--k", "6", "--lower", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("regime: narrow"));
    assert!(s.contains("0.3865193"));
    assert!(s.contains("0.2269613"));
    assert!(s.contains("D-efficiency = 0.88536"));
    assert!(s.contains(": pass"));
}

#[test]
fn optimal_wide_with_ell() {
    let o = run(&["optimal", "--k", "12", "--lower", "3", "--ell", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("regime: wide, ell = 4"));
    for w in ["0.1500000000", "0.0375000000", "0.6250000000"] {
        assert!(s.contains(w), "{w} missing from\n{s}");
    }
}

#[test]
fn optimal_regimes() {
    let s = stdout(&run(&["optimal", "--k", "6", "--lower", "1"]));
    assert!(s.contains("regime: threshold"));
    let s = stdout(&run(&["optimal", "--k", "3", "--lower", "0"]));
    assert!(s.contains("regime: full-factorial"));
    let s = stdout(&run(&[
        "optimal", "--k", "9", "--lower", "1", "--upper", "9",
    ]));
    assert!(s.contains("regime: wide"));
}

#[test]
fn exit_codes() {
    // single symmetric orbit
    let o = run(&["optimal", "--k", "6", "--lower", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("single symmetric orbit"));
    assert_eq!(
        run(&["optimal", "--k", "3", "--lower", "1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["optimal", "--k", "8", "--lower", "3", "--upper", "6"])
            .status
            .code(),
        Some(3)
    );
    // usage
    assert_eq!(
        run(&["optimal", "--k", "6", "--lower", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["optimal", "--k", "23", "--lower", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["optimal", "--k", "6", "--lower", "2", "--ell", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["optimal", "--k", "6"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--k", "3"]).status.code(), Some(2));
}

#[test]
fn allow_large_lifts_the_cap() {
    let o = run(&["optimal", "--k", "27", "--lower", "9", "--allow-large"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("regime: threshold"));
}

#[test]
fn json_round_trip_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("d.json");
    let csv = dir.path().join("d.csv");
    for (k, lower) in [("6", "2"), ("8", "2"), ("12", "3"), ("22", "9"), ("3", "0")] {
        let o = run(&[
            "optimal",
            "--k",
            k,
            "--lower",
            lower,
            "--json",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let v = run(&["verify", json.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "K = {k}: {}", stdout(&v));
        assert!(stdout(&v).contains("result: pass"));
    }
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,orbit_weight,point_weight,orbit_size"));
    assert_eq!(lines.count(), 4);
    assert!(text.contains("\n0,0.12500000000000000,0.12500000000000000,1\n"));
}

#[test]
fn verify_uniform_design_fails() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "u.json",
        r#"{"k":6,"lower":2,"upper":4,"orbits":[{"k":2,"weight":0.3},{"k":3,"weight":0.4},{"k":4,"weight":0.3}]}"#,
    );
    let o = run(&["verify", &f]);
    assert_eq!(o.status.code(), Some(4));
    let s = stdout(&o);
    assert!(s.contains("result: FAIL"));
    assert!(s.contains("max violation: 1.929e0 at orbit 2"));
}

#[test]
fn verify_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_sum = write(
        dir.path(),
        "s.json",
        r#"{"k":6,"lower":2,"upper":4,"orbits":[{"k":2,"weight":0.3},{"k":3,"weight":0.3},{"k":4,"weight":0.3}]}"#,
    );
    let o = run(&["verify", &bad_sum]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sum to"));

    let unknown = write(
        dir.path(),
        "x.json",
        r#"{"k":6,"lower":2,"upper":4,"orbits":[],"extra":true}"#,
    );
    assert_eq!(run(&["verify", &unknown]).status.code(), Some(2));

    let outside = write(
        dir.path(),
        "o.json",
        r#"{"k":6,"lower":2,"upper":4,"orbits":[{"k":1,"weight":0.5},{"k":5,"weight":0.5}]}"#,
    );
    assert_eq!(run(&["verify", &outside]).status.code(), Some(2));

    let singular = write(
        dir.path(),
        "z.json",
        r#"{"k":6,"lower":0,"upper":6,"orbits":[{"k":0,"weight":0.5},{"k":6,"weight":0.5}]}"#,
    );
    assert_eq!(run(&["verify", &singular]).status.code(), Some(3));

    assert_eq!(
        run(&["verify", "/nonexistent/design.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_region_override() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("d.json");
    run(&[
        "optimal",
        "--k",
        "6",
        "--lower",
        "2",
        "--json",
        json.to_str().unwrap(),
    ]);
    // the narrow optimum is not optimal over the wider region
    let o = run(&[
        "verify",
        json.to_str().unwrap(),
        "--lower",
        "0",
        "--upper",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(
        run(&["verify", json.to_str().unwrap(), "--k", "7"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tables_golden_rows() {
    let o = run(&["tables", "--which", "narrow", "--k", "6"]);
    assert_eq!(
        stdout(&o),
        "K L c w_L w_c D_eff B_K\n6 2 3 0.3865 0.2270 0.8854 1.00\n"
    );
    let o = run(&["tables", "--which", "wide", "--k", "4"]);
    assert_eq!(
        stdout(&o),
        "K L ell c w_L w_ell w_c B_K\n4 0 1 2 0.0625 0.2500 0.3750 0.42\n"
    );
    let o = run(&["tables", "--which", "wide", "--k", "22"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    let expected: Vec<&str> = TABLE_WIDE
        .lines()
        .filter(|l| l.starts_with("22 "))
        .collect();
    assert_eq!(rows, expected);
}

#[test]
fn tables_reproduce_every_printed_row() {
    let o = run(&["tables"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let (wide, narrow) = s.split_once("\n\n").unwrap();
    let wide: Vec<&str> = wide.lines().collect();
    let narrow: Vec<&str> = narrow.lines().collect();
    for row in TABLE_WIDE.lines() {
        assert!(wide.contains(&row), "wide row `{row}` not regenerated");
    }
    for row in TABLE_NARROW.lines() {
        assert!(narrow.contains(&row), "narrow row `{row}` not regenerated");
    }
    // byte-stable
    assert_eq!(stdout(&run(&["tables"])), s);
}

#[test]
fn expand_lists_points() {
    let o = run(&["expand", "--k", "6", "--lower", "2"]);
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0], "2 (+1,+1,-1,-1,-1,-1) 0.025767953994577823");
    assert_eq!(rows.iter().filter(|r| r.starts_with("3 ")).count(), 20);

    let s = stdout(&run(&["expand", "--k", "4", "--lower", "1"]));
    assert_eq!(s.lines().filter(|r| r.starts_with("2 ")).count(), 6);
}

#[test]
fn expand_with_counts_warns() {
    let o = run(&["expand", "--k", "6", "--lower", "2", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let counts: Vec<(String, u64)> = s
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f[3].parse().unwrap())
        })
        .collect();
    assert!(counts
        .iter()
        .all(|(k, c)| if k == "3" { *c == 1 } else { *c == 3 }));
    let err = stderr(&o);
    assert!(err.contains("not attempted"));
    assert!(err.contains("sum to 110, not N = 100"));
}

#[test]
fn expand_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("d.json");
    run(&[
        "optimal",
        "--k",
        "6",
        "--lower",
        "2",
        "--json",
        json.to_str().unwrap(),
    ]);
    let a = stdout(&run(&["expand", "--design", json.to_str().unwrap()]));
    let b = stdout(&run(&["expand", "--k", "6", "--lower", "2"]));
    assert_eq!(a, b);
}
