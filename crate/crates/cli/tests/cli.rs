use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rbf-field"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_box_field(dir: &Path, name: &str, n: usize) {
    let mut s = format!("2 {n} {n}\n0 1 0 1\n");
    for j in 0..n {
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let y = (j as f64 + 0.5) / n as f64;
            let v = if (0.25..0.6).contains(&x) && (0.2..0.7).contains(&y) { 10.0 } else { 1.0 };
            s.push_str(&format!("{v} "));
        }
        s.push('\n');
    }
    fs::write(dir.join(name), s).unwrap();
}

/// CSV rows without `#` lines.
fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn step_preset_fits_and_evaluates_on_two_grids() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let log = ok(d, &["fit", "--preset", "step1d", "--out", "s.txt", "--reports", "r.csv"]);
    assert!(log.starts_with("# rbf-field "));
    assert!(log.contains("global: subdomains=1"));
    let reports = fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(reports.starts_with("# rbf-field "));
    assert!(data_rows(&reports)[0].starts_with("subdomain,round,centers"));
    assert!(data_rows(&reports).len() >= 3);

    ok(d, &["eval", "--surrogate", "s.txt", "--grid", "16", "--out", "a.csv"]);
    ok(d, &["eval", "--surrogate", "s.txt", "--grid", "64", "--out", "b.csv"]);
    let a = fs::read_to_string(d.join("a.csv")).unwrap();
    let b = fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(data_rows(&a).len(), 17);
    assert_eq!(data_rows(&b).len(), 65);
    assert!(a.lines().next().unwrap().starts_with("# rbf-field "));
}

#[test]
fn decomposed_fit_reports_each_subdomain_and_ignores_worker_count() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_box_field(d, "k.txt", 16);
    let common = ["fit", "--field", "k.txt", "--px", "2", "--py", "2", "--sigma", "0.0625", "--max-rounds", "1", "--ktop", "6"];
    let log = ok(d, &[&common[..], &["--workers", "1", "--out", "one.txt", "--reports", "one.csv"]].concat());
    ok(d, &[&common[..], &["--workers", "4", "--out", "four.txt", "--reports", "four.csv"]].concat());
    assert_eq!(log.matches("subdomain ").count(), 4);
    assert_eq!(fs::read(d.join("one.txt")).unwrap(), fs::read(d.join("four.txt")).unwrap());

    // reports agree apart from the timing column
    let strip = |p: &str| -> Vec<String> {
        let text = fs::read_to_string(d.join(p)).unwrap();
        let rows = data_rows(&text);
        let col = rows[0].split(',').position(|c| c == "seconds").unwrap();
        rows.iter()
            .map(|r| {
                let mut f: Vec<&str> = r.split(',').collect();
                f.remove(col);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip("one.csv"), strip("four.csv"));
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_box_field(d, "k.txt", 8);
    for out in ["a", "b"] {
        ok(d, &["fit", "--field", "k.txt", "--max-rounds", "2", "--ktop", "4", "--out", &format!("{out}.txt")]);
        ok(d, &["eval", "--surrogate", &format!("{out}.txt"), "--grid", "5,7", "--out", &format!("{out}.csv")]);
    }
    assert_eq!(fs::read(d.join("a.txt")).unwrap(), fs::read(d.join("b.txt")).unwrap());
    // the provenance line names the surrogate file, so compare from line 2 on
    let tail = |p: &str| fs::read_to_string(d.join(p)).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(tail("a.csv"), tail("b.csv"));
}

#[test]
fn constant_field_gives_constant_csv() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), format!("2 4 4\n0 1 0 1\n{}", "2.5 ".repeat(16))).unwrap();
    // unregularized and tightly converged, so the constant is reproduced
    // rather than shrunk
    ok(d, &["fit", "--field", "c.txt", "--l1", "0", "--l2", "0", "--tol", "1e-15", "--out", "s.txt"]);
    let csv = ok(d, &["eval", "--surrogate", "s.txt", "--grid", "9,9"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 82);
    for r in &rows[1..] {
        let v: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!((v - 2.5).abs() < 1e-10, "{r}");
    }
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_box_field(d, "k.txt", 8);
    // configuration problems: listed together, exit 2
    let out = run(d, &["fit", "--field", "k.txt", "--px", "3", "--eta", "1.5", "--out", "s.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("px = 3") && err.contains("eta"), "{err}");
    // bad flags are usage errors
    assert_eq!(run(d, &["fit", "--bogus"]).status.code(), Some(2));
    // data problems: exit 3
    fs::write(d.join("bad.txt"), "2 2 2\n0 1 0 1\n1 2 x 4\n").unwrap();
    assert_eq!(run(d, &["fit", "--field", "bad.txt", "--out", "s.txt"]).status.code(), Some(3));
    fs::write(d.join("neg.txt"), "2 2 2\n0 1 0 1\n1 2 -3 4\n").unwrap();
    assert_eq!(run(d, &["fit", "--field", "neg.txt", "--out", "s.txt"]).status.code(), Some(3));
    assert_eq!(run(d, &["fit", "--field", "missing.txt", "--out", "s.txt"]).status.code(), Some(3));
    // out-of-domain evaluation: exit 3
    ok(d, &["fit", "--field", "k.txt", "--out", "s.txt"]);
    let out = run(d, &["eval", "--surrogate", "s.txt", "--grid", "4,4", "--bounds", "0,2,0,1"]);
    assert_eq!(out.status.code(), Some(3));
    // theory grid with c + b <= 0: exit 2
    assert_eq!(run(d, &["verify-theory", "--c", "1", "--b", "-2"]).status.code(), Some(2));
}

#[test]
fn darcy_with_unit_coefficient_is_linear() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let report = ok(d, &["darcy", "--constant", "1", "--mesh", "8,8", "--out", "p.csv"]);
    assert!(report.starts_with("# rbf-field "));
    let p = fs::read_to_string(d.join("p.csv")).unwrap();
    let rows = data_rows(&p);
    assert_eq!(rows.len(), 82);
    for r in &rows[1..] {
        let f: Vec<f64> = r.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((f[2] - (1.0 - f[0])).abs() < 1e-10, "{r}");
    }
}

#[test]
fn darcy_compares_field_and_surrogate_and_sweeps() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_box_field(d, "k.txt", 16);
    ok(d, &["fit", "--field", "k.txt", "--out", "s.txt"]);
    let report = ok(d, &["darcy", "--field", "k.txt", "--surrogate", "s.txt"]);
    let rows = data_rows(&report);
    assert_eq!(rows[0], "nx,ny,h,cg_iterations,cg_residual,inflow,rel_error");
    let e: f64 = rows[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(e > 0.0 && e < 0.5, "{report}");

    let sweep = ok(d, &["darcy", "--field", "k.txt", "--surrogate", "s.txt", "--sweep", "8,16,32"]);
    assert_eq!(data_rows(&sweep).len(), 4);
    assert!(sweep.contains("# slope="));
}

#[test]
fn theory_table_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let csv = ok(dir.path(), &["verify-theory"]);
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "c,sigma,b,numeric,analytic,rel_diff");
    assert_eq!(rows.len(), 10);
    for r in &rows[1..] {
        let rel: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 1e-6, "{r}");
    }
}
