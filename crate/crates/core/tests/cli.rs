use std::process::Command;

fn fraclap(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fraclap")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn weights_csv_has_resolved_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let (code, _, _) = fraclap(&["weights", "--family", "GL", "--alpha", "1.0", "--m", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&path).unwrap();
    for key in ["# family = GL", "# alpha = 1.0", "# h = 1", "# m = 5"] {
        assert!(csv.contains(key), "{key} missing in\n{csv}");
    }
    let r = rows(&csv);
    assert_eq!(r.len(), 6);
    let w1: f64 = r[1][1].parse().unwrap();
    assert!((w1 - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    // 17 significant digits
    assert_eq!(r[1][1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "family = Q\nalpha = 0.5\nm = 3\n").unwrap();
    let (code, out, _) = fraclap(&["weights", "--config", cfg.to_str().unwrap(), "--m", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("# family = Q"));
    assert_eq!(rows(&out).len(), 3);
}

#[test]
fn converge_reports_slope() {
    let (code, out, err) = fraclap(&["converge", "--family", "PER", "--alpha", "0.8", "--hs", "0.25,0.125,0.0625"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("# fitted_slope = "));
    assert_eq!(rows(&out).len(), 3);
    let slope: f64 = err.trim().trim_start_matches("fitted_slope = ").parse().unwrap();
    assert!((slope - 2.0).abs() < 0.1);
}

#[test]
fn dirichlet_and_evolution_outputs() {
    let (code, out, err) = fraclap(&["dirichlet", "--alpha", "1.5", "--h", "0.125"]);
    assert_eq!(code, 0);
    assert_eq!(rows(&out)[0].len(), 4);
    assert!(err.starts_with("h,sup_error\n"));
    let (code, out, _) = fraclap(&["heat", "--alpha", "1.5", "--h", "0.5", "--L", "5", "--tfinal", "1.0"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 2 * 21);
    assert_eq!(r[0][0].parse::<f64>().unwrap(), 0.0);
    let (code, out, _) = fraclap(&["burgers", "--alpha", "1.0", "--h", "0.25", "--L", "4", "--tfinal", "0.5", "--flux", "llf"]);
    assert_eq!(code, 0);
    assert!(out.contains("# flux = llf"));
    let (code, _, _) = fraclap(&["selftest", "--seed", "3"]);
    assert_eq!(code, 0);
}

#[test]
fn exit_codes() {
    assert_eq!(fraclap(&["weights", "--alpha", "2.5", "--family", "T"]).0, 2);
    assert_eq!(fraclap(&["weights", "--alpha", "abc"]).0, 2);
    assert_eq!(fraclap(&["weights", "--bogus", "1"]).0, 2);
    assert_eq!(fraclap(&["heat", "--alpha", "1.0", "--dt", "5"]).0, 2);
    assert_eq!(fraclap(&["weights", "--config", "/nonexistent/run.cfg"]).0, 2);
    // the zero-extension error grows under refinement, so no slope can be fitted
    assert_eq!(fraclap(&["converge", "--alpha", "0.4", "--oracle", "lorentzian", "--hs", "0.25,0.125"]).0, 3);
}
