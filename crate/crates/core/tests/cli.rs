use std::process::{Command, Output};

fn stable_em(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stable-em"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn constants_row() {
    let o = stable_em(&["constants", "--d", "1", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("d,alpha,surface_area,c_d_alpha,sigma,quad_residual\n"));
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - 0.299_206_710_301_074_5).abs() < 1e-12);
    assert!((row[4] - 1.845_270_148_644_028).abs() < 1e-12);
    assert!(row[5] < 1e-8);

    let o = stable_em(&["constants", "--d", "3", "--alpha", "1.1"]);
    assert_eq!(o.status.code(), Some(0));
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row.iter().all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn domain_and_usage_errors_exit_one() {
    assert_eq!(stable_em(&["constants", "--d", "1", "--alpha", "2.5"]).status.code(), Some(1));
    assert_eq!(stable_em(&["sample", "--kind", "stable1d", "--n", "0"]).status.code(), Some(1));
    assert_eq!(stable_em(&["sample", "--kind", "stable1d", "--n", "5", "--d", "2"]).status.code(), Some(1));
    assert_eq!(stable_em(&["simulate", "--eta", "1.5"]).status.code(), Some(1));
    assert_eq!(stable_em(&["moments", "--beta", "1.5", "--steps", "1"]).status.code(), Some(1));
    assert_eq!(stable_em(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(stable_em(&["cf-gap", "--eta-grid", "2^x"]).status.code(), Some(1));
    assert_eq!(stable_em(&["--workers", "0", "constants"]).status.code(), Some(1));
    assert_eq!(stable_em(&["--help"]).status.code(), Some(0));
    assert_eq!(stable_em(&["--version"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_two() {
    // η = 1/2 makes the first product factor φ(3.4) negative at |ξ| = 10,
    // but the gap only integrates |ξ| <= 1; use a too-tight quadrature
    // tolerance instead.
    let o = stable_em(&["cf-gap", "--eta-grid", "2^-4", "--quad-tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pareto_samples_and_determinism() {
    let args = ["sample", "--kind", "pareto", "--n", "5", "--d", "1", "--alpha", "1.5", "--seed", "7"];
    let a = stable_em(&args);
    let b = stable_em(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("idx,x1\n"));
    let vals = column(&text, 1);
    assert_eq!(vals.len(), 5);
    assert!(vals.iter().all(|v| v.abs() > 1.0));
}

#[test]
fn isotropic_header_has_all_coordinates() {
    let o = stable_em(&["sample", "--kind", "isotropic", "--n", "3", "--d", "3"]);
    assert!(stdout(&o).starts_with("idx,x1,x2,x3\n"));
}

#[test]
fn coupling_decay_is_geometric() {
    let o = stable_em(&["coupling-decay", "--drift", "ou", "--eta", "0.1", "--x0", "4", "--y0", "0", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("k,mean_distance\n"));
    let got = column(&text, 1);
    for (g, e) in got.iter().zip([4.0, 3.6, 3.24, 2.916]) {
        assert!((g - e).abs() < 1e-12, "{g} vs {e}");
    }
}

#[test]
fn cf_gap_pareto_grid() {
    let o = stable_em(&["cf-gap", "--alpha", "1.5", "--scheme", "pareto", "--eta-grid", "2^-8..2^-14"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("eta,gap,w1_lower\n"));
    let gaps = column(&text, 1);
    assert_eq!(gaps.len(), 7);
    assert!(gaps.iter().all(|g| *g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    let footer = text.lines().last().unwrap();
    let slope: f64 = footer
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("slope="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 1.0 / 3.0).abs() < 0.01, "{slope}");
}

#[test]
fn rate_study_csv_parses_back() {
    let o = stable_em(&["rate-study", "--method", "cfgap", "--scheme", "stable", "--eta-grid", "2^-6..2^-9"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stable_em::ratestudy::RateReport::from_csv(&stdout(&o)).unwrap();
    assert_eq!(r.eta_grid.len(), 4);
    assert!((r.fitted_slope - 1.0).abs() < 0.05);
    assert_eq!(r.theoretical_slope, 1.0);
    // the stable-noise Monte Carlo rate needs a moment order
    let o = stable_em(&["rate-study", "--method", "mcw1", "--scheme", "stable", "--ensemble", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_drift_passes_builtin() {
    let o = stable_em(&["check-drift", "--drift", "ou-sine:0.5", "--n-pairs", "10000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dissipativity,true"));
    assert_eq!(stable_em(&["check-drift", "--drift", "linear:1,0,0,-1"]).status.code(), Some(1));
}

#[test]
fn moments_and_simulate_headers() {
    let o = stable_em(&["moments", "--drift", "ou", "--steps", "10", "--ensemble", "20", "--x0", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("k,moment_beta\n"));
    assert!((column(&text, 1)[0] - 2f64.powf(1.2)).abs() < 1e-12);
    let o = stable_em(&["simulate", "--drift", "linear:2,0,0,1", "--steps", "5", "--ensemble", "4", "--x0", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("idx,x1,x2\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn step_size_warning_goes_to_stderr() {
    let o = stable_em(&["simulate", "--eta", "0.5", "--steps", "2", "--ensemble", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("warning: step size 0.5"), "{err}");
    assert!(!err.contains('\x1b'));
}

#[test]
fn manifest_written_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = stable_em(&["sample", "--kind", "stable1d", "--n", "10", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("s.csv.manifest")).unwrap();
    assert!(manifest.starts_with("subcommand = sample\n"));
    assert!(manifest.contains("seed = 3\n"));
    assert!(manifest.contains("kind = stable1d\n"));
    assert!(manifest.contains("version = "));
    assert!(manifest.contains("timestamp = "));
    let replay = dir.path().join("r.csv");
    let m = dir.path().join("s.csv.manifest");
    let o = stable_em(&["--config", m.to_str().unwrap(), "--out", replay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&replay).unwrap());
    // a flag overrides the file
    let short = dir.path().join("short.csv");
    let o = stable_em(&["--config", m.to_str().unwrap(), "sample", "--n", "4", "--out", short.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&short).unwrap().lines().count(), 5);
}
