//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use stable_em::drift::builtin_drift;
use stable_em::metrics::{empirical_cf, w1_1d, EmpiricalMeasure};
use stable_em::noise::{
    c_d_alpha, c_d_alpha_quadrature, sample_isotropic_stable, sample_pareto_vec, sample_sym_stable_1d,
    surface_area, NoiseSpec,
};
use stable_em::oubench::{cf_gap_grid, gap_to_w1_lower, DEFAULT_QUAD_TOL};
use stable_em::ratestudy::{fit_loglog, run_rate_study, RateMethod, RateStudy};
use stable_em::scheme::{coupled_pair_decay, moment_track, ChainConfig, Scheme};
use stable_em::stats::{ks_critical_one, ks_critical_two, ks_one_sample, ks_two_sample};
use stable_em::RngStream;

type Outcome = (bool, String);

const ALPHA_GRID: [f64; 5] = [1.1, 1.3, 1.5, 1.7, 1.9];

fn c1_constants() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for d in 1..=3 {
        for &a in &ALPHA_GRID {
            let closed = c_d_alpha(d, a).unwrap();
            let quad = c_d_alpha_quadrature(d, a, 1e-11).unwrap();
            worst_rel = worst_rel.max((closed - quad).abs() / closed);
            let spec = NoiseSpec::new(a, d).unwrap();
            let id = spec.sigma_pow_alpha() * surface_area(d).unwrap() * closed;
            worst_id = worst_id.max((id - a).abs());
        }
    }
    (
        worst_rel <= 1e-8 && worst_id <= 1e-10,
        format!("max rel |closed - quadrature| = {worst_rel:.2e} (<= 1e-8), max |σ^α σ_(d-1) C - α| = {worst_id:.2e} (<= 1e-10)"),
    )
}

fn c2_sampler_cf() -> Outcome {
    let n = 1_000_000;
    let xis = [0.5, 1.0, 2.0];
    let s1 = NoiseSpec::new(1.5, 1).unwrap();
    let s2 = NoiseSpec::new(1.5, 2).unwrap();
    let mut rng = RngStream::new(1, 0);
    let cms: Vec<f64> = (0..n).map(|_| sample_sym_stable_1d(&s1, 1.0, &mut rng).unwrap()).collect();
    let mut rng = RngStream::new(1, 1);
    let iso: Vec<f64> = (0..n).map(|_| sample_isotropic_stable(&s2, 1.0, &mut rng).unwrap()[0]).collect();
    let cms = EmpiricalMeasure::from_scalars(cms).unwrap();
    let iso = EmpiricalMeasure::from_scalars(iso).unwrap();
    let mut worst: f64 = 0.0;
    for xi in xis {
        let target = (-(xi as f64).powf(1.5)).exp();
        worst = worst.max((empirical_cf(&cms, xi).unwrap().re - target).abs());
        worst = worst.max((empirical_cf(&iso, xi).unwrap().re - target).abs());
    }
    let m = 100_000;
    let mut r1 = RngStream::new(2, 0);
    let mut r2 = RngStream::new(2, 1);
    let a: Vec<f64> = (0..m).map(|_| sample_sym_stable_1d(&s1, 1.0, &mut r1).unwrap()).collect();
    let b: Vec<f64> = (0..m).map(|_| sample_isotropic_stable(&s1, 1.0, &mut r2).unwrap()[0]).collect();
    let ks = ks_two_sample(&a, &b);
    let crit = ks_critical_two(m, m);
    (
        worst <= 5e-3 && ks < crit,
        format!("max |CF error| = {worst:.2e} (<= 5e-3) over ξ ∈ {{0.5,1,2}}, CMS and d=2 isotropic; d=1 KS = {ks:.4} < {crit:.4}"),
    )
}

fn c3_pareto() -> Outcome {
    let alpha: f64 = 1.5;
    let n = 100_000;
    let mut ok = true;
    let mut detail = Vec::new();
    for d in 1..=3 {
        let spec = NoiseSpec::new(alpha, d).unwrap();
        let mut rng = RngStream::new(3, d as u64);
        let radii: Vec<f64> = (0..n)
            .map(|_| sample_pareto_vec(&spec, &mut rng).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let ks = ks_one_sample(&radii, |r| if r <= 1.0 { 0.0 } else { 1.0 - r.powf(-alpha) });
        ok &= ks < ks_critical_one(n);
        detail.push(format!("d={d} KS {ks:.4}"));
    }
    let spec = NoiseSpec::new(alpha, 1).unwrap();
    let mut rng = RngStream::new(3, 0);
    let big = 1_000_000;
    let mean = (0..big).map(|_| sample_pareto_vec(&spec, &mut rng)[0].abs()).sum::<f64>() / big as f64;
    ok &= (mean - 3.0).abs() <= 0.05;
    (
        ok,
        format!(
            "radial KS ({}) < {:.4}; mean |Z̃| = {mean:.4} (3 ± 0.05)",
            detail.join(", "),
            ks_critical_one(n)
        ),
    )
}

fn c4_w1_exact() -> Outcome {
    let mut rng = RngStream::new(4, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..8).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.random_range(-5.0..5.0)).collect();
        let lp = common::w1_by_lp(&a, &b);
        let ours = w1_1d(
            &EmpiricalMeasure::from_scalars(a).unwrap(),
            &EmpiricalMeasure::from_scalars(b).unwrap(),
        )
        .unwrap();
        worst = worst.max((ours - lp).abs());
    }
    // Dyadic samples and shifts keep every sum exact.
    let mut shift_ok = true;
    for t in 0..100 {
        let a: Vec<f64> = (0..50).map(|_| rng.random_range(-4096i32..4096) as f64 / 1024.0).collect();
        let c = (t as f64 - 50.0) / 8.0;
        let b: Vec<f64> = a.iter().map(|x| x + c).collect();
        let w = w1_1d(
            &EmpiricalMeasure::from_scalars(a).unwrap(),
            &EmpiricalMeasure::from_scalars(b).unwrap(),
        )
        .unwrap();
        shift_ok &= w == c.abs();
    }
    (
        worst <= 1e-10 && shift_ok,
        format!("max |w1_1d - LP| over 100 instances = {worst:.2e} (<= 1e-10); translation equivariance exact: {shift_ok}"),
    )
}

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

fn c5_cf_rate() -> Outcome {
    let etas = dyadic(8, 14);
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [1.2, 1.5, 1.8] {
        let theory = 2.0 / alpha - 1.0;
        let gp = cf_gap_grid(alpha, &etas, Scheme::ParetoNoise, DEFAULT_QUAD_TOL).unwrap();
        let pts: Vec<(f64, f64)> = etas.iter().copied().zip(gp.iter().copied()).collect();
        let positive = gp.iter().all(|&g| g > 0.0);
        let sp = fit_loglog(&pts).map(|f| f.slope).unwrap_or(f64::NAN);
        let scaled: Vec<f64> = etas.iter().zip(&gp).map(|(e, g)| g / e.powf(theory)).collect();
        let ratio = scaled.iter().cloned().fold(f64::MIN, f64::max) / scaled.iter().cloned().fold(f64::MAX, f64::min);
        let gs = cf_gap_grid(alpha, &etas, Scheme::StableNoise, DEFAULT_QUAD_TOL).unwrap();
        let pts: Vec<(f64, f64)> = etas.iter().copied().zip(gs.iter().map(|g| g.abs())).collect();
        let ss = fit_loglog(&pts).unwrap().slope;
        let this = positive && (sp - theory).abs() <= 0.05 && ratio <= 3.0 && (ss - 1.0).abs() <= 0.05;
        ok &= this;
        parts.push(format!(
            "α={alpha}: pareto slope {sp:.4} (target {theory:.4} ± 0.05), max/min {ratio:.3} (<= 3), stable slope {ss:.4} (1 ± 0.05){}",
            if this { "" } else { " [fails]" }
        ));
    }
    (ok, parts.join("; "))
}

fn c6_mc_rate() -> Outcome {
    let ou = builtin_drift("ou", 1, &[]).unwrap();
    let etas = dyadic(3, 7);
    let mut study = RateStudy::new(1.5, Scheme::ParetoNoise, RateMethod::McW1, ou, etas.clone());
    study.ensemble = 100_000;
    study.horizon = Some(20.0);
    study.seed = 0;
    let r = run_rate_study(&study).unwrap();
    let decreasing = r.distances.windows(2).all(|w| w[1] < w[0]);
    let in_band = (0.2..=0.5).contains(&r.fitted_slope);
    let lower = cf_gap_grid(1.5, &etas, Scheme::ParetoNoise, DEFAULT_QUAD_TOL).unwrap();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    let se = r.std_errors.clone().unwrap_or_default();
    let lb: Vec<f64> = lower.iter().map(|g| gap_to_w1_lower(*g)).collect();
    (
        decreasing && in_band,
        format!(
            "W1 = [{}] (batch s.e. [{}]), decreasing: {decreasing}; slope {:.4} (band [0.2, 0.5]); deterministic W1 lower bounds [{}]",
            fmt(&r.distances),
            fmt(&se),
            r.fitted_slope,
            fmt(&lb)
        ),
    )
}

fn c7_contraction() -> Outcome {
    let ou = builtin_drift("ou", 1, &[]).unwrap();
    let noise = NoiseSpec::new(1.5, 1).unwrap();
    let (eta, steps) = (0.1, 200);
    let (x, y) = (4.0, 0.0);
    let mut worst: f64 = 0.0;
    for scheme in [Scheme::StableNoise, Scheme::ParetoNoise] {
        let cfg = ChainConfig::new(scheme, noise.clone(), eta, steps, vec![x], 1000, 7);
        let means = coupled_pair_decay(&ou, &[x], &[y], &cfg).unwrap();
        for (k, m) in means.iter().enumerate() {
            worst = worst.max((m - (x - y) * (1.0 - eta).powi(k as i32)).abs());
        }
    }
    let sine = builtin_drift("ou-sine", 1, &[0.5]).unwrap();
    let cfg = ChainConfig::new(Scheme::StableNoise, noise, eta, 100, vec![x], 1000, 7);
    let means = coupled_pair_decay(&sine, &[x], &[y], &cfg).unwrap();
    let pts: Vec<(f64, f64)> = means.iter().enumerate().map(|(k, m)| (k as f64, *m)).collect();
    // ln m_k = k ln ρ + c: slope of ln m against k, not ln k.
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1.ln() - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let rho = (sxy / sxx).exp();
    let bound = 1.0 - eta * sine.theta1() / 2.0;
    let tol = 1e-12 * (x - y).abs();
    (
        worst <= tol && rho <= bound,
        format!(
            "ou: max |E|X_k-Y_k| - |x-y|(1-η)^k| = {worst:.2e} (<= {tol:.0e}); ou-sine(0.5) per-step factor {rho:.5} (<= {bound})"
        ),
    )
}

fn c8_moments() -> Outcome {
    let ou = builtin_drift("ou", 1, &[]).unwrap();
    let x0 = 0.0f64;
    let beta = 1.2;
    let cfg = ChainConfig::new(Scheme::StableNoise, NoiseSpec::new(1.5, 1).unwrap(), 0.05, 10_000, vec![x0], 10_000, 0);
    let r = moment_track(&cfg, &ou, beta).unwrap();
    let bound = 10.0 * (1.0 + x0.abs().powf(beta));
    let n = r.per_step_moment.len();
    let window = &r.per_step_moment[n - n / 5..];
    let half = window.len() / 2;
    let m1 = window[..half].iter().sum::<f64>() / half as f64;
    let m2 = window[half..].iter().sum::<f64>() / (window.len() - half) as f64;
    let drift = (m1 - m2).abs() / (0.5 * (m1 + m2));
    (
        r.sup_moment <= bound && drift < 0.10,
        format!(
            "sup_k E|Y_k|^β = {:.4} (<= {bound}); final 20%: half-window means {m1:.4} vs {m2:.4}, change {:.1}% (< 10%); per-step max-min spread {:.0}% (informational)",
            r.sup_moment,
            100.0 * drift,
            100.0 * r.tail_spread(0.2)
        ),
    )
}

fn run_cli<S: AsRef<str>>(bin: &str, args: &[S], workers: &str) -> Result<(), String> {
    let mut full = vec!["--workers", workers];
    full.extend(args.iter().map(AsRef::as_ref));
    let st = Command::new(bin)
        .args(&full)
        .env("NO_COLOR", "1")
        .output()
        .map_err(|e| e.to_string())?;
    if st.status.success() {
        Ok(())
    } else {
        Err(format!("{:?} exited with {:?}: {}", full, st.status.code(), String::from_utf8_lossy(&st.stderr)))
    }
}

fn c9_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_stable-em");
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("constants", vec!["constants", "--d", "2", "--alpha", "1.3"]),
        ("sample-pareto", vec!["sample", "--kind", "pareto", "--n", "5000", "--d", "2", "--seed", "7"]),
        ("sample-stable1d", vec!["sample", "--kind", "stable1d", "--n", "20000", "--seed", "3"]),
        ("sample-isotropic", vec!["sample", "--kind", "isotropic", "--n", "5000", "--d", "3", "--seed", "4"]),
        ("simulate", vec!["simulate", "--scheme", "pareto", "--drift", "ou-sine:0.5", "--eta", "0.05", "--steps", "200", "--ensemble", "2000", "--x0", "1", "--seed", "5"]),
        ("cf-gap", vec!["cf-gap", "--alpha", "1.5", "--scheme", "pareto", "--eta-grid", "2^-6..2^-9"]),
        ("rate-mc", vec!["rate-study", "--method", "mcw1", "--drift", "ou", "--eta-grid", "2^-2..2^-4", "--ensemble", "2000", "--horizon", "4", "--seed", "9"]),
        ("rate-cf", vec!["rate-study", "--method", "cfgap", "--eta-grid", "2^-6..2^-8"]),
        ("coupling", vec!["coupling-decay", "--drift", "ou-sine:0.5", "--eta", "0.1", "--x0", "4", "--y0", "0", "--steps", "50", "--ensemble", "300"]),
        ("check-drift", vec!["check-drift", "--drift", "ou-sine:0.5", "--n-pairs", "2000"]),
        ("moments", vec!["moments", "--scheme", "stable", "--drift", "ou", "--beta", "1.2", "--eta", "0.05", "--steps", "300", "--ensemble", "1000"]),
    ];
    let mut failures = Vec::new();
    for (name, args) in &cases {
        let p = |tag: &str| dir.path().join(format!("{name}-{tag}.csv"));
        let (a, b, c) = (p("w1"), p("w3"), p("replay"));
        let with_out = |path: &Path| -> Vec<String> {
            let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            v.push("--out".into());
            v.push(path.display().to_string());
            v
        };
        let manifest = format!("{}.manifest", a.display());
        let replay = vec!["--config", manifest.as_str(), "--out", c.to_str().unwrap()];
        let res = run_cli(bin, &with_out(&a), "1")
            .and_then(|_| run_cli(bin, &with_out(&b), "3"))
            .and_then(|_| run_cli(bin, &replay, "2"));
        match res {
            Err(e) => failures.push(format!("{name}: {e}")),
            Ok(()) => {
                let fa = std::fs::read(&a).unwrap();
                if fa.is_empty() || fa != std::fs::read(&b).unwrap() || fa != std::fs::read(&c).unwrap() {
                    failures.push(format!("{name}: outputs differ"));
                }
            }
        }
    }
    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} commands byte-identical across --workers 1/3 and manifest replay", cases.len())
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("constants oracle", c1_constants),
        ("sampler CF fidelity", c2_sampler_cf),
        ("Pareto law", c3_pareto),
        ("W1 exactness", c4_w1_exact),
        ("deterministic OU rate", c5_cf_rate),
        ("Monte Carlo rate", c6_mc_rate),
        ("contraction", c7_contraction),
        ("moment boundedness", c8_moments),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({:.1}s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
