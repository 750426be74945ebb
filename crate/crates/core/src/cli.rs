//! Command-line front end behind the `stable-em` binary.
//!
//! Every subcommand that writes a file (`--out PATH`) also writes
//! `PATH.manifest`: flat `key = value` lines holding the subcommand, every
//! resolved flag, the crate version and a timestamp. Passing that file back
//! through `--config` reproduces the output; flags given on the command line
//! override the file.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 numerical failure,
//! 3 a checked bound was falsified.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::csvio::{fmt_g17, parse_eta_grid, parse_f64_list, write_table};
use crate::drift::{check_assumption_a, implied_dim, parse_drift, DriftModel};
use crate::error::{Error, Result};
use crate::noise::{
    c_d_alpha_quadrature, fill_isotropic_stable, fill_pareto, sample_sym_stable_1d, NoiseSpec,
};
use crate::oubench::{cf_gap_grid, gap_to_w1_lower, DEFAULT_QUAD_TOL};
use crate::ratestudy::{fit_loglog, run_rate_study, RateMethod, RateReport, RateStudy};
use crate::rng::RngStream;
use crate::scheme::{coupled_pair_decay, moment_track, run_ensemble, ChainConfig, Scheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FALSIFIED: i32 = 3;

/// Draws per RNG stream in `sample`.
const SAMPLE_BLOCK: usize = 4096;

/// Keys of a manifest that are not flags.
const MANIFEST_ONLY: [&str; 4] = ["subcommand", "version", "timestamp", "config"];

#[derive(Parser, Debug)]
#[command(name = "stable-em", version, about = "Euler-Maruyama schemes for α-stable SDEs", args_override_self = true)]
pub struct Cli {
    /// Worker threads; affects wall time only.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// `key = value` file of flag defaults (e.g. a previous run's manifest).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print σ_{d-1}, C_{d,α}, σ and the quadrature cross-check residual.
    Constants(ConstantsArgs),
    /// Draw stable, isotropic stable or Pareto variates.
    Sample(SampleArgs),
    /// Final states of an ensemble of chains.
    Simulate(SimulateArgs),
    /// CF gap and W1 lower bound on the OU benchmark.
    CfGap(CfGapArgs),
    /// Step-size sweep with a log-log slope fit.
    RateStudy(RateStudyArgs),
    /// Mean distance of synchronously coupled chains per step.
    CouplingDecay(CouplingArgs),
    /// Probe a drift's declared dissipativity and derivative bounds.
    CheckDrift(CheckDriftArgs),
    /// Per-step β-th absolute moments.
    Moments(MomentsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Stable,
    Pareto,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Stable => Scheme::StableNoise,
            SchemeArg::Pareto => Scheme::ParetoNoise,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Stable1d,
    Isotropic,
    Pareto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mcw1,
    Cfgap,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub kind: SampleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    /// Time parameter of the stable laws.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags shared by the chain-running subcommands.
#[derive(Args, Debug)]
pub struct ChainArgs {
    /// `name` or `name:p1,p2,...` (ou, linear:a11,a12,..., ou-sine:c).
    #[arg(long, default_value = "ou")]
    pub drift: String,
    /// Dimension; defaults to the drift's implied dimension or 1.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub ensemble: usize,
    /// Start point, comma-separated; a single value is repeated.
    #[arg(long, default_value = "0")]
    pub x0: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Pareto)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Args, Debug)]
pub struct CfGapArgs {
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Pareto)]
    pub scheme: SchemeArg,
    /// `2^-a..2^-b` or a comma list.
    #[arg(long, default_value = "2^-8..2^-14")]
    pub eta_grid: String,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RateStudyArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Cfgap)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Pareto)]
    pub scheme: SchemeArg,
    #[arg(long, default_value = "ou")]
    pub drift: String,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value = "2^-3..2^-7")]
    pub eta_grid: String,
    #[arg(long, default_value_t = 10_000)]
    pub ensemble: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `η N` for every step size; defaults to 20/θ1.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = crate::ratestudy::DEFAULT_REFINEMENT)]
    pub refinement: usize,
    /// Moment order for the stable-noise rate `1 + 1/α - 1/β`.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value = "0")]
    pub x0: String,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CouplingArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Stable)]
    pub scheme: SchemeArg,
    #[arg(long, default_value = "ou")]
    pub drift: String,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long)]
    pub x0: String,
    #[arg(long)]
    pub y0: String,
    #[arg(long, default_value_t = 64)]
    pub ensemble: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckDriftArgs {
    #[arg(long)]
    pub drift: String,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub n_pairs: usize,
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Pareto)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1.2)]
    pub beta: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Constants(_) => "constants",
        Command::Sample(_) => "sample",
        Command::Simulate(_) => "simulate",
        Command::CfGap(_) => "cf-gap",
        Command::RateStudy(_) => "rate-study",
        Command::CouplingDecay(_) => "coupling-decay",
        Command::CheckDrift(_) => "check-drift",
        Command::Moments(_) => "moments",
    }
}

/// Prints a diagnostic to stderr, in colour only on a terminal without
/// `NO_COLOR`.
pub fn warn(msg: &str) {
    let stderr = std::io::stderr();
    let colour = std::env::var_os("NO_COLOR").is_none() && stderr.is_terminal();
    let mut h = stderr.lock();
    let _ = if colour {
        writeln!(h, "\x1b[33mwarning:\x1b[0m {msg}")
    } else {
        writeln!(h, "warning: {msg}")
    };
}

fn error_line(msg: &str) {
    let stderr = std::io::stderr();
    let colour = std::env::var_os("NO_COLOR").is_none() && stderr.is_terminal();
    let mut h = stderr.lock();
    let _ = if colour {
        writeln!(h, "\x1b[31merror:\x1b[0m {msg}")
    } else {
        writeln!(h, "error: {msg}")
    };
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected 'key = value'", path.display(), n + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

const GLOBAL_WITH_VALUE: [&str; 2] = ["--workers", "--config"];

fn subcommand_names() -> Vec<String> {
    Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect()
}

/// Position of the subcommand token in `args` (index 0 is the program).
fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let names = subcommand_names();
    args.iter()
        .skip(1)
        .position(|a| names.iter().any(|n| a.to_string_lossy() == n.as_str()))
        .map(|i| i + 1)
}

/// First index after the leading global options.
fn after_globals(args: &[OsString]) -> usize {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&a.as_ref()) {
            i += 2;
        } else if GLOBAL_WITH_VALUE.iter().any(|g| a.starts_with(&format!("{g}="))) {
            i += 1;
        } else {
            break;
        }
    }
    i.min(args.len())
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config-file flags in front of the command-line flags of the
/// subcommand so the latter win.
fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let pos = match subcommand_position(&args) {
        Some(p) => p,
        None => {
            let sub = entries
                .iter()
                .find(|(k, _)| k == "subcommand")
                .ok_or_else(|| Error::Parse("no subcommand given and the config file names none".into()))?;
            let at = after_globals(&args);
            args.insert(at, OsString::from(&sub.1));
            at
        }
    };
    let mut injected = Vec::new();
    for (k, v) in entries {
        if MANIFEST_ONLY.contains(&k.as_str()) || k == "workers" {
            continue;
        }
        injected.push(OsString::from(format!("--{k}")));
        injected.push(OsString::from(v));
    }
    args.splice(pos + 1..pos + 1, injected);
    Ok(args)
}

/// Resolved flag values of the subcommand, as manifest lines.
fn resolved_params(sub: &str, m: &ArgMatches) -> Vec<(String, String)> {
    let cmd = Cli::command();
    let Some(def) = cmd.find_subcommand(sub) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for arg in def.get_arguments() {
        let key = arg.get_id().as_str();
        if key == "workers" || key == "config" || key == "help" || key == "version" {
            continue;
        }
        if let Ok(Some(vals)) = m.try_get_raw(key) {
            let joined: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            if !joined.is_empty() {
                out.push((key.replace('_', "-"), joined.join(",")));
            }
        }
    }
    out.sort();
    out
}

fn manifest_text(sub: &str, params: &[(String, String)]) -> String {
    let mut s = format!("subcommand = {sub}\n");
    for (k, v) in params {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    s.push_str(&format!("timestamp = {ts}\n"));
    s
}

/// Where a subcommand's output goes.
struct Sink<'a> {
    out: Option<&'a Path>,
    manifest: String,
}

impl Sink<'_> {
    fn emit(&self, body: &str) -> Result<()> {
        match self.out {
            Some(path) => {
                std::fs::write(path, body)?;
                let mut m = path.as_os_str().to_owned();
                m.push(".manifest");
                std::fs::write(PathBuf::from(m), &self.manifest)?;
            }
            None => {
                let mut h = std::io::stdout().lock();
                h.write_all(body.as_bytes())?;
                h.flush()?;
            }
        }
        Ok(())
    }
}

fn resolve_dim(drift: &str, d: Option<usize>) -> usize {
    d.or_else(|| implied_dim(drift)).unwrap_or(1)
}

fn parse_point(s: &str, d: usize, what: &str) -> Result<Vec<f64>> {
    let v = parse_f64_list(s)?;
    match v.len() {
        1 => Ok(vec![v[0]; d]),
        n if n == d => Ok(v),
        n => Err(Error::domain(format!("{what} has {n} coordinates, expected {d}"))),
    }
}

fn point_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn chain_setup(scheme: SchemeArg, c: &ChainArgs) -> Result<(ChainConfig, DriftModel)> {
    let d = resolve_dim(&c.drift, c.d);
    let drift = parse_drift(&c.drift, d)?;
    let noise = NoiseSpec::new(c.alpha, d)?;
    let start = parse_point(&c.x0, d, "x0")?;
    let cfg = ChainConfig::new(scheme.into(), noise, c.eta, c.steps, start, c.ensemble, c.seed);
    cfg.validate(&drift)?;
    if let Some(msg) = cfg.step_size_warning(&drift) {
        warn(&msg);
    }
    Ok((cfg, drift))
}

fn header_xd(d: usize) -> String {
    let mut h = String::from("idx");
    for i in 1..=d {
        h.push_str(&format!(",x{i}"));
    }
    h
}

fn cmd_constants(a: &ConstantsArgs, sink: &Sink) -> Result<i32> {
    let spec = NoiseSpec::new(a.alpha, a.d)?;
    let quad = c_d_alpha_quadrature(a.d, a.alpha, a.quad_tol)?;
    let residual = (quad - spec.c_d_alpha()).abs() / spec.c_d_alpha();
    let body = format!(
        "d,alpha,surface_area,c_d_alpha,sigma,quad_residual\n{},{},{},{},{},{}\n",
        a.d,
        fmt_g17(a.alpha),
        fmt_g17(spec.surface_area()),
        fmt_g17(spec.c_d_alpha()),
        fmt_g17(spec.sigma()),
        fmt_g17(residual)
    );
    sink.emit(&body)?;
    Ok(EXIT_OK)
}

fn cmd_sample(a: &SampleArgs, sink: &Sink) -> Result<i32> {
    if a.n == 0 {
        return Err(Error::domain("--n must be at least 1"));
    }
    if !(a.t > 0.0) {
        return Err(Error::domain("--t must be positive"));
    }
    let spec = NoiseSpec::new(a.alpha, a.d)?;
    if a.kind == SampleKind::Stable1d && a.d != 1 {
        return Err(Error::domain("stable1d samples need --d 1"));
    }
    let d = a.d;
    let blocks: Vec<Result<Vec<f64>>> = (0..a.n.div_ceil(SAMPLE_BLOCK))
        .into_par_iter()
        .map(|b| {
            let n = SAMPLE_BLOCK.min(a.n - b * SAMPLE_BLOCK);
            let mut rng = RngStream::new(a.seed, b as u64);
            let mut out = vec![0.0; n * d];
            for row in out.chunks_mut(d) {
                match a.kind {
                    SampleKind::Stable1d => row[0] = sample_sym_stable_1d(&spec, a.t, &mut rng)?,
                    SampleKind::Isotropic => fill_isotropic_stable(spec.alpha(), a.t, &mut rng, row),
                    SampleKind::Pareto => fill_pareto(spec.alpha(), &mut rng, row),
                }
            }
            Ok(out)
        })
        .collect();
    let flat = blocks.into_iter().collect::<Result<Vec<_>>>()?.concat();
    let body = write_table(&header_xd(d), flat.chunks(d).map(<[f64]>::to_vec), true);
    sink.emit(&body)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(a: &SimulateArgs, sink: &Sink) -> Result<i32> {
    let (cfg, drift) = chain_setup(a.scheme, &a.chain)?;
    let e = run_ensemble(&cfg, &drift)?;
    let body = write_table(&header_xd(e.dim()), e.rows().map(<[f64]>::to_vec), true);
    sink.emit(&body)?;
    Ok(EXIT_OK)
}

fn cmd_cf_gap(a: &CfGapArgs, sink: &Sink) -> Result<i32> {
    let grid = parse_eta_grid(&a.eta_grid)?;
    let scheme: Scheme = a.scheme.into();
    let gaps = cf_gap_grid(a.alpha, &grid, scheme, a.quad_tol)?;
    let mut body = String::from("eta,gap,w1_lower\n");
    for (e, g) in grid.iter().zip(&gaps) {
        body.push_str(&format!("{},{},{}\n", fmt_g17(*e), fmt_g17(*g), fmt_g17(gap_to_w1_lower(*g))));
    }
    if grid.len() >= 2 {
        let pts: Vec<(f64, f64)> = grid.iter().copied().zip(gaps.iter().map(|g| g.abs())).collect();
        let fit = fit_loglog(&pts)?;
        let theory = match scheme {
            Scheme::ParetoNoise => 2.0 / a.alpha - 1.0,
            Scheme::StableNoise => 1.0,
        };
        body.push_str(&format!(
            "# slope={} intercept={} r2={} theory={}\n",
            fmt_g17(fit.slope),
            fmt_g17(fit.intercept),
            fmt_g17(fit.r_squared),
            fmt_g17(theory)
        ));
    }
    sink.emit(&body)?;
    Ok(EXIT_OK)
}

fn cmd_rate_study(a: &RateStudyArgs, sink: &Sink) -> Result<i32> {
    let d = resolve_dim(&a.drift, a.d);
    let drift = parse_drift(&a.drift, d)?;
    let method = match a.method {
        MethodArg::Mcw1 => RateMethod::McW1,
        MethodArg::Cfgap => RateMethod::CfGap,
    };
    let mut study = RateStudy::new(a.alpha, a.scheme.into(), method, drift, parse_eta_grid(&a.eta_grid)?);
    study.ensemble = a.ensemble;
    study.seed = a.seed;
    study.horizon = a.horizon;
    study.refinement = a.refinement;
    study.beta = a.beta;
    study.quad_tol = a.quad_tol;
    study.start = Some(parse_point(&a.x0, d, "x0")?);
    let report: RateReport = run_rate_study(&study)?;
    sink.emit(&report.to_csv())?;
    Ok(EXIT_OK)
}

fn cmd_coupling(a: &CouplingArgs, sink: &Sink) -> Result<i32> {
    let d = resolve_dim(&a.drift, a.d);
    let drift = parse_drift(&a.drift, d)?;
    let noise = NoiseSpec::new(a.alpha, d)?;
    let x = parse_point(&a.x0, d, "x0")?;
    let y = parse_point(&a.y0, d, "y0")?;
    let cfg = ChainConfig::new(a.scheme.into(), noise, a.eta, a.steps, x.clone(), a.ensemble, a.seed);
    if let Some(msg) = cfg.step_size_warning(&drift) {
        warn(&msg);
    }
    let means = coupled_pair_decay(&drift, &x, &y, &cfg)?;
    let mut body = String::from("k,mean_distance\n");
    for (k, v) in means.iter().enumerate() {
        body.push_str(&format!("{k},{}\n", fmt_g17(*v)));
    }
    sink.emit(&body)?;
    Ok(EXIT_OK)
}

fn cmd_check_drift(a: &CheckDriftArgs, sink: &Sink) -> Result<i32> {
    let d = resolve_dim(&a.drift, a.d);
    let drift = parse_drift(&a.drift, d)?;
    let mut rng = RngStream::new(a.seed, 0);
    let r = check_assumption_a(&drift, a.n_pairs, a.radius, &mut rng)?;
    let body = format!(
        "check,ok,worst_margin\ndissipativity,{},{}\ngradient,{},{}\nsecond_derivative,{},{}\n",
        r.dissipativity_ok,
        fmt_g17(r.worst_margins[0]),
        r.gradient_ok,
        fmt_g17(r.worst_margins[1]),
        r.second_deriv_ok,
        fmt_g17(r.worst_margins[2])
    );
    sink.emit(&body)?;
    if r.all_ok() {
        Ok(EXIT_OK)
    } else {
        error_line(&format!("declared bounds of drift '{}' were falsified", drift.name()));
        Ok(EXIT_FALSIFIED)
    }
}

fn cmd_moments(a: &MomentsArgs, sink: &Sink) -> Result<i32> {
    let (cfg, drift) = chain_setup(a.scheme, &a.chain)?;
    let r = moment_track(&cfg, &drift, a.beta)?;
    let mut body = String::from("k,moment_beta\n");
    for (k, v) in r.per_step_moment.iter().enumerate() {
        body.push_str(&format!("{k},{}\n", fmt_g17(*v)));
    }
    sink.emit(&body)?;
    let bound = 10.0 * (1.0 + point_norm(&cfg.start).powf(a.beta));
    eprintln!(
        "sup moment {} (reference 10(1+|x|^β) = {}), V_β(x) = {}",
        fmt_g17(r.sup_moment),
        fmt_g17(bound),
        fmt_g17(r.weight_at_start)
    );
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, sink: &Sink) -> Result<i32> {
    match &cli.command {
        Command::Constants(a) => cmd_constants(a, sink),
        Command::Sample(a) => cmd_sample(a, sink),
        Command::Simulate(a) => cmd_simulate(a, sink),
        Command::CfGap(a) => cmd_cf_gap(a, sink),
        Command::RateStudy(a) => cmd_rate_study(a, sink),
        Command::CouplingDecay(a) => cmd_coupling(a, sink),
        Command::CheckDrift(a) => cmd_check_drift(a, sink),
        Command::Moments(a) => cmd_moments(a, sink),
    }
}

fn out_path(c: &Command) -> Option<&Path> {
    match c {
        Command::Constants(a) => a.out.as_deref(),
        Command::Sample(a) => a.out.as_deref(),
        Command::Simulate(a) => a.chain.out.as_deref(),
        Command::CfGap(a) => a.out.as_deref(),
        Command::RateStudy(a) => a.out.as_deref(),
        Command::CouplingDecay(a) => a.out.as_deref(),
        Command::CheckDrift(a) => a.out.as_deref(),
        Command::Moments(a) => a.chain.out.as_deref(),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            error_line(&e.to_string());
            return EXIT_USAGE;
        }
    };
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let sub = subcommand_name(&cli.command);
    let params = matches
        .subcommand()
        .map(|(name, m)| resolved_params(name, m))
        .unwrap_or_default();
    let sink = Sink {
        out: out_path(&cli.command),
        manifest: manifest_text(sub, &params),
    };

    let go = || dispatch(&cli, &sink);
    let result = match cli.workers {
        Some(0) => Err(Error::domain("--workers must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(Error::Numerical(format!("could not start worker pool: {e}"))),
        },
        None => go(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            error_line(&e.to_string());
            e.exit_code()
        }
    }
}
