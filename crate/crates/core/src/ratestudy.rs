//! Step-size sweeps and log-log slope fits against the theoretical orders
//! `2/α - 1` (Pareto chain) and `1 + 1/α - 1/β` (stable chain).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::csvio::{fmt_g17, parse_f64, parse_f64_list};
use crate::drift::DriftModel;
use crate::error::{Error, Result};
use crate::metrics::{sliced_w1, w1_1d, EmpiricalMeasure, DEFAULT_SLICES};
use crate::noise::{fill_isotropic_stable, NoiseSpec, StabilityIndex};
use crate::oubench::{cf_gap_grid, DEFAULT_QUAD_TOL};
use crate::rng::RngStream;
use crate::scheme::{reference_sde_ensemble, run_ensemble, ChainConfig, Scheme};

/// Stream ids at and above this value are reserved for exact invariant
/// draws, so they never collide with chain streams `0..m`.
const EXACT_STREAM_BASE: u64 = 1 << 62;
/// Stream for the random projection directions of sliced W1.
const SLICE_STREAM: u64 = (1 << 62) - 1;
/// Exact draws per stream.
const EXACT_BLOCK: usize = 4096;
/// Seed offset for the fine reference chains.
const REFERENCE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

pub const DEFAULT_REFINEMENT: usize = 64;
pub const DEFAULT_BATCHES: usize = 10;

/// Theoretical W1 order in `η`.
///
/// Pareto: `2/α - 1`. Stable: `1 + 1/α - 1/β`, which needs `β ∈ [1, α)`.
pub fn theoretical_rate(alpha: f64, scheme: Scheme, beta: Option<f64>) -> Result<f64> {
    let a = StabilityIndex::new(alpha)?.get();
    match scheme {
        Scheme::ParetoNoise => Ok(2.0 / a - 1.0),
        Scheme::StableNoise => {
            let b = beta.ok_or_else(|| Error::domain("the stable-noise rate needs a moment order beta"))?;
            if !(b >= 1.0 && b < a) {
                return Err(Error::domain(format!("beta must lie in [1, alpha = {a}), got {b}")));
            }
            Ok(1.0 + 1.0 / a - 1.0 / b)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares on `(ln η, ln distance)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::domain("a slope fit needs at least two points"));
    }
    for &(eta, d) in points {
        if !(eta > 0.0) {
            return Err(Error::domain(format!("step size must be positive, got {eta}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::domain(format!(
                "distance {d} at eta = {eta} is not positive; increase the ensemble size so the estimate clears zero"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("step sizes must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMethod {
    /// Monte Carlo W1 between chain ensembles and a reference law.
    McW1,
    /// Deterministic characteristic-function gap on the OU benchmark.
    CfGap,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::McW1 => "mcw1",
            RateMethod::CfGap => "cfgap",
        })
    }
}

impl FromStr for RateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mcw1" | "mc" => Ok(RateMethod::McW1),
            "cfgap" | "cf" => Ok(RateMethod::CfGap),
            other => Err(Error::Parse(format!("unknown method '{other}' (expected mcw1 or cfgap)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    pub alpha: f64,
    pub method: RateMethod,
    pub eta_grid: Vec<f64>,
    pub distances: Vec<f64>,
    /// Monte Carlo standard errors of `distances`, when estimated.
    pub std_errors: Option<Vec<f64>>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theoretical_slope: f64,
}

impl RateReport {
    pub fn from_distances(
        scheme: Scheme,
        alpha: f64,
        method: RateMethod,
        eta_grid: Vec<f64>,
        distances: Vec<f64>,
        std_errors: Option<Vec<f64>>,
        theoretical_slope: f64,
    ) -> Result<Self> {
        if eta_grid.len() != distances.len() {
            return Err(Error::domain("grid and distance lists differ in length"));
        }
        let pts: Vec<(f64, f64)> = eta_grid.iter().copied().zip(distances.iter().copied()).collect();
        let fit = fit_loglog(&pts)?;
        Ok(Self {
            scheme,
            alpha,
            method,
            eta_grid,
            distances,
            std_errors,
            fitted_slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            theoretical_slope,
        })
    }

    /// `eta,distance` rows followed by `#` footer lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,distance\n");
        for (e, d) in self.eta_grid.iter().zip(&self.distances) {
            out.push_str(&format!("{},{}\n", fmt_g17(*e), fmt_g17(*d)));
        }
        out.push_str(&format!(
            "# scheme={} alpha={} method={}\n",
            self.scheme,
            fmt_g17(self.alpha),
            self.method
        ));
        if let Some(se) = &self.std_errors {
            let cells: Vec<String> = se.iter().map(|v| fmt_g17(*v)).collect();
            out.push_str(&format!("# std_errors={}\n", cells.join(",")));
        }
        out.push_str(&format!(
            "# slope={} intercept={} r2={} theory={}\n",
            fmt_g17(self.fitted_slope),
            fmt_g17(self.intercept),
            fmt_g17(self.r_squared),
            fmt_g17(self.theoretical_slope)
        ));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "eta,distance" => {}
            other => return Err(Error::Parse(format!("expected header 'eta,distance', got {other:?}"))),
        }
        let (mut etas, mut dists) = (Vec::new(), Vec::new());
        let mut meta = std::collections::HashMap::new();
        let mut std_errors = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("bad footer item '{kv}'")))?;
                    if k == "std_errors" {
                        std_errors = Some(parse_f64_list(v)?);
                    } else {
                        meta.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            let (e, d) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row '{line}'")))?;
            etas.push(parse_f64(e)?);
            dists.push(parse_f64(d)?);
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("footer lacks '{k}'")));
        Ok(Self {
            scheme: get("scheme")?.parse()?,
            alpha: parse_f64(get("alpha")?)?,
            method: get("method")?.parse()?,
            eta_grid: etas,
            distances: dists,
            std_errors,
            fitted_slope: parse_f64(get("slope")?)?,
            intercept: parse_f64(get("intercept")?)?,
            r_squared: parse_f64(get("r2")?)?,
            theoretical_slope: parse_f64(get("theory")?)?,
        })
    }
}

/// `m` draws from the OU invariant law `α^{-1/α} Z_1` in dimension `d`.
pub fn exact_ou_invariant(noise: &NoiseSpec, m: usize, seed: u64) -> Result<EmpiricalMeasure> {
    if m == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let d = noise.dim();
    let alpha = noise.alpha();
    // Z at time 1/α has the law of α^{-1/α} Z_1.
    let t = 1.0 / alpha;
    let blocks: Vec<Vec<f64>> = (0..m.div_ceil(EXACT_BLOCK))
        .into_par_iter()
        .map(|b| {
            let n = EXACT_BLOCK.min(m - b * EXACT_BLOCK);
            let mut rng = RngStream::new(seed, EXACT_STREAM_BASE + b as u64);
            let mut out = vec![0.0; n * d];
            for row in out.chunks_mut(d) {
                fill_isotropic_stable(alpha, t, &mut rng, row);
            }
            out
        })
        .collect();
    EmpiricalMeasure::new(d, blocks.concat())
}

/// Full description of a step-size sweep.
#[derive(Clone, Debug)]
pub struct RateStudy {
    pub alpha: f64,
    pub scheme: Scheme,
    pub method: RateMethod,
    pub drift: DriftModel,
    pub eta_grid: Vec<f64>,
    /// Chains per step size (Monte Carlo only).
    pub ensemble: usize,
    pub seed: u64,
    /// `η N`; defaults to `20 / θ1`.
    pub horizon: Option<f64>,
    pub start: Option<Vec<f64>>,
    /// Fine-reference refinement when no exact sampler exists.
    pub refinement: usize,
    /// Moment order for the stable-chain rate.
    pub beta: Option<f64>,
    /// Batches used for the Monte Carlo standard errors.
    pub batches: usize,
    pub quad_tol: f64,
}

impl RateStudy {
    pub fn new(alpha: f64, scheme: Scheme, method: RateMethod, drift: DriftModel, eta_grid: Vec<f64>) -> Self {
        Self {
            alpha,
            scheme,
            method,
            drift,
            eta_grid,
            ensemble: 10_000,
            seed: 0,
            horizon: None,
            start: None,
            refinement: DEFAULT_REFINEMENT,
            beta: None,
            batches: DEFAULT_BATCHES,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(20.0 / self.drift.theta1())
    }

    /// Steps for a given `η`: `round(T / η)`, at least 1.
    pub fn steps_for(&self, eta: f64) -> usize {
        ((self.horizon() / eta).round() as usize).max(1)
    }

    /// True when the exact invariant sampler applies (the `ou` drift).
    pub fn has_exact_reference(&self) -> bool {
        self.drift.name() == "ou"
    }

    fn theory(&self) -> Result<f64> {
        match (self.method, self.scheme, self.beta) {
            // the closed-form OU benchmark decays at order exactly 1
            (RateMethod::CfGap, Scheme::StableNoise, None) => Ok(1.0),
            _ => theoretical_rate(self.alpha, self.scheme, self.beta),
        }
    }
}

/// W1 (sliced when `d > 1`) and a batch-means standard error.
fn distance_with_se(a: &EmpiricalMeasure, b: &EmpiricalMeasure, batches: usize, seed: u64) -> Result<(f64, f64)> {
    let w = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| -> Result<f64> {
        if x.dim() == 1 {
            w1_1d(x, y)
        } else {
            sliced_w1(x, y, DEFAULT_SLICES, &mut RngStream::new(seed, SLICE_STREAM))
        }
    };
    let full = w(a, b)?;
    let m = a.len().min(b.len());
    if batches < 2 || m < 2 * batches {
        return Ok((full, f64::NAN));
    }
    let d = a.dim();
    let size = m / batches;
    let mut vals = Vec::with_capacity(batches);
    for k in 0..batches {
        let range = k * size * d..(k + 1) * size * d;
        let xa = EmpiricalMeasure::new(d, a.samples()[range.clone()].to_vec())?;
        let xb = EmpiricalMeasure::new(d, b.samples()[range].to_vec())?;
        vals.push(w(&xa, &xb)?);
    }
    let mean = vals.iter().sum::<f64>() / batches as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    Ok((full, (var / batches as f64).sqrt()))
}

/// Runs the sweep and fits the slope.
///
/// Monte Carlo: for every `η`, `m` chains run `round(T/η)` steps from the
/// start point (default the origin) and are compared with `m` exact
/// invariant draws (`ou` drift) or with a fine stable-noise reference.
/// The same seed is used for every `η`. CF gap: deterministic, `ou` in
/// `d = 1` only; the absolute gap is fitted.
pub fn run_rate_study(study: &RateStudy) -> Result<RateReport> {
    let alpha = StabilityIndex::new(study.alpha)?.get();
    if study.eta_grid.len() < 2 {
        return Err(Error::domain("a rate study needs at least two step sizes"));
    }
    let theory = study.theory()?;
    match study.method {
        RateMethod::CfGap => {
            if study.drift.name() != "ou" || study.drift.dim() != 1 {
                return Err(Error::domain("the CF-gap method applies to the ou drift in d = 1 only"));
            }
            let gaps = cf_gap_grid(alpha, &study.eta_grid, study.scheme, study.quad_tol)?;
            let abs: Vec<f64> = gaps.iter().map(|g| g.abs()).collect();
            RateReport::from_distances(study.scheme, alpha, RateMethod::CfGap, study.eta_grid.clone(), abs, None, theory)
        }
        RateMethod::McW1 => {
            let d = study.drift.dim();
            let noise = NoiseSpec::new(alpha, d)?;
            let start = study.start.clone().unwrap_or_else(|| vec![0.0; d]);
            let exact = if study.has_exact_reference() {
                Some(exact_ou_invariant(&noise, study.ensemble, study.seed)?)
            } else {
                None
            };
            let mut dists = Vec::with_capacity(study.eta_grid.len());
            let mut ses = Vec::with_capacity(study.eta_grid.len());
            for &eta in &study.eta_grid {
                let cfg = ChainConfig::new(
                    study.scheme,
                    noise.clone(),
                    eta,
                    study.steps_for(eta),
                    start.clone(),
                    study.ensemble,
                    study.seed,
                );
                let chains = run_ensemble(&cfg, &study.drift)?;
                let reference = match &exact {
                    Some(e) => e.clone(),
                    None => {
                        let rc = ChainConfig {
                            seed: study.seed.wrapping_add(REFERENCE_SEED_OFFSET),
                            ..cfg.clone()
                        };
                        reference_sde_ensemble(&rc, &study.drift, study.refinement)?
                    }
                };
                let (w, se) = distance_with_se(&chains, &reference, study.batches, study.seed)?;
                dists.push(w);
                ses.push(se);
            }
            let ses = ses.iter().all(|s| s.is_finite()).then_some(ses);
            RateReport::from_distances(study.scheme, alpha, RateMethod::McW1, study.eta_grid.clone(), dists, ses, theory)
        }
    }
}
