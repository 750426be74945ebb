//! The two Euler-Maruyama chains and the ensemble machinery around them.
//!
//! ```text
//! stable:  Y_{k+1} = Y_k + η b(Y_k) + (Z_{(k+1)η} - Z_{kη})
//! pareto:  Ỹ_{k+1} = Ỹ_k + η b(Ỹ_k) + (η^{1/α}/σ) Z̃_{k+1}
//! ```
//!
//! Chain `j` of an ensemble draws its increments, one per step and in step
//! order, from `RngStream::new(seed, j)`. Aggregates over chains are formed
//! per fixed block of chains and combined in block order, so every output is
//! bit-identical whatever the number of rayon workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::drift::DriftModel;
use crate::error::{Error, Result};
use crate::metrics::EmpiricalMeasure;
use crate::noise::{cms_symmetric, fill_isotropic_stable, fill_pareto, NoiseSpec};
use crate::rng::RngStream;

/// Chains per accumulation block for per-step statistics.
const BLOCK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Exact α-stable increments.
    StableNoise,
    /// Scaled Pareto increments.
    ParetoNoise,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::StableNoise => "stable",
            Scheme::ParetoNoise => "pareto",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stable" | "stablenoise" | "stable-noise" => Ok(Scheme::StableNoise),
            "pareto" | "paretonoise" | "pareto-noise" => Ok(Scheme::ParetoNoise),
            other => Err(Error::Parse(format!("unknown scheme '{other}' (expected stable or pareto)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub scheme: Scheme,
    pub noise: NoiseSpec,
    /// Step size `η ∈ (0, 1)`.
    pub eta: f64,
    /// Number of steps `N`.
    pub steps: usize,
    /// Starting point, of length `noise.dim()`.
    pub start: Vec<f64>,
    /// Number of independent chains `m`.
    pub ensemble: usize,
    pub seed: u64,
    /// Test hook: force every increment to zero, leaving the deterministic
    /// recursion `y <- y + η b(y)`.
    pub zero_noise: bool,
}

impl ChainConfig {
    pub fn new(scheme: Scheme, noise: NoiseSpec, eta: f64, steps: usize, start: Vec<f64>, ensemble: usize, seed: u64) -> Self {
        Self {
            scheme,
            noise,
            eta,
            steps,
            start,
            ensemble,
            seed,
            zero_noise: false,
        }
    }

    pub fn with_zero_noise(mut self) -> Self {
        self.zero_noise = true;
        self
    }

    pub fn validate(&self, drift: &DriftModel) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::domain(format!("step size must lie in (0, 1), got {}", self.eta)));
        }
        if self.ensemble == 0 {
            return Err(Error::domain("ensemble size must be at least 1"));
        }
        let d = self.noise.dim();
        if self.start.len() != d {
            return Err(Error::domain(format!(
                "start point has {} coordinates, noise dimension is {d}",
                self.start.len()
            )));
        }
        if drift.dim() != d {
            return Err(Error::domain(format!(
                "drift dimension {} does not match noise dimension {d}",
                drift.dim()
            )));
        }
        if self.start.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("start point must be finite"));
        }
        Ok(())
    }

    /// A message when `η` is at or above `min{1, θ1/(8θ2²), 1/θ1}`.
    ///
    /// Larger steps are allowed; the error bounds just no longer apply.
    pub fn step_size_warning(&self, drift: &DriftModel) -> Option<String> {
        let bound = drift.step_size_bound();
        (self.eta >= bound).then(|| {
            format!(
                "step size {} is not below min{{1, θ1/(8θ2²), 1/θ1}} = {bound} for drift '{}'",
                self.eta,
                drift.name()
            )
        })
    }
}

/// Per-chain increment generator.
#[derive(Clone, Copy, Debug)]
struct Increments {
    scheme: Scheme,
    alpha: f64,
    eta: f64,
    scale: f64,
    zero: bool,
}

impl Increments {
    fn new(cfg: &ChainConfig) -> Self {
        let alpha = cfg.noise.alpha();
        let root = cfg.eta.powf(1.0 / alpha);
        let scale = match cfg.scheme {
            Scheme::StableNoise => root,
            Scheme::ParetoNoise => root / cfg.noise.sigma(),
        };
        Self {
            scheme: cfg.scheme,
            alpha,
            eta: cfg.eta,
            scale,
            zero: cfg.zero_noise,
        }
    }

    #[inline]
    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        if self.zero {
            out.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        match self.scheme {
            Scheme::StableNoise if out.len() == 1 => out[0] = self.scale * cms_symmetric(self.alpha, rng),
            Scheme::StableNoise => fill_isotropic_stable(self.alpha, self.eta, rng, out),
            Scheme::ParetoNoise => {
                fill_pareto(self.alpha, rng, out);
                out.iter_mut().for_each(|x| *x *= self.scale);
            }
        }
    }
}

/// `y <- y + η b(y) + inc`; false when the new state is not finite.
#[inline]
fn advance(y: &mut [f64], drift: &DriftModel, eta: f64, inc: &[f64], b: &mut [f64]) -> bool {
    drift.eval_into(y, b);
    let mut ok = true;
    for i in 0..y.len() {
        y[i] = y[i] + eta * b[i] + inc[i];
        ok &= y[i].is_finite();
    }
    ok
}

fn single_step(y: &[f64], drift: &DriftModel, eta: f64, inc: &[f64]) -> Result<Vec<f64>> {
    if y.len() != drift.dim() || inc.len() != drift.dim() {
        return Err(Error::domain("state, increment and drift dimensions differ"));
    }
    let mut out = y.to_vec();
    let mut b = vec![0.0; y.len()];
    if advance(&mut out, drift, eta, inc, &mut b) {
        Ok(out)
    } else {
        Err(Error::Numerical("Euler-Maruyama step produced a non-finite state".into()))
    }
}

/// One step of the stable scheme, `y + η b(y) + dz`, with `dz` an isotropic
/// stable increment over time `η` supplied by the caller.
pub fn em_step_stable(y: &[f64], drift: &DriftModel, eta: f64, dz: &[f64]) -> Result<Vec<f64>> {
    single_step(y, drift, eta, dz)
}

/// One step of the Pareto scheme, `y + η b(y) + (η^{1/α}/σ) z̃`.
pub fn em_step_pareto(y: &[f64], drift: &DriftModel, eta: f64, ztilde: &[f64], noise: &NoiseSpec) -> Result<Vec<f64>> {
    let scale = eta.powf(1.0 / noise.alpha()) / noise.sigma();
    let inc: Vec<f64> = ztilde.iter().map(|z| scale * z).collect();
    single_step(y, drift, eta, &inc)
}

/// Runs chain `j` and reports the state after every step (`k = 1..=N`) to
/// `visit`.
fn run_chain<F>(cfg: &ChainConfig, drift: &DriftModel, inc: &Increments, j: usize, mut visit: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, &[f64]),
{
    let d = cfg.start.len();
    let mut rng = RngStream::new(cfg.seed, j as u64);
    let mut y = cfg.start.clone();
    let mut dz = vec![0.0; d];
    let mut b = vec![0.0; d];
    for k in 0..cfg.steps {
        inc.draw(&mut rng, &mut dz);
        if !advance(&mut y, drift, cfg.eta, &dz, &mut b) {
            return Err(Error::NonFinite { chain: j, step: k + 1 });
        }
        visit(k + 1, &y);
    }
    Ok(y)
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Final states of `m` independent chains.
pub fn run_ensemble(cfg: &ChainConfig, drift: &DriftModel) -> Result<EmpiricalMeasure> {
    cfg.validate(drift)?;
    let inc = Increments::new(cfg);
    let finals: Vec<Result<Vec<f64>>> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|j| run_chain(cfg, drift, &inc, j, |_, _| {}))
        .collect();
    let finals = first_error(finals)?;
    EmpiricalMeasure::new(cfg.noise.dim(), finals.concat())
}

/// Stand-in for the law of the SDE at time `η N`: the stable scheme run with
/// step `η / refinement` for `refinement · N` steps.
///
/// A refinement of 64 is the usual choice; 1 reproduces [`run_ensemble`]
/// with stable noise.
pub fn reference_sde_ensemble(cfg: &ChainConfig, drift: &DriftModel, refinement: usize) -> Result<EmpiricalMeasure> {
    if refinement == 0 {
        return Err(Error::domain("refinement must be at least 1"));
    }
    let fine = ChainConfig {
        scheme: Scheme::StableNoise,
        eta: cfg.eta / refinement as f64,
        steps: cfg
            .steps
            .checked_mul(refinement)
            .ok_or_else(|| Error::domain("refined step count overflows"))?,
        ..cfg.clone()
    };
    run_ensemble(&fine, drift)
}

/// Accumulates a per-step statistic over all chains, `k = 0..=N`.
fn per_step_mean<F>(cfg: &ChainConfig, chain: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let n_blocks = cfg.ensemble.div_ceil(BLOCK);
    let partials: Vec<Result<Vec<f64>>> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = vec![0.0; cfg.steps + 1];
            let lo = blk * BLOCK;
            let hi = (lo + BLOCK).min(cfg.ensemble);
            for j in lo..hi {
                chain(j, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let partials = first_error(partials)?;
    let mut total = vec![0.0; cfg.steps + 1];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let m = cfg.ensemble as f64;
    total.iter_mut().for_each(|t| *t /= m);
    Ok(total)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Synchronous coupling: two chains from `x` and `y` driven by the same
/// increments. Returns `E|X_k - Y_k|` over the ensemble for `k = 0..=N`,
/// an upper bound for the W1 distance between the two laws at each step.
///
/// `cfg.start` is not used.
pub fn coupled_pair_decay(drift: &DriftModel, x: &[f64], y: &[f64], cfg: &ChainConfig) -> Result<Vec<f64>> {
    let probe = ChainConfig {
        start: x.to_vec(),
        ..cfg.clone()
    };
    probe.validate(drift)?;
    if y.len() != x.len() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("second start point must be finite and of the same dimension"));
    }
    let inc = Increments::new(cfg);
    let d = x.len();
    per_step_mean(cfg, |j, acc| {
        let mut rng = RngStream::new(cfg.seed, j as u64);
        let (mut u, mut v) = (x.to_vec(), y.to_vec());
        let mut dz = vec![0.0; d];
        let mut b = vec![0.0; d];
        acc[0] += distance(&u, &v);
        for k in 0..cfg.steps {
            inc.draw(&mut rng, &mut dz);
            let ok_u = advance(&mut u, drift, cfg.eta, &dz, &mut b);
            let ok_v = advance(&mut v, drift, cfg.eta, &dz, &mut b);
            if !(ok_u && ok_v) {
                return Err(Error::NonFinite { chain: j, step: k + 1 });
            }
            acc[k + 1] += distance(&u, &v);
        }
        Ok(())
    })
}

/// Per-step `β`-th absolute moments of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub beta: f64,
    /// `E|Y_k|^β` for `k = 0..=N`.
    pub per_step_moment: Vec<f64>,
    pub sup_moment: f64,
    /// `V_β(x) = (1 + |x|²)^{β/2}` at the starting point.
    pub weight_at_start: f64,
}

impl MomentReport {
    /// Relative spread `(max - min) / mean` of the per-step moments over the
    /// trailing `fraction` of steps.
    pub fn tail_spread(&self, fraction: f64) -> f64 {
        let n = self.per_step_moment.len();
        let start = ((1.0 - fraction) * n as f64).floor() as usize;
        let tail = &self.per_step_moment[start.min(n - 1)..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        (hi - lo) / mean
    }
}

/// `V_β(x) = (1 + |x|²)^{β/2}`.
pub fn lyapunov_weight(x: &[f64], beta: f64) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(beta / 2.0)
}

/// Monte Carlo estimate of `E|Y_k|^β` along the chain.
///
/// Requires `1 <= β < α`; moments of order `α` and above are infinite.
pub fn moment_track(cfg: &ChainConfig, drift: &DriftModel, beta: f64) -> Result<MomentReport> {
    cfg.validate(drift)?;
    let alpha = cfg.noise.alpha();
    if !(beta >= 1.0 && beta < alpha) {
        return Err(Error::domain(format!(
            "moment order must satisfy 1 <= beta < alpha = {alpha}, got {beta}"
        )));
    }
    let inc = Increments::new(cfg);
    let start_moment = norm(&cfg.start).powf(beta);
    let per_step = per_step_mean(cfg, |j, acc| {
        acc[0] += start_moment;
        run_chain(cfg, drift, &inc, j, |k, y| acc[k] += norm(y).powf(beta))?;
        Ok(())
    })?;
    let sup = per_step.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentReport {
        beta,
        per_step_moment: per_step,
        sup_moment: sup,
        weight_at_start: lyapunov_weight(&cfg.start, beta),
    })
}
