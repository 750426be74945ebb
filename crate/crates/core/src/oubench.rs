//! Deterministic benchmark on the one-dimensional Ornstein-Uhlenbeck process
//! `dX = -X dt + dZ`.
//!
//! Its invariant law is `α^{-1/α} Z_1` with characteristic function
//! `exp(-|ξ|^α / α)`. The invariant law of the Pareto chain has CF
//!
//! ```text
//! ∏_{i>=0} φ((η^{1/α}/σ) (1-η)^i ξ),   φ(ξ) = 1 - α ∫_1^∞ (1 - cos ξz) z^{-1-α} dz,
//! ```
//!
//! and that of the stable chain collapses to `exp(-|ξ|^α η / (1 - (1-η)^α))`.
//! Integrating the CF difference over `[-1, 1]` against the Lipschitz
//! witness `h(x) = sin x / (M x)` gives a certified lower bound on W1.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, StabilityIndex};
use crate::quad::{integrate, one_minus_cos_tail};
use crate::scheme::Scheme;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Relative slack on `|log φ(u)| <= σ^α |u|^α` used when sizing the product.
const TAIL_MARGIN: f64 = 0.1;
/// Arguments up to this size use the power series for `φ`.
const SERIES_MAX_ARG: f64 = 2.0;
/// Iterated powers in the product are recomputed from scratch this often.
const REANCHOR: usize = 4096;
const MAX_GAP_PIECES: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct OUBenchConfig {
    pub alpha: f64,
    /// Strictly decreasing step sizes in `(0, 1)`.
    pub eta_grid: Vec<f64>,
    pub quad_tol: f64,
    pub product_tail_tol: f64,
}

impl OUBenchConfig {
    pub fn new(alpha: f64, eta_grid: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            alpha,
            eta_grid,
            quad_tol: DEFAULT_QUAD_TOL,
            product_tail_tol: DEFAULT_TAIL_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        StabilityIndex::new(self.alpha)?;
        if self.eta_grid.is_empty() {
            return Err(Error::domain("eta grid is empty"));
        }
        if self.eta_grid.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::domain("every step size must lie in (0, 1)"));
        }
        if self.eta_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::domain("eta grid must be strictly decreasing"));
        }
        if !(self.quad_tol > 0.0 && self.product_tail_tol > 0.0) {
            return Err(Error::domain("tolerances must be positive"));
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("step size must lie in (0, 1), got {eta}")))
    }
}

/// `exp(-|ξ|^α / α)`, the CF of the invariant law.
pub fn exact_inv_cf(alpha: f64, xi: f64) -> Result<f64> {
    let a = StabilityIndex::new(alpha)?.get();
    Ok((-xi.abs().powf(a) / a).exp())
}

/// `φ(ξ)` from its defining integral, to absolute accuracy `quad_tol`.
pub fn pareto_cf(alpha: f64, xi: f64, quad_tol: f64) -> Result<f64> {
    let a = StabilityIndex::new(alpha)?.get();
    let u = xi.abs();
    if u == 0.0 {
        return Ok(1.0);
    }
    let weight = a * u.powf(a);
    let j = one_minus_cos_tail(a, u, quad_tol / weight)?;
    Ok(1.0 - weight * j.value)
}

/// `φ(u) - 1` from the rearranged series
/// `-σ^α|u|^α + α Σ_{k>=1} (-1)^{k+1} u^{2k} / ((2k)! (2k - α))`,
/// given `x = |u|^α` and `y = u²`.
#[inline]
fn pareto_cf_minus_one(alpha: f64, sigma_pow_alpha: f64, x: f64, y: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow_fact = 1.0; // y^k / (2k)!
    for k in 1..=40 {
        let two_k = 2.0 * k as f64;
        pow_fact *= y / ((two_k - 1.0) * two_k);
        let term = pow_fact / (two_k - alpha);
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term <= 1e-18 * sum.abs() {
            break;
        }
    }
    alpha * sum - sigma_pow_alpha * x
}

/// `φ(u)` by its power series; accurate for `|u| <= 2`, falls back to
/// quadrature beyond.
pub fn pareto_cf_series(alpha: f64, u: f64) -> Result<f64> {
    let spec = NoiseSpec::new(alpha, 1)?;
    let u = u.abs();
    if u > SERIES_MAX_ARG {
        return pareto_cf(alpha, u, DEFAULT_QUAD_TOL);
    }
    Ok(1.0 + pareto_cf_minus_one(alpha, spec.sigma_pow_alpha(), u.powf(alpha), u * u))
}

/// CF of the invariant law of the Pareto chain for OU.
///
/// The product `∏ φ(c (1-η)^i ξ)`, `c = η^{1/α}/σ`, is truncated at the
/// first `I` with `η|ξ|^α q^I / (1 - q) · (1 + margin) < tail_tol`,
/// `q = (1-η)^α`, and the leading-order tail `exp(-η|ξ|^α q^{I+1}/(1-q))`
/// is applied.
pub fn pareto_scheme_inv_cf(alpha: f64, eta: f64, xi: f64, tail_tol: f64) -> Result<f64> {
    let spec = NoiseSpec::new(alpha, 1)?;
    check_eta(eta)?;
    if !(tail_tol > 0.0) {
        return Err(Error::domain("tail tolerance must be positive"));
    }
    let abs_xi = xi.abs();
    if abs_xi == 0.0 {
        return Ok(1.0);
    }
    let a = spec.alpha();
    let s = spec.sigma_pow_alpha();
    let r = 1.0 - eta;
    let q = r.powf(a);
    let one_minus_q = -(a * (-eta).ln_1p()).exp_m1();
    let lead = eta * abs_xi.powf(a) / one_minus_q;

    let ratio = tail_tol / (lead * (1.0 + TAIL_MARGIN));
    let last = if ratio >= 1.0 {
        0
    } else {
        (ratio.ln() / q.ln()).ceil().max(0.0) as usize
    };

    let u0 = eta.powf(1.0 / a) / spec.sigma() * abs_xi;
    let r2 = r * r;
    let mut log_sum = 0.0;
    let mut comp = 0.0;
    let (mut x, mut y) = (0.0, 0.0);
    for i in 0..=last {
        if i % REANCHOR == 0 {
            let u = u0 * r.powf(i as f64);
            x = u.powf(a);
            y = u * u;
        }
        let w = if y <= SERIES_MAX_ARG * SERIES_MAX_ARG {
            pareto_cf_minus_one(a, s, x, y)
        } else {
            pareto_cf(a, y.sqrt(), tail_tol.min(DEFAULT_QUAD_TOL))? - 1.0
        };
        if w <= -1.0 {
            return Err(Error::Numerical(format!(
                "product factor {i} is nonpositive (φ = {}); log-product undefined",
                1.0 + w
            )));
        }
        // Neumaier summation: a few hundred thousand small terms.
        let term = w.ln_1p();
        let t = log_sum + term;
        comp += if log_sum.abs() >= term.abs() {
            (log_sum - t) + term
        } else {
            (term - t) + log_sum
        };
        log_sum = t;
        x *= q;
        y *= r2;
    }
    let tail = lead * q.powf(last as f64 + 1.0);
    Ok((log_sum + comp - tail).exp())
}

/// Stable-chain analogue: `exp(-|ξ|^α η / (1 - (1-η)^α))`.
pub fn stable_scheme_inv_cf(alpha: f64, eta: f64, xi: f64) -> Result<f64> {
    let a = StabilityIndex::new(alpha)?.get();
    check_eta(eta)?;
    let one_minus_q = -(a * (-eta).ln_1p()).exp_m1();
    Ok((-xi.abs().powf(a) * eta / one_minus_q).exp())
}

/// Invariant CF of the chosen scheme at `ξ`.
pub fn scheme_inv_cf(alpha: f64, eta: f64, scheme: Scheme, xi: f64, tail_tol: f64) -> Result<f64> {
    match scheme {
        Scheme::ParetoNoise => pareto_scheme_inv_cf(alpha, eta, xi, tail_tol),
        Scheme::StableNoise => stable_scheme_inv_cf(alpha, eta, xi),
    }
}

/// `∫_{-1}^{1} (scheme invariant CF - exact CF) dξ`, computed as twice the
/// integral over `[0, 1]`.
///
/// Positive for the Pareto chain, negative for the stable chain (whose
/// invariant law is slightly wider than the exact one).
pub fn cf_gap(alpha: f64, eta: f64, scheme: Scheme, quad_tol: f64) -> Result<f64> {
    cf_gap_with_tail(alpha, eta, scheme, quad_tol, DEFAULT_TAIL_TOL)
}

pub fn cf_gap_with_tail(alpha: f64, eta: f64, scheme: Scheme, quad_tol: f64, tail_tol: f64) -> Result<f64> {
    let a = StabilityIndex::new(alpha)?.get();
    check_eta(eta)?;
    if !(quad_tol > 0.0) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    // Evaluation errors inside the integrand are latched and re-raised.
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let integrand = |xi: f64| match scheme_inv_cf(a, eta, scheme, xi, tail_tol) {
        Ok(v) => v - (-xi.powf(a) / a).exp(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let half = integrate(integrand, 0.0, 1.0, quad_tol / 2.0, MAX_GAP_PIECES);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * half?.value)
}

/// `(x cos x - sin x) / x²`, the derivative of `sin x / x`.
fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // -x/3 + x³/30
        return -x / 3.0 + x * x * x / 30.0;
    }
    let (s, c) = x.sin_cos();
    (x * c - s) / (x * x)
}

/// `M = sup_x |(x cos x - sin x) / x²|`, the Lipschitz constant of
/// `sin x / x`.
///
/// Grid search over `(0, 50]` at spacing `1e-4`, then golden-section
/// refinement around the best grid point.
pub fn lipschitz_constant_m() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| {
        let step = 1e-4;
        let n = (50.0 / step) as usize;
        let (mut best_x, mut best) = (step, 0.0);
        for i in 1..=n {
            let x = i as f64 * step;
            let v = sinc_derivative(x).abs();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let f = |x: f64| sinc_derivative(x).abs();
        let (mut lo, mut hi) = (best_x - step, best_x + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        for _ in 0..80 {
            if f(c) > f(d) {
                hi = d;
            } else {
                lo = c;
            }
            c = hi - g * (hi - lo);
            d = lo + g * (hi - lo);
        }
        f(0.5 * (lo + hi)).max(best)
    })
}

/// The 1-Lipschitz witness `h(x) = sin x / (M x)`.
pub fn witness_h(x: f64) -> f64 {
    let m = lipschitz_constant_m();
    if x == 0.0 {
        1.0 / m
    } else {
        x.sin() / (m * x)
    }
}

/// `|gap| / (2M)`: a lower bound on W1 between the exact invariant law and
/// the scheme's, since `E h(X) - E h(Y) = gap / (2M)`.
pub fn lipschitz_witness_bound(alpha: f64, eta: f64, scheme: Scheme) -> Result<f64> {
    Ok(gap_to_w1_lower(cf_gap(alpha, eta, scheme, DEFAULT_QUAD_TOL)?))
}

pub fn gap_to_w1_lower(gap: f64) -> f64 {
    gap.abs() / (2.0 * lipschitz_constant_m())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OUBenchRow {
    pub eta: f64,
    pub gap_pareto: f64,
    pub gap_stable: f64,
    pub w1_lower_pareto: f64,
    pub w1_lower_stable: f64,
}

/// Both gaps and witness bounds for every step size, in grid order.
pub fn run_benchmark(cfg: &OUBenchConfig) -> Result<Vec<OUBenchRow>> {
    cfg.validate()?;
    let rows: Vec<Result<OUBenchRow>> = cfg
        .eta_grid
        .par_iter()
        .map(|&eta| {
            let gp = cf_gap_with_tail(cfg.alpha, eta, Scheme::ParetoNoise, cfg.quad_tol, cfg.product_tail_tol)?;
            let gs = cf_gap(cfg.alpha, eta, Scheme::StableNoise, cfg.quad_tol)?;
            Ok(OUBenchRow {
                eta,
                gap_pareto: gp,
                gap_stable: gs,
                w1_lower_pareto: gap_to_w1_lower(gp),
                w1_lower_stable: gap_to_w1_lower(gs),
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// Gaps for one scheme over a grid, in grid order.
pub fn cf_gap_grid(alpha: f64, etas: &[f64], scheme: Scheme, quad_tol: f64) -> Result<Vec<f64>> {
    let gaps: Vec<Result<f64>> = etas.par_iter().map(|&e| cf_gap(alpha, e, scheme, quad_tol)).collect();
    gaps.into_iter().collect()
}
