//! Normalisation constants and exact samplers for rotationally invariant
//! α-stable noise and its Pareto surrogate.
//!
//! The stable process is normalised so that `E e^{i<ξ, Z_t>} = e^{-t|ξ|^α}`.
//! The Pareto vector has density `α / (σ_{d-1} |z|^{α+d})` on `|z| > 1`, and
//! `σ` is chosen so that `(η^{1/α}/σ) Z̃` has the same small-frequency
//! behaviour as a stable increment over a step `η`.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::RngStream;

/// Distance kept from the endpoints of `(1, 2)`.
pub const ALPHA_MARGIN: f64 = 1e-9;

/// Stability index `α`, validated to lie strictly inside `(1, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 1.0 + ALPHA_MARGIN && alpha < 2.0 - ALPHA_MARGIN {
            Ok(Self(alpha))
        } else {
            Err(Error::domain(format!(
                "stability index must lie in the open interval (1, 2), got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Surface area `σ_{d-1} = 2 π^{d/2} / Γ(d/2)` of the unit sphere in `R^d`.
pub fn surface_area(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let half = d as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / gamma(half))
}

/// `C_{d,α} = α 2^{α-1} π^{-d/2} Γ((d+α)/2) / Γ(1-α/2)`.
pub fn c_d_alpha(d: usize, alpha: f64) -> Result<f64> {
    let alpha = StabilityIndex::new(alpha)?.get();
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let df = d as f64;
    Ok(alpha * 2f64.powf(alpha - 1.0) * PI.powf(-df / 2.0) * gamma((df + alpha) / 2.0)
        / gamma(1.0 - alpha / 2.0))
}

/// `C_{d,α}` as the reciprocal of `∫_{R^d} (1 - cos y_1) |y|^{-α-d} dy`,
/// evaluated by quadrature.
///
/// Integrating out the `d-1` transverse coordinates leaves
/// `2 J(0) K_d` with `J(0) = ∫_0^∞ (1 - cos y) y^{-1-α} dy` and
/// `K_d = σ_{d-2} ∫_0^{π/2} sin^{d-2}θ cos^α θ dθ` (`K_1 = 1`).
pub fn c_d_alpha_quadrature(d: usize, alpha: f64, tol: f64) -> Result<f64> {
    let alpha = StabilityIndex::new(alpha)?.get();
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let j = quad::one_minus_cos_tail(alpha, 0.0, tol)?.value;
    let k = if d == 1 {
        1.0
    } else {
        let m = (d - 2) as i32;
        let angular = quad::integrate(
            |t: f64| t.sin().powi(m) * t.cos().max(0.0).powf(alpha),
            0.0,
            PI / 2.0,
            tol,
            2000,
        )?;
        surface_area(d - 1)? * angular.value
    };
    Ok(1.0 / (2.0 * j * k))
}

/// Parameters of the driving noise together with its derived constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    alpha: StabilityIndex,
    dim: usize,
    surface_area: f64,
    c_d_alpha: f64,
    sigma: f64,
}

impl NoiseSpec {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        let alpha_idx = StabilityIndex::new(alpha)?;
        let surface_area = surface_area(dim)?;
        let c = c_d_alpha(dim, alpha)?;
        let sigma = (alpha / (surface_area * c)).powf(1.0 / alpha);
        Ok(Self {
            alpha: alpha_idx,
            dim,
            surface_area,
            c_d_alpha: c,
            sigma,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.get()
    }

    pub fn stability_index(&self) -> StabilityIndex {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `σ_{d-1}`.
    pub fn surface_area(&self) -> f64 {
        self.surface_area
    }

    /// `C_{d,α}`.
    pub fn c_d_alpha(&self) -> f64 {
        self.c_d_alpha
    }

    /// Pareto scaling `σ`, defined by `σ^α = α / (σ_{d-1} C_{d,α})`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_pow_alpha(&self) -> f64 {
        self.alpha() / (self.surface_area * self.c_d_alpha)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive and finite, got {t}")))
    }
}

/// Chambers-Mallows-Stuck draw of a standard symmetric stable variable with
/// characteristic function `e^{-|ξ|^α}`.
#[inline]
pub(crate) fn cms_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let w: f64 = rng.sample(Exp1);
    let inv = 1.0 / alpha;
    (alpha * v).sin() / v.cos().powf(inv) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) * inv)
}

/// Kanter's draw of a positive stable variable with Laplace transform
/// `e^{-λ^a}`, `0 < a < 1`.
#[inline]
pub(crate) fn kanter_positive<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let u = PI * u;
    let w: f64 = rng.sample(Exp1);
    let inv = 1.0 / a;
    (a * u).sin() / u.sin().powf(inv) * (((1.0 - a) * u).sin() / w).powf((1.0 - a) * inv)
}

/// Uniform direction on the unit sphere of `R^d`, written into `out`.
pub(crate) fn unit_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *x = g;
            norm2 += g * g;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Marginal `Z_t` of the one-dimensional symmetric α-stable process.
pub fn sample_sym_stable_1d(spec: &NoiseSpec, t: f64, rng: &mut RngStream) -> Result<f64> {
    if spec.dim() != 1 {
        return Err(Error::domain(format!(
            "one-dimensional sampler called with d = {}",
            spec.dim()
        )));
    }
    check_time(t)?;
    Ok(t.powf(1.0 / spec.alpha()) * cms_symmetric(spec.alpha(), rng))
}

/// Value at time `t` of an `alpha_half`-stable subordinator, i.e. a positive
/// variable with `E e^{-λS} = e^{-t λ^{alpha_half}}`.
pub fn sample_pos_stable(alpha_half: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha_half > 0.5 && alpha_half < 1.0) {
        return Err(Error::domain(format!(
            "subordinator index must lie in (1/2, 1), got {alpha_half}"
        )));
    }
    check_time(t)?;
    Ok(t.powf(1.0 / alpha_half) * kanter_positive(alpha_half, rng))
}

/// Isotropic stable vector by subordination: `√(2S) G` with `S` an
/// `α/2`-stable subordinator at time `t` and `G` standard Gaussian, so that
/// `E e^{i<ξ,Z>} = E e^{-S|ξ|²} = e^{-t|ξ|^α}`.
pub fn sample_isotropic_stable(spec: &NoiseSpec, t: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_time(t)?;
    let mut out = vec![0.0; spec.dim()];
    fill_isotropic_stable(spec.alpha(), t, rng, &mut out);
    Ok(out)
}

pub(crate) fn fill_isotropic_stable<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R, out: &mut [f64]) {
    let a = alpha / 2.0;
    let s = t.powf(1.0 / a) * kanter_positive(a, rng);
    let scale = (2.0 * s).sqrt();
    for x in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = scale * g;
    }
}

/// Pareto vector with density `α / (σ_{d-1} |z|^{α+d})` on `|z| > 1`:
/// radius `U^{-1/α}`, direction uniform on the sphere.
pub fn sample_pareto_vec(spec: &NoiseSpec, rng: &mut RngStream) -> Vec<f64> {
    let mut out = vec![0.0; spec.dim()];
    fill_pareto(spec.alpha(), rng, &mut out);
    out
}

pub(crate) fn fill_pareto<R: Rng + ?Sized>(alpha: f64, rng: &mut R, out: &mut [f64]) {
    let u: f64 = rng.sample(Open01);
    let r = u.powf(-1.0 / alpha);
    unit_direction(rng, out);
    out.iter_mut().for_each(|x| *x *= r);
}
