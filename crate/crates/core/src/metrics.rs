//! Empirical measures and the distances computed between them.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A finite sample standing in for a probability law on `R^d`.
///
/// Samples are stored row-major (`m` rows of `d` coordinates). For `d = 1`
/// a sorted copy is kept so that quantile-based distances are cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    samples: Vec<f64>,
    sorted: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, samples: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("empirical measure needs dimension >= 1"));
        }
        if samples.is_empty() {
            return Err(Error::domain("empirical measure needs at least one sample"));
        }
        if samples.len() % dim != 0 {
            return Err(Error::domain(format!(
                "{} values do not form rows of length {dim}",
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample entry {pos} is not finite")));
        }
        let sorted = (dim == 1).then(|| {
            let mut s = samples.clone();
            s.sort_by(f64::total_cmp);
            s
        });
        Ok(Self { dim, samples, sorted })
    }

    pub fn from_scalars(samples: Vec<f64>) -> Result<Self> {
        Self::new(1, samples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples `m`.
    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim)
    }

    /// Sorted samples, available for one-dimensional measures.
    pub fn sorted(&self) -> Option<&[f64]> {
        self.sorted.as_deref()
    }

    /// One-dimensional projection `x -> <u, x>`.
    pub fn project(&self, u: &[f64]) -> Result<EmpiricalMeasure> {
        if u.len() != self.dim {
            return Err(Error::domain("projection direction has the wrong dimension"));
        }
        let proj = self
            .rows()
            .map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect();
        EmpiricalMeasure::from_scalars(proj)
    }

    /// Mean of `|x|^p` over the samples.
    pub fn abs_moment(&self, p: f64) -> f64 {
        let s: f64 = self
            .rows()
            .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt().powf(p))
            .sum();
        s / self.len() as f64
    }
}

fn require_1d(a: &EmpiricalMeasure) -> Result<&[f64]> {
    a.sorted()
        .ok_or_else(|| Error::domain(format!("expected a one-dimensional measure, got d = {}", a.dim())))
}

/// Wasserstein-1 distance between two one-dimensional empirical measures,
/// `∫_0^1 |F_a^{-1}(t) - F_b^{-1}(t)| dt`.
///
/// For equal sizes this is the mean absolute difference of order
/// statistics. For unequal sizes the integral is taken exactly over the
/// common refinement of the two quantile partitions, whose breakpoints
/// `i/m` and `j/n` are compared in integer arithmetic.
pub fn w1_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    let xa = require_1d(a)?;
    let xb = require_1d(b)?;
    let (m, n) = (xa.len(), xb.len());
    if m == n {
        let s: f64 = xa.iter().zip(xb).map(|(x, y)| (x - y).abs()).sum();
        return Ok(s / m as f64);
    }
    // Positions on the common grid with denominator m*n.
    let (mu, nu) = (m as u128, n as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut t: u128 = 0;
    let mut acc = 0.0;
    while i < m && j < n {
        let next_a = (i as u128 + 1) * nu;
        let next_b = (j as u128 + 1) * mu;
        let next = next_a.min(next_b);
        acc += (next - t) as f64 * (xa[i] - xb[j]).abs();
        t = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok(acc / (mu * nu) as f64)
}

/// Default number of projection directions for [`sliced_w1`].
pub const DEFAULT_SLICES: usize = 64;

/// Average of [`w1_1d`] over `n_dirs` random one-dimensional projections.
///
/// A proxy for W1 in `d >= 2`: every projection is 1-Lipschitz, so each
/// slice is bounded by the true W1 and so is their mean.
pub fn sliced_w1(a: &EmpiricalMeasure, b: &EmpiricalMeasure, n_dirs: usize, rng: &mut RngStream) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.dim() < 2 {
        return Err(Error::domain("sliced W1 is meant for d >= 2; use w1_1d"));
    }
    if n_dirs == 0 {
        return Err(Error::domain("need at least one projection direction"));
    }
    let d = a.dim();
    let mut u = vec![0.0; d];
    let mut total = 0.0;
    for _ in 0..n_dirs {
        loop {
            let mut n2 = 0.0;
            for x in u.iter_mut() {
                *x = rng.sample(StandardNormal);
                n2 += *x * *x;
            }
            if n2 > 0.0 {
                let inv = 1.0 / f64::sqrt(n2);
                u.iter_mut().for_each(|x| *x *= inv);
                break;
            }
        }
        total += w1_1d(&a.project(&u)?, &b.project(&u)?)?;
    }
    Ok(total / n_dirs as f64)
}

/// W1 for `d = 1`, sliced W1 with [`DEFAULT_SLICES`] directions otherwise.
pub fn w1_or_sliced(a: &EmpiricalMeasure, b: &EmpiricalMeasure, rng: &mut RngStream) -> Result<f64> {
    if a.dim() == 1 && b.dim() == 1 {
        w1_1d(a, b)
    } else {
        sliced_w1(a, b, DEFAULT_SLICES, rng)
    }
}

/// `(1/m) Σ_j e^{i ξ x_j}`.
pub fn empirical_cf(a: &EmpiricalMeasure, xi: f64) -> Result<Complex64> {
    let x = require_1d(a)?;
    // Sum in sorted order so the value does not depend on sample order.
    let (re, im) = x.iter().fold((0.0, 0.0), |(re, im), v| {
        let (s, c) = (xi * v).sin_cos();
        (re + c, im + s)
    });
    let m = x.len() as f64;
    Ok(Complex64::new(re / m, im / m))
}
