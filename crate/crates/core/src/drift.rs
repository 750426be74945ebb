//! Drift models `b: R^d -> R^d` with their declared dissipativity constants,
//! and a sampling-based falsifier for those declarations.
//!
//! A model carries `(θ1, θ2, θ3, K)` with the meaning
//!
//! ```text
//! <b(x) - b(y), x - y> <= -θ1 |x - y|^2 + K
//! |∇_v b(x)| <= θ2 |v|,   |∇_{v1} ∇_{v2} b(x)| <= θ3 |v1| |v2|
//! ```
//!
//! The bounds are global, so [`check_assumption_a`] can only falsify them on
//! sampled points; passing the check is evidence, not a proof.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::unit_direction;
use crate::rng::RngStream;

type DriftFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Declared constants of the dissipativity / smoothness assumption.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftConstants {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub k: f64,
}

#[derive(Clone)]
pub struct DriftModel {
    name: String,
    dim: usize,
    constants: DriftConstants,
    f: Arc<DriftFn>,
}

impl fmt::Debug for DriftModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("constants", &self.constants)
            .finish()
    }
}

impl DriftModel {
    /// Wraps an arbitrary drift. `f(x, out)` must write `b(x)` into `out`.
    pub fn custom<F>(name: impl Into<String>, dim: usize, constants: DriftConstants, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::domain("drift dimension must be at least 1"));
        }
        let c = constants;
        if !(c.theta1 > 0.0 && c.theta2 > 0.0 && c.theta3 >= 0.0 && c.k >= 0.0) {
            return Err(Error::domain(format!(
                "drift constants need theta1, theta2 > 0 and theta3, K >= 0, got {c:?}"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            constants,
            f: Arc::new(f),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constants(&self) -> DriftConstants {
        self.constants
    }

    pub fn theta1(&self) -> f64 {
        self.constants.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.constants.theta2
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// `min{1, θ1/(8θ2²), 1/θ1}`, the step-size bound under which the
    /// finite-horizon error estimates hold.
    pub fn step_size_bound(&self) -> f64 {
        let c = self.constants;
        1f64.min(c.theta1 / (8.0 * c.theta2 * c.theta2)).min(1.0 / c.theta1)
    }
}

/// Builds one of the named drifts.
///
/// * `"ou"`: `b(x) = -x`, constants `(1, 1, 0, 0)`.
/// * `"linear"`: `b(x) = -Ax`, `params` the row-major `d × d` matrix `A`;
///   `θ1` is the smallest eigenvalue of `(A + Aᵀ)/2` (must be positive) and
///   `θ2` the operator norm of `A`.
/// * `"ou-sine"`: `b(x) = -x + c sin(x)` componentwise, `params = [c]` with
///   `0 < c < 1`, constants `(1-c, 1+c, c, 0)`.
pub fn builtin_drift(name: &str, dim: usize, params: &[f64]) -> Result<DriftModel> {
    if dim == 0 {
        return Err(Error::domain("drift dimension must be at least 1"));
    }
    match name {
        "ou" => {
            if !params.is_empty() {
                return Err(Error::domain("drift 'ou' takes no parameters"));
            }
            DriftModel::custom(
                "ou",
                dim,
                DriftConstants { theta1: 1.0, theta2: 1.0, theta3: 0.0, k: 0.0 },
                |x, out| {
                    for (o, v) in out.iter_mut().zip(x) {
                        *o = -v;
                    }
                },
            )
        }
        "linear" => {
            if params.len() != dim * dim {
                return Err(Error::domain(format!(
                    "drift 'linear' in dimension {dim} needs {} matrix entries, got {}",
                    dim * dim,
                    params.len()
                )));
            }
            if params.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("matrix entries must be finite"));
            }
            let a = DMatrix::from_row_slice(dim, dim, params);
            let sym = (&a + a.transpose()) * 0.5;
            let lambda_min = sym.symmetric_eigenvalues().min();
            if lambda_min <= 0.0 {
                return Err(Error::domain(format!(
                    "drift 'linear' is not dissipative: smallest eigenvalue of the symmetric part is {lambda_min}"
                )));
            }
            let op_norm = a.clone().svd(false, false).singular_values.max();
            let rows = params.to_vec();
            DriftModel::custom(
                "linear",
                dim,
                DriftConstants { theta1: lambda_min, theta2: op_norm, theta3: 0.0, k: 0.0 },
                move |x, out| {
                    let d = x.len();
                    for (i, o) in out.iter_mut().enumerate() {
                        let row = &rows[i * d..(i + 1) * d];
                        *o = -row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
                    }
                },
            )
        }
        "ou-sine" => {
            let c = match params {
                [c] => *c,
                _ => return Err(Error::domain("drift 'ou-sine' takes exactly one parameter c")),
            };
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::domain(format!("drift 'ou-sine' needs 0 < c < 1, got {c}")));
            }
            DriftModel::custom(
                "ou-sine",
                dim,
                DriftConstants { theta1: 1.0 - c, theta2: 1.0 + c, theta3: c, k: 0.0 },
                move |x, out| {
                    for (o, v) in out.iter_mut().zip(x) {
                        *o = -v + c * v.sin();
                    }
                },
            )
        }
        other => Err(Error::domain(format!(
            "unknown drift '{other}' (expected ou, linear or ou-sine)"
        ))),
    }
}

/// Parses `"name"` or `"name:p1,p2,..."` and builds the drift.
pub fn parse_drift(spec: &str, dim: usize) -> Result<DriftModel> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p),
        None => (spec.trim(), ""),
    };
    let params = params
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad drift parameter '{s}' in '{spec}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    builtin_drift(name, dim, &params)
}

/// Dimension implied by a drift string when it is not otherwise fixed:
/// the square root of the parameter count for `linear`, else `None`.
pub fn implied_dim(spec: &str) -> Option<usize> {
    let (name, params) = spec.split_once(':')?;
    if name.trim() != "linear" {
        return None;
    }
    let n = params.split(',').filter(|s| !s.trim().is_empty()).count();
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n && d > 0).then_some(d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionReport {
    pub dissipativity_ok: bool,
    pub gradient_ok: bool,
    pub second_deriv_ok: bool,
    /// Largest observed `lhs - rhs` for the dissipativity, gradient and
    /// second-derivative bounds; non-positive means the bound held everywhere.
    pub worst_margins: [f64; 3],
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.dissipativity_ok && self.gradient_ok && self.second_deriv_ok
    }
}

const DISS_SLACK: f64 = 1e-8;
const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-4;
const REL_SLACK: f64 = 1e-4;

fn point_in_ball(rng: &mut RngStream, dim: usize, radius: f64, out: &mut [f64]) {
    unit_direction(rng, out);
    let u: f64 = rng.sample(Open01);
    let r = radius * u.powf(1.0 / dim as f64);
    out.iter_mut().for_each(|x| *x *= r);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Probes the declared constants of `model` on `n_pairs` random points of
/// the ball of the given radius.
///
/// Dissipativity is checked on pairs `(x, y)` with slack `1e-8`; the
/// gradient bound (and the linear growth bound it implies) by central
/// differences with step `1e-5` along random unit directions; the second
/// derivative bound by a mixed central difference. Finite-difference bounds
/// get a relative slack of `1e-4` plus an estimate of the rounding noise.
pub fn check_assumption_a(
    model: &DriftModel,
    n_pairs: usize,
    radius: f64,
    rng: &mut RngStream,
) -> Result<AssumptionReport> {
    if n_pairs == 0 {
        return Err(Error::domain("n_pairs must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let d = model.dim();
    let c = model.constants();
    let eps = f64::EPSILON;

    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut v1 = vec![0.0; d];
    let mut v2 = vec![0.0; d];
    let mut bx = vec![0.0; d];
    let mut by = vec![0.0; d];
    let mut b0 = vec![0.0; d];
    let mut p = vec![0.0; d];
    let mut bp = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];

    let zero = vec![0.0; d];
    model.eval_into(&zero, &mut b0);

    let finite = |v: &[f64]| -> Result<()> {
        if v.iter().all(|z| z.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numerical(format!("drift '{}' returned a non-finite value", model.name())))
        }
    };

    let mut margins = [f64::NEG_INFINITY; 3];
    let (mut diss_ok, mut grad_ok, mut hess_ok) = (true, true, true);

    for _ in 0..n_pairs {
        point_in_ball(rng, d, radius, &mut x);
        point_in_ball(rng, d, radius, &mut y);
        model.eval_into(&x, &mut bx);
        model.eval_into(&y, &mut by);
        finite(&bx)?;
        finite(&by)?;

        // <b(x) - b(y), x - y> + θ1 |x - y|^2 - K
        let mut inner = 0.0;
        let mut dist2 = 0.0;
        for i in 0..d {
            let dx = x[i] - y[i];
            inner += (bx[i] - by[i]) * dx;
            dist2 += dx * dx;
        }
        let m = inner + c.theta1 * dist2 - c.k;
        margins[0] = margins[0].max(m);
        diss_ok &= m <= DISS_SLACK;

        // Linear growth |b(x) - b(0)| <= θ2 |x|.
        let growth: Vec<f64> = bx.iter().zip(&b0).map(|(a, b)| a - b).collect();
        let scale = 1.0 + max_abs(&bx).max(max_abs(&b0));
        let m = norm(&growth) - c.theta2 * norm(&x);
        margins[1] = margins[1].max(m);
        grad_ok &= m <= REL_SLACK * c.theta2 * norm(&x) + 8.0 * eps * scale;

        // Directional derivative by central differences.
        unit_direction(rng, &mut v1);
        for i in 0..d {
            p[i] = x[i] + GRAD_STEP * v1[i];
        }
        model.eval_into(&p, &mut bp[0]);
        for i in 0..d {
            p[i] = x[i] - GRAD_STEP * v1[i];
        }
        model.eval_into(&p, &mut bp[1]);
        finite(&bp[0])?;
        finite(&bp[1])?;
        let dir: Vec<f64> = (0..d).map(|i| (bp[0][i] - bp[1][i]) / (2.0 * GRAD_STEP)).collect();
        let scale = 1.0 + max_abs(&bp[0]).max(max_abs(&bp[1]));
        let m = norm(&dir) - c.theta2;
        margins[1] = margins[1].max(m);
        grad_ok &= m <= REL_SLACK * c.theta2 + 4.0 * eps * scale / GRAD_STEP;

        // Mixed second derivative along (v1, v2).
        unit_direction(rng, &mut v2);
        let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
        for (k, (s1, s2)) in signs.iter().enumerate() {
            for i in 0..d {
                p[i] = x[i] + HESS_STEP * (s1 * v1[i] + s2 * v2[i]);
            }
            model.eval_into(&p, &mut bp[k]);
            finite(&bp[k])?;
        }
        let h2 = 4.0 * HESS_STEP * HESS_STEP;
        let mixed: Vec<f64> = (0..d)
            .map(|i| (bp[0][i] - bp[1][i] - bp[2][i] + bp[3][i]) / h2)
            .collect();
        let scale = 1.0 + bp.iter().map(|b| max_abs(b)).fold(0.0, f64::max);
        let m = norm(&mixed) - c.theta3;
        margins[2] = margins[2].max(m);
        hess_ok &= m <= REL_SLACK * c.theta3 + 16.0 * eps * scale / h2;
    }

    Ok(AssumptionReport {
        dissipativity_ok: diss_ok,
        gradient_ok: grad_ok,
        second_deriv_ok: hess_ok,
        worst_margins: margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_values() {
        let ou = builtin_drift("ou", 1, &[]).unwrap();
        assert_eq!(ou.eval(&[2.0]), vec![-2.0]);
        let s = builtin_drift("ou-sine", 1, &[0.5]).unwrap();
        assert_eq!(s.eval(&[0.0]), vec![0.0]);
        let c = s.constants();
        assert_eq!((c.theta1, c.theta2, c.theta3, c.k), (0.5, 1.5, 0.5, 0.0));
        let lin = builtin_drift("linear", 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(lin.theta1(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(lin.theta2(), 1.0, epsilon = 1e-12);
        assert_eq!(lin.eval(&[3.0, -1.0]), vec![-3.0, 1.0]);
    }

    #[test]
    fn linear_constants_for_nonsymmetric_matrix() {
        // A = [[2, 1], [-1, 2]]: sym part 2I, singular values sqrt(5).
        let lin = builtin_drift("linear", 2, &[2.0, 1.0, -1.0, 2.0]).unwrap();
        assert_relative_eq!(lin.theta1(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(lin.theta2(), 5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn builtin_errors() {
        assert!(builtin_drift("cubic", 1, &[]).is_err());
        assert!(builtin_drift("linear", 2, &[1.0, 0.0, 0.0, -1.0]).is_err());
        assert!(builtin_drift("linear", 2, &[1.0, 0.0, 0.0]).is_err());
        assert!(builtin_drift("ou-sine", 1, &[1.0]).is_err());
        assert!(builtin_drift("ou-sine", 1, &[0.0]).is_err());
        assert!(builtin_drift("ou-sine", 1, &[]).is_err());
        assert!(builtin_drift("ou", 0, &[]).is_err());
    }

    #[test]
    fn parse_drift_strings() {
        assert_eq!(parse_drift("ou", 2).unwrap().name(), "ou");
        let s = parse_drift("ou-sine:0.5", 1).unwrap();
        assert_eq!(s.constants().theta3, 0.5);
        assert_eq!(parse_drift("linear:1,0,0,2", 2).unwrap().theta1(), 1.0);
        assert!(matches!(parse_drift("ou-sine:x", 1), Err(Error::Parse(_))));
        assert_eq!(implied_dim("linear:1,0,0,2"), Some(2));
        assert_eq!(implied_dim("linear:1,2,3"), None);
        assert_eq!(implied_dim("ou"), None);
    }

    #[test]
    fn step_size_bound() {
        let ou = builtin_drift("ou", 1, &[]).unwrap();
        assert_eq!(ou.step_size_bound(), 1.0 / 8.0);
    }

    #[test]
    fn ou_is_exactly_dissipative() {
        let ou = builtin_drift("ou", 1, &[]).unwrap();
        let r = check_assumption_a(&ou, 1000, 10.0, &mut RngStream::new(0, 0)).unwrap();
        assert!(r.all_ok(), "{r:?}");
        assert!(r.worst_margins[0].abs() < 1e-12);
    }

    #[test]
    fn anti_dissipative_is_rejected() {
        let bad = DriftModel::custom(
            "expanding",
            1,
            DriftConstants { theta1: 1.0, theta2: 1.0, theta3: 0.0, k: 0.0 },
            |x, out| out[0] = x[0],
        )
        .unwrap();
        let r = check_assumption_a(&bad, 100, 10.0, &mut RngStream::new(0, 0)).unwrap();
        assert!(!r.dissipativity_ok);
        assert!(r.gradient_ok);
    }

    #[test]
    fn understated_gradient_bound_is_caught() {
        let lie = DriftModel::custom(
            "ou-2x",
            1,
            DriftConstants { theta1: 1.0, theta2: 1.0, theta3: 0.0, k: 0.0 },
            |x, out| out[0] = -2.0 * x[0],
        )
        .unwrap();
        let r = check_assumption_a(&lie, 100, 5.0, &mut RngStream::new(1, 0)).unwrap();
        assert!(r.dissipativity_ok);
        assert!(!r.gradient_ok);
    }

    #[test]
    fn understated_curvature_is_caught() {
        let lie = DriftModel::custom(
            "ou-sine-no-curv",
            1,
            DriftConstants { theta1: 0.5, theta2: 1.5, theta3: 0.0, k: 0.0 },
            |x, out| out[0] = -x[0] + 0.5 * x[0].sin(),
        )
        .unwrap();
        let r = check_assumption_a(&lie, 1000, 10.0, &mut RngStream::new(2, 0)).unwrap();
        assert!(!r.second_deriv_ok);
    }

    #[test]
    fn ou_sine_passes_all_checks() {
        let s = builtin_drift("ou-sine", 1, &[0.5]).unwrap();
        let r = check_assumption_a(&s, 10_000, 10.0, &mut RngStream::new(3, 0)).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn ou_sine_dissipativity_dense_grid_oracle() {
        // Independent check of the declared θ1 = 1 - c on a dense grid.
        let c = 0.5;
        let b = |x: f64| -x + c * x.sin();
        let n = 400;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let x = -10.0 + 20.0 * i as f64 / n as f64;
                let y = -10.0 + 20.0 * j as f64 / n as f64;
                worst = worst.max((b(x) - b(y)) * (x - y) + (1.0 - c) * (x - y) * (x - y));
            }
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn linear_drifts_pass_with_zero_k() {
        for (d, a) in [
            (2, vec![2.0, 1.0, -1.0, 2.0]),
            (3, vec![1.0, 0.2, 0.0, 0.0, 1.5, -0.3, 0.1, 0.0, 0.8]),
        ] {
            let m = builtin_drift("linear", d, &a).unwrap();
            assert_eq!(m.constants().k, 0.0);
            let r = check_assumption_a(&m, 2000, 10.0, &mut RngStream::new(4, d as u64)).unwrap();
            assert!(r.all_ok(), "{r:?}");
        }
    }

    #[test]
    fn non_finite_drift_is_numerical_failure() {
        let nan = DriftModel::custom(
            "nan",
            1,
            DriftConstants { theta1: 1.0, theta2: 1.0, theta3: 0.0, k: 0.0 },
            |_, out| out[0] = f64::NAN,
        )
        .unwrap();
        let e = check_assumption_a(&nan, 10, 1.0, &mut RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(e, Error::Numerical(_)));
    }

    #[test]
    fn directional_derivatives_within_theta2() {
        let mut rng = RngStream::new(9, 0);
        for model in [
            builtin_drift("ou", 2, &[]).unwrap(),
            builtin_drift("ou-sine", 2, &[0.7]).unwrap(),
            builtin_drift("linear", 2, &[3.0, 1.0, 0.0, 1.0]).unwrap(),
        ] {
            let mut x = vec![0.0; 2];
            let mut v = vec![0.0; 2];
            for _ in 0..500 {
                point_in_ball(&mut rng, 2, 20.0, &mut x);
                unit_direction(&mut rng, &mut v);
                let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + GRAD_STEP * b).collect();
                let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - GRAD_STEP * b).collect();
                let (bp, bm) = (model.eval(&xp), model.eval(&xm));
                let fd: Vec<f64> = bp.iter().zip(&bm).map(|(p, m)| (p - m) / (2.0 * GRAD_STEP)).collect();
                assert!(norm(&fd) <= model.theta2() * (1.0 + 1e-4), "{}", model.name());
            }
        }
    }
}
