#![allow(dead_code)]

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

/// W1 between two point clouds on the line by solving the transport LP.
///
/// Supplies are scaled to integers (`|b|` per point of `a`, `|a|` per point
/// of `b`) so the optimum sits on an integral vertex; the objective is
/// scaled back at the end.
pub fn w1_by_lp(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(n * m);
    for x in a {
        for y in b {
            vars.push(lp.add_var((x - y).abs(), (0.0, f64::INFINITY)));
        }
    }
    for i in 0..n {
        let mut row = LinearExpr::empty();
        for j in 0..m {
            row.add(vars[i * m + j], 1.0);
        }
        lp.add_constraint(row, ComparisonOp::Eq, m as f64);
    }
    for j in 0..m {
        let mut col = LinearExpr::empty();
        for i in 0..n {
            col.add(vars[i * m + j], 1.0);
        }
        lp.add_constraint(col, ComparisonOp::Eq, n as f64);
    }
    let sol = lp.solve().expect("transport LP is feasible and bounded");
    sol.objective() / (n * m) as f64
}

/// Invariant CF of the Pareto chain for OU without truncating the product.
///
/// `ln φ(u) = ln(1 + w)` with `w = -σ^α x + α Σ_k (-1)^{k+1} y^k / ((2k)!(2k-α))`,
/// `x = |u|^α`, `y = u²`, is expanded into monomials `x^a y^b`. Along
/// `u_i = u_0 r^i` each monomial sums geometrically:
/// `Σ_i u_i^{αa+2b} = u_0^{αa+2b} / (1 - r^{αa+2b})`.
pub fn pareto_product_by_series(alpha: f64, sigma_pow_alpha: f64, eta: f64, xi: f64) -> f64 {
    const A: usize = 24;
    const B: usize = 12;
    type Poly = Vec<Vec<f64>>; // p[a][b] is the coefficient of x^a y^b
    let mul = |p: &Poly, q: &Poly| -> Poly {
        let mut out = vec![vec![0.0; B + 1]; A + 1];
        for a1 in 0..=A {
            for b1 in 0..=B {
                if p[a1][b1] == 0.0 {
                    continue;
                }
                for a2 in 0..=A - a1 {
                    for b2 in 0..=B - b1 {
                        out[a1 + a2][b1 + b2] += p[a1][b1] * q[a2][b2];
                    }
                }
            }
        }
        out
    };
    let mut w = vec![vec![0.0; B + 1]; A + 1];
    w[1][0] = -sigma_pow_alpha;
    let mut fact = 1.0;
    for k in 1..=B {
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        w[0][k] = sign * alpha / (fact * (2 * k) as f64 - fact * alpha);
    }
    let mut log_phi = vec![vec![0.0; B + 1]; A + 1];
    let mut power = w.clone();
    for n in 1..=A + B {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        for a in 0..=A {
            for b in 0..=B {
                log_phi[a][b] += sign * power[a][b] / n as f64;
            }
        }
        power = mul(&power, &w);
    }
    let u0 = eta.powf(1.0 / alpha) / sigma_pow_alpha.powf(1.0 / alpha) * xi.abs();
    let ln_r = (-eta).ln_1p();
    let mut total = 0.0;
    for a in 0..=A {
        for b in 0..=B {
            if log_phi[a][b] == 0.0 {
                continue;
            }
            let p = alpha * a as f64 + 2.0 * b as f64;
            total += log_phi[a][b] * u0.powf(p) / -(p * ln_r).exp_m1();
        }
    }
    total.exp()
}
