//! Deterministic Ornstein-Uhlenbeck benchmark: the characteristic-function
//! gap between each scheme's invariant law and the exact one, with the
//! Wasserstein-1 lower bound it implies.

use stable_em::oubench::{lipschitz_constant_m, run_benchmark, OUBenchConfig};
use stable_em::ratestudy::{fit_loglog, theoretical_rate};
use stable_em::scheme::Scheme;

fn main() -> stable_em::Result<()> {
    let alpha = 1.5;
    let grid: Vec<f64> = (8..=14).map(|k| 2f64.powi(-k)).collect();
    let rows = run_benchmark(&OUBenchConfig::new(alpha, grid)?)?;

    println!("M = {:.12}", lipschitz_constant_m());
    println!("{:>12} {:>14} {:>14} {:>12}", "eta", "gap pareto", "gap stable", "W1 >=");
    for r in &rows {
        println!("{:>12.3e} {:>14.6e} {:>14.6e} {:>12.3e}", r.eta, r.gap_pareto, r.gap_stable, r.w1_lower_pareto);
    }

    for (scheme, pick) in [(Scheme::ParetoNoise, 0), (Scheme::StableNoise, 1)] {
        let pts: Vec<_> = rows.iter().map(|r| (r.eta, [r.gap_pareto, r.gap_stable][pick].abs())).collect();
        let fit = fit_loglog(&pts)?;
        let theory = match scheme {
            Scheme::ParetoNoise => theoretical_rate(alpha, scheme, None)?,
            Scheme::StableNoise => 1.0,
        };
        println!("{scheme}: slope {:.4} (expected {theory:.4}), r^2 {:.6}", fit.slope, fit.r_squared);
    }
    Ok(())
}
