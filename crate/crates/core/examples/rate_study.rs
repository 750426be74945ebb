//! Step-size sweeps two ways: the deterministic characteristic-function gap
//! on the 1-d Ornstein-Uhlenbeck drift, and a Monte Carlo sweep on a 2-d
//! linear drift measured against a fine-step reference chain.
//!
//! Heavy tails make empirical Wasserstein distances noisy at moderate
//! ensemble sizes; compare the batch standard errors with the distances
//! before reading anything into the Monte Carlo slope.

use stable_em::drift::builtin_drift;
use stable_em::ratestudy::{run_rate_study, RateMethod, RateStudy};
use stable_em::scheme::Scheme;

fn main() -> stable_em::Result<()> {
    let ou = builtin_drift("ou", 1, &[])?;
    let grid: Vec<f64> = (6..=12).map(|k| 2f64.powi(-k)).collect();
    let cf = run_rate_study(&RateStudy::new(1.5, Scheme::ParetoNoise, RateMethod::CfGap, ou, grid))?;
    print!("{}", cf.to_csv());

    let drift = builtin_drift("linear", 2, &[1.0, 0.3, -0.3, 1.5])?;
    let mut mc = RateStudy::new(1.5, Scheme::ParetoNoise, RateMethod::McW1, drift, vec![0.25, 0.125, 0.0625]);
    mc.ensemble = 4_000;
    mc.horizon = Some(8.0);
    mc.refinement = 16;
    println!();
    print!("{}", run_rate_study(&mc)?.to_csv());
    Ok(())
}
