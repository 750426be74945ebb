//! Draws from the three noise samplers and compares them with their laws.
//!
//! The 1-d stable sample is tested against the characteristic function
//! `exp(-|ξ|^α)`; the Pareto radius against `P(|Z̃| > r) = r^{-α}`.

use stable_em::metrics::{empirical_cf, EmpiricalMeasure};
use stable_em::noise::{sample_isotropic_stable, sample_pareto_vec, sample_sym_stable_1d, NoiseSpec};
use stable_em::stats::{ks_critical_one, ks_one_sample};
use stable_em::RngStream;

fn main() -> stable_em::Result<()> {
    let alpha = 1.5;
    let n = 100_000;
    let spec1 = NoiseSpec::new(alpha, 1)?;
    let mut rng = RngStream::new(7, 0);

    let xs = (0..n).map(|_| sample_sym_stable_1d(&spec1, 1.0, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let m = EmpiricalMeasure::from_scalars(xs)?;
    println!("symmetric stable, alpha = {alpha}, n = {n}");
    for xi in [0.25, 0.5, 1.0, 2.0] {
        let cf = empirical_cf(&m, xi)?;
        let exact = (-f64::powf(xi, alpha)).exp();
        println!("  xi = {xi:<4}  empirical {:.4}  exact {exact:.4}", cf.re);
    }

    // isotropic increments over one unit of time in d = 3
    let spec3 = NoiseSpec::new(alpha, 3)?;
    let z = sample_isotropic_stable(&spec3, 1.0, &mut rng)?;
    println!("\none isotropic draw in d = 3: {z:.4?}");

    let radii: Vec<f64> = (0..n)
        .map(|_| sample_pareto_vec(&spec3, &mut rng).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let ks = ks_one_sample(&radii, |r| if r < 1.0 { 0.0 } else { 1.0 - r.powf(-alpha) });
    println!("pareto radius in d = 3: KS = {ks:.4} (1% critical {:.4})", ks_critical_one(n));
    let mean = radii.iter().sum::<f64>() / n as f64;
    println!("  sample mean |Z~| = {mean:.4} (law: alpha/(alpha-1) = {:.4})", alpha / (alpha - 1.0));
    Ok(())
}
