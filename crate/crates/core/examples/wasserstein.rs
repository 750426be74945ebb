//! Wasserstein-1 between empirical measures: the exact 1-d formula and the
//! sliced estimator used in higher dimensions.

use stable_em::metrics::{sliced_w1, w1_1d, EmpiricalMeasure};
use stable_em::RngStream;

fn main() -> stable_em::Result<()> {
    let a = EmpiricalMeasure::from_scalars(vec![0.0, 1.0, 3.0])?;
    let b = EmpiricalMeasure::from_scalars(vec![5.0, 6.0, 8.0])?;
    println!("shift by 5:            W1 = {}", w1_1d(&a, &b)?);

    let c = EmpiricalMeasure::from_scalars(vec![0.0, 2.0])?;
    let e = EmpiricalMeasure::from_scalars(vec![1.0, 1.0, 1.0])?;
    println!("unequal sample sizes:  W1 = {}", w1_1d(&c, &e)?);

    // a unit translation in the plane; each slice sees |<u, shift>|
    let p: Vec<f64> = (0..200).flat_map(|i| [(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
    let q: Vec<f64> = p.chunks(2).flat_map(|r| [r[0] + 1.0, r[1]]).collect();
    let (p, q) = (EmpiricalMeasure::new(2, p)?, EmpiricalMeasure::new(2, q)?);
    let sw = sliced_w1(&p, &q, 256, &mut RngStream::new(1, 0))?;
    println!("sliced W1, unit shift: {sw:.4} (mean |cos| = 2/pi = {:.4})", 2.0 / std::f64::consts::PI);
    Ok(())
}
