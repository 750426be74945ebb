//! Tracks the fractional moment `E|Y_k|^β` of the chain started far from
//! the origin and its Lyapunov weight `V_β(x) = (1 + |x|²)^{β/2}`.

use stable_em::drift::builtin_drift;
use stable_em::scheme::{moment_track, ChainConfig, Scheme};
use stable_em::NoiseSpec;

fn main() -> stable_em::Result<()> {
    let beta = 1.2;
    let noise = NoiseSpec::new(1.5, 2)?;
    let drift = builtin_drift("ou", 2, &[])?;
    let cfg = ChainConfig::new(Scheme::StableNoise, noise, 0.05, 200, vec![3.0, -4.0], 5_000, 0);
    let rep = moment_track(&cfg, &drift, beta)?;

    println!("V_beta(x0) = {:.4}", rep.weight_at_start);
    for (k, v) in rep.per_step_moment.iter().enumerate().step_by(25) {
        println!("k = {k:>3}  E|Y|^{beta} = {v:.4}");
    }
    println!("sup over steps = {:.4}", rep.sup_moment);
    Ok(())
}
