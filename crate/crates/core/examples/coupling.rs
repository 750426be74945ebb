//! Synchronous coupling: two chains fed identical noise contract at the
//! rate of the drift, independently of the noise.

use stable_em::drift::builtin_drift;
use stable_em::scheme::{coupled_pair_decay, ChainConfig, Scheme};
use stable_em::NoiseSpec;

fn main() -> stable_em::Result<()> {
    let noise = NoiseSpec::new(1.5, 1)?;
    let eta = 0.1;

    for (name, params) in [("ou", vec![]), ("ou-sine", vec![0.5])] {
        let drift = builtin_drift(name, 1, &params)?;
        let cfg = ChainConfig::new(Scheme::ParetoNoise, noise.clone(), eta, 40, vec![0.0], 64, 3);
        let decay = coupled_pair_decay(&drift, &[5.0], &[1.0], &cfg)?;
        println!("{name}:");
        for (k, d) in decay.iter().enumerate().step_by(8) {
            let ou = 4.0 * (1.0 - eta).powi(k as i32);
            println!("  k = {k:>2}  E|X-Y| = {d:.6}   4(1-eta)^k = {ou:.6}");
        }
    }
    Ok(())
}
