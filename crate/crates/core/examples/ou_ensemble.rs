//! Runs both Euler-Maruyama chains on the Ornstein-Uhlenbeck drift and
//! compares their end-of-run ensembles with exact invariant draws.

use stable_em::drift::builtin_drift;
use stable_em::metrics::w1_1d;
use stable_em::ratestudy::exact_ou_invariant;
use stable_em::scheme::{run_ensemble, ChainConfig, Scheme};
use stable_em::NoiseSpec;

fn main() -> stable_em::Result<()> {
    let alpha = 1.5;
    let noise = NoiseSpec::new(alpha, 1)?;
    let drift = builtin_drift("ou", 1, &[])?;
    let m = 20_000;
    let exact = exact_ou_invariant(&noise, m, 99)?;

    for scheme in [Scheme::StableNoise, Scheme::ParetoNoise] {
        for eta in [0.25, 0.0625] {
            let steps = (20.0 / eta) as usize;
            let cfg = ChainConfig::new(scheme, noise.clone(), eta, steps, vec![0.0], m, 1);
            if let Some(w) = cfg.step_size_warning(&drift) {
                eprintln!("warning: {w}");
            }
            let ens = run_ensemble(&cfg, &drift)?;
            println!(
                "{scheme:>6}  eta = {eta:<6}  E|Y|^1.2 = {:.3}  W1 to exact = {:.4}",
                ens.abs_moment(1.2),
                w1_1d(&ens, &exact)?
            );
        }
    }
    println!("exact   E|X|^1.2 = {:.3}", exact.abs_moment(1.2));
    Ok(())
}
