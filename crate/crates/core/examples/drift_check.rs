//! Falsification check of the declared drift constants: a correct model
//! passes, one with an overstated dissipativity constant is caught.

use stable_em::drift::{builtin_drift, check_assumption_a, DriftConstants, DriftModel};
use stable_em::RngStream;

fn main() -> stable_em::Result<()> {
    let good = builtin_drift("ou-sine", 3, &[0.4])?;
    // claims θ1 = 1, but the sine term can reduce it to 0.6
    let bad = DriftModel::custom(
        "ou-sine-overclaimed",
        3,
        DriftConstants { theta1: 1.0, theta2: 1.4, theta3: 0.4, k: 0.0 },
        |x, out| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v + 0.4 * v.sin();
            }
        },
    )?;

    for model in [&good, &bad] {
        let rep = check_assumption_a(model, 10_000, 10.0, &mut RngStream::new(0, 0))?;
        println!(
            "{:<22} dissipativity {:<5} gradient {:<5} second-derivative {:<5} margins {:.3e} {:.3e} {:.3e}",
            model.name(),
            rep.dissipativity_ok,
            rep.gradient_ok,
            rep.second_deriv_ok,
            rep.worst_margins[0],
            rep.worst_margins[1],
            rep.worst_margins[2]
        );
    }
    Ok(())
}
