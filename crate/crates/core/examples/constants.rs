//! Normalisation constants of the rotationally invariant α-stable noise.
//!
//! `cargo run --example constants -- 1.5`

use stable_em::noise::{c_d_alpha_quadrature, NoiseSpec};

fn main() -> stable_em::Result<()> {
    let alpha: f64 = std::env::args().nth(1).map_or(Ok(1.5), |s| s.parse()).expect("alpha must be a number");

    println!("{:>2} {:>12} {:>14} {:>12} {:>12} {:>10}", "d", "|S^{d-1}|", "C_{d,alpha}", "sigma", "sigma^alpha", "quad.rel");
    for d in 1..=4 {
        let spec = NoiseSpec::new(alpha, d)?;
        let quad = c_d_alpha_quadrature(d, alpha, 1e-12)?;
        let rel = (quad - spec.c_d_alpha()).abs() / spec.c_d_alpha();
        println!(
            "{d:>2} {:>12.8} {:>14.10} {:>12.9} {:>12.9} {rel:>10.2e}",
            spec.surface_area(),
            spec.c_d_alpha(),
            spec.sigma(),
            spec.sigma_pow_alpha()
        );
    }
    Ok(())
}
