//! Probability that n Brownian paths are hidden by m others out to radius R,
//! fitted to a power of R.
//!
//!     cargo run --release --example brownian_hiding -- 5000

use sle_rho::estimators::{brownian_hiding_experiment, MCConfig};

fn main() -> sle_rho::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2_000);
    let cfg = MCConfig::new(n, 1e-3, 1.0, 6);
    let radii = [2.0, 3.0, 4.0, 6.0];
    let r = brownian_hiding_experiment(1, 1, &radii, &cfg)?;
    for (radius, s) in radii.iter().zip(&r.survival) {
        println!("R = {radius}: {:.4} ± {:.4}", s.mean, s.stderr);
    }
    println!(
        "fitted exponent {:.3} ± {:.3}, closed form {:.4}",
        r.exponent, r.fit.slope_stderr, r.target
    );
    Ok(())
}
