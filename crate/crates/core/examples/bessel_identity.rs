//! Two sides of the Bessel identity for g_T'(0), against the closed form.
//!
//!     cargo run --release --example bessel_identity -- 20000

use sle_rho::estimators::{verify_bessel_identity, MCConfig};

fn main() -> sle_rho::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let cfg = MCConfig::new(n, 1e-3, 1.0, 1);
    println!("{:>6} {:>5} {:>7} {:>10} {:>10} {:>10} {:>6}", "κ", "ρ", "α", "lhs", "rhs", "exact", "|z|");
    for (kappa, rho, alpha) in [(8.0 / 3.0, 0.0, 5.0 / 8.0), (6.0, 2.0, 1.0 / 3.0), (2.0, 0.0, 1.0)] {
        let r = verify_bessel_identity(kappa, rho, alpha, 1.0, &cfg)?;
        println!(
            "{kappa:>6.3} {rho:>5} {alpha:>7.4} {:>10.5} {:>10.5} {:>10.5} {:>6.2}",
            r.lhs.mean, r.rhs.mean, r.exact, r.z
        );
    }
    Ok(())
}
