//! Probability that SLE(8/3, ρ) from (0, a) avoids the slit [1, 1+i],
//! against the restriction formula.
//!
//!     cargo run --release --example restriction -- 2000

use sle_rho::conformal::SlitHull;
use sle_rho::estimators::{verify_restriction, MCConfig};

fn main() -> sle_rho::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000);
    let mut cfg = MCConfig::new(n, 5e-3, 50.0, 2);
    cfg.grid_power = 2.0;
    let hull = SlitHull::new(1.0, 1.0)?;
    for rho in [0.0, 2.0] {
        let r = verify_restriction(rho, &hull, 0.01, &cfg)?;
        println!(
            "ρ = {rho}: P̂ = {:.4} ± {:.4}, formula {:.4}, {} geometry failures",
            r.p_hat.mean, r.p_hat.stderr, r.target, r.geometry_failures
        );
        for (t, e) in &r.trend {
            println!("    t = {t:>5.1}: {:.4} ± {:.4}", e.mean, e.stderr);
        }
        for w in &r.warnings {
            println!("    warning: {w}");
        }
    }
    Ok(())
}
