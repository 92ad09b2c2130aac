//! Mean of the restriction martingale at a few times; it should stay at M_0.
//!
//!     cargo run --release --example martingale -- 1000

use sle_rho::conformal::SlitHull;
use sle_rho::estimators::{initial_martingale, martingale_check, MCConfig};

fn main() -> sle_rho::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let (rho, a) = (2.0, 0.1);
    let times = [0.05, 0.1, 0.2];
    let cfg = MCConfig::new(n, 1e-4, 0.2, 3);
    let hull = SlitHull::new(1.0, 1.0)?;

    println!("M_0 = {:.5}", initial_martingale(rho, &hull, a)?);
    let r = martingale_check(rho, &hull, a, &times, &cfg)?;
    for p in &r.points {
        println!(
            "t = {:.2}: E[M_t] = {:.5} ± {:.5}, |z| = {:.2}, hit fraction {:.3}",
            p.t, p.mean_m.mean, p.mean_m.stderr, p.z, p.hit_fraction
        );
    }
    println!("max M seen = {:.4}, geometry failures = {}", r.max_m, r.geometry_failures);
    Ok(())
}
