//! Expectations under SLE(κ, ρ̄) computed directly and by reweighting
//! SLE(κ, ρ) paths with g_T'(0)^α.
//!
//!     cargo run --release --example reweighting -- 20000

use sle_rho::estimators::{importance_sampling_check, Functional, MCConfig};

fn main() -> sle_rho::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let cfg = MCConfig::new(n, 1e-3, 1.0, 4);
    for (kappa, rho, alpha) in [(8.0 / 3.0, 0.0, 5.0 / 8.0), (2.0, 0.0, 1.0)] {
        for f in [Functional::IndicatorY(1.0), Functional::MinY(2.0)] {
            let r = importance_sampling_check(kappa, rho, alpha, f, &cfg)?;
            println!(
                "κ = {kappa:.3}, ρ = {rho} → ρ̄ = {:.3}, {}: direct {:.4} ± {:.4}, reweighted {:.4} ± {:.4}, |z| = {:.2}",
                r.rho_bar, r.functional, r.direct.mean, r.direct.stderr, r.reweighted.mean, r.reweighted.stderr, r.z
            );
        }
    }
    Ok(())
}
