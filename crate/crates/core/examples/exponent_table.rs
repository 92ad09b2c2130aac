//! Closed-form exponents at the special parameter values.
//!
//!     cargo run --example exponent_table

use sle_rho::exponents::*;

fn main() -> sle_rho::Result<()> {
    let k = KAPPA_RESTRICTION;

    println!("SLE(8/3, ρ) as the boundary of a restriction sample");
    println!("{:>6} {:>10} {:>10} {:>10}", "ρ", "η̄", "ᾱ", "d");
    for rho in [-2.0 / 3.0, 0.0, 2.0, 4.0, 6.0] {
        let kr = KappaRho::new(k, rho)?;
        println!(
            "{:>6.3} {:>10.6} {:>10.6} {:>10.6}",
            rho,
            bar_eta(k, rho)?,
            bar_alpha(k, rho)?,
            kr.dimension()
        );
    }

    println!("\nconditioning SLE_8/3 on avoiding a sample of exponent α");
    for alpha in [-1.0 / 24.0, 0.0, 5.0 / 8.0, 1.0, 2.0] {
        println!(
            "  α = {alpha:>8.5}: ρ̄ = {:.6}, σ̄ = {:.6}",
            bar_rho(k, 0.0, alpha)?,
            bar_sigma(k, 0.0, alpha)?
        );
    }

    println!("\np mutually avoiding SLE_8/3");
    for p in 1..=5 {
        println!("  p = {p}: ρ_p = {}, η_p = {}", rho_p(p)?, eta_p_83(p)?);
    }

    println!("\nhiding exponents");
    println!("  σ(1 hides 1)    = {:.9}", hide_one_sided(1.0, 1.0)?);
    println!("  τ(1 hides 1)    = {:.9}", hide_two_sided(1.0, 1.0)?);
    println!("  τ(2 hides 1)    = {:.9}", hide_two_sided(2.0, 1.0)?);
    println!("  τ̂(1, 1)         = {:.9}", mixed_hat_tau(1.0, 1.0)?);
    println!("  ρ(1 hides 1)    = {:.9}", radial_hide(1.0, 1.0)?);
    for (n, m) in [(1, 1), (1, 2), (2, 1), (4, 1)] {
        println!("  bm_hiding({n},{m}) = {:.9}", bm_hiding(n, m)?);
    }
    Ok(())
}
