//! The explicit map removing a vertical slit against the zipper built from
//! a sampled arc.

use num_complex::Complex64;
use sle_rho::conformal::*;

fn main() -> sle_rho::Result<()> {
    let hull = SlitHull::new(1.0, 1.0)?;
    println!("φ_A'(0) = {:.10} (1/√2 = {:.10})", slit_phi_prime_at_zero(&hull), 0.5f64.sqrt());

    let probes = [
        Complex64::new(-1.0, 0.5),
        Complex64::new(0.5, 2.0),
        Complex64::new(3.0, 0.1),
        Complex64::new(1.2, 0.3),
    ];
    for n in [25, 50, 100, 200] {
        let chain = zipper_map_out(&ArcPolyline::vertical(&hull, n)?);
        let shift = chain.eval(Complex64::new(0.0, 0.0));
        let err = probes
            .iter()
            .map(|z| {
                let want = slit_phi(&hull, *z).unwrap();
                (chain.eval(*z) - shift - want).norm() / want.norm()
            })
            .fold(0.0, f64::max);
        println!("{n:>4} arc points: max relative error {err:.2e}");
    }

    let (a, rho) = (0.1, 2.0);
    let q = HQuantities::initial(&hull, a, 0.0)?;
    println!(
        "h'(W) = {:.5}, h'(O) = {:.5}, M_0 = {:.5} for SLE(8/3, {rho}) from (0, {a})",
        q.hp_w,
        q.hp_o,
        martingale_m(&q, a, 0.0, rho)?
    );
    Ok(())
}
