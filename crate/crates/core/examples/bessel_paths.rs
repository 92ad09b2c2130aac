//! Bessel paths from the log-Euler scheme against exact transitions, and
//! the Girsanov factor that changes the index.
//!
//!     cargo run --release --example bessel_paths

use sle_rho::bessel::*;
use sle_rho::grid::TimeGrid;
use sle_rho::mc::{estimate_mean, stream};

fn main() -> sle_rho::Result<()> {
    let (nu, mu, x0) = (0.25, 1.0, 0.5);
    let spec = BesselSpec::from_index(nu, x0)?;
    let grid = TimeGrid::uniform(1.0, 1e-3)?;

    let path = sample_path(spec, &grid, &mut stream(1, 0))?;
    println!(
        "one path: d = {}, X_1 = {:.4}, ∫ds/X² = {:.4}, {} refined substeps",
        spec.dimension(),
        path.terminal(),
        path.inv_sq_integral[path.len() - 1],
        path.refinements
    );

    let euler = BesselSampler::new(spec, Scheme::LogEuler)?;
    let exact = BesselSampler::new(spec, Scheme::ExactTransition)?;
    let n = 20_000;
    let a = estimate_mean(n, 2, |rng| euler.terminal(&grid, rng).0);
    let b = estimate_mean(n, 3, |rng| exact.exact_transition(x0, 1.0, rng));
    println!("E[X_1]: log-Euler {:.4} ± {:.4}, exact {:.4} ± {:.4}", a.mean, a.stderr, b.mean, b.stderr);

    // index ν paths reweighted to index μ
    let target = BesselSampler::new(BesselSpec::from_index(mu, x0)?, Scheme::ExactTransition)?;
    let weighted = estimate_mean(n, 4, |rng| {
        let (x, acc) = euler.terminal(&grid, rng);
        girsanov_log_weight(x0, x, acc.inv_sq, nu, mu).exp() * x.min(2.0)
    });
    let direct = estimate_mean(n, 5, |rng| target.exact_transition(x0, 1.0, rng).min(2.0));
    println!(
        "E_μ[min(X_1, 2)]: reweighted {:.4} ± {:.4}, direct {:.4} ± {:.4}",
        weighted.mean, weighted.stderr, direct.mean, direct.stderr
    );

    let q = mu - nu;
    println!("E_μ[X_1^-{q}] from 0 in closed form: {:.6}", neg_moment_from_zero(mu, q, 1.0)?);
    Ok(())
}
