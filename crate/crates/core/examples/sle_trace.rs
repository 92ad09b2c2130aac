//! Samples one SLE(κ, ρ) trace and writes it as CSV.
//!
//!     cargo run --release --example sle_trace -- 8/3 2 > trace.csv

use sle_rho::bessel::sample_path;
use sle_rho::cli::parse_number;
use sle_rho::exponents::KappaRho;
use sle_rho::grid::TimeGrid;
use sle_rho::loewner::{g_prime_at_zero, trace_from_driving, DrivingPath, SleRhoSpec};
use sle_rho::mc::stream;

fn main() -> sle_rho::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).map_or(Ok(default), |s| parse_number(s));
    let kappa = arg(0, 8.0 / 3.0).map_err(sle_rho::Error::Usage)?;
    let rho = arg(1, 0.0).map_err(sle_rho::Error::Usage)?;

    let spec = SleRhoSpec::from_gap(KappaRho::new(kappa, rho)?, 0.05)?;
    let grid = TimeGrid::uniform(1.0, 1e-3)?;
    let path = sample_path(spec.bessel_spec()?, &grid, &mut stream(7, 0))?;
    let dp = DrivingPath::from_bessel(&path, kappa, 0.0)?;
    let trace = trace_from_driving(&dp);

    eprintln!(
        "κ = {kappa:.4}, ρ = {rho}: tip {:.4}, simple: {}, g_1'(0) = {:.4}",
        trace.tip(),
        trace.is_simple(),
        g_prime_at_zero(&dp, dp.steps())?.value
    );
    trace.write_csv(std::io::stdout().lock())
}
