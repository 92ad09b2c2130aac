use rand::Rng as _;
use rand_distr::StandardNormal;
use sle_rho::bessel::*;
use sle_rho::grid::TimeGrid;
use sle_rho::mc::{estimate_mean, run_blocks, Estimate};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn samples(n: u64, seed: u64, f: impl Fn(&mut sle_rho::mc::Rng) -> f64 + Sync) -> Vec<f64> {
    let blocks = run_blocks(n, seed, |_, rng, count| (0..count).map(|_| f(rng)).collect::<Vec<_>>());
    blocks.into_iter().flatten().collect()
}

fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let c = cdf(*x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn within(e: &Estimate, target: f64, k: f64) -> bool {
    (e.mean - target).abs() < k * e.stderr
}

#[test]
fn three_dimensional_mean_matches_gaussian_modulus() {
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    let sampler = BesselSampler::new(BesselSpec::new(3.0, 1.0).unwrap(), Scheme::LogEuler).unwrap();
    let bessel = estimate_mean(100_000, 1, |rng| sampler.terminal(&grid, rng).0);
    let gauss = estimate_mean(100_000, 2, |rng| {
        let g: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        ((1.0 + g[0]).powi(2) + g[1] * g[1] + g[2] * g[2]).sqrt()
    });
    assert!(bessel.z_against(&gauss).abs() < 3.0, "{bessel:?} vs {gauss:?}");
}

#[test]
fn squared_bessel_from_zero_is_chi_square() {
    for d in [2.5, 3.0, 4.5] {
        let sampler =
            BesselSampler::new(BesselSpec::new(d, 0.0).unwrap(), Scheme::ExactTransition).unwrap();
        let xs = samples(100_000, 3, |rng| sampler.exact_transition(0.0, 1.0, rng).powi(2));
        let chi = ChiSquared::new(d).unwrap();
        let ks = ks_one_sample(xs, |x| chi.cdf(x));
        assert!(ks < 0.01, "d = {d}: KS = {ks}");
    }
}

#[test]
fn log_scheme_marginal_matches_exact_transition() {
    let spec = BesselSpec::new(2.5, 0.3).unwrap();
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    let euler = BesselSampler::new(spec, Scheme::LogEuler).unwrap();
    let exact = BesselSampler::new(spec, Scheme::ExactTransition).unwrap();
    let a = samples(100_000, 4, |rng| euler.terminal(&grid, rng).0);
    let b = samples(100_000, 5, |rng| exact.exact_transition(0.3, 1.0, rng));
    let ks = ks_two_sample(a, b);
    assert!(ks < 0.01, "KS = {ks}");
}

#[test]
fn second_moment_grows_linearly() {
    // X² − d·t is a martingale
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    for (d, x0) in [(2.0, 0.5), (3.0, 1.0), (5.0, 0.1)] {
        let s = BesselSampler::new(BesselSpec::new(d, x0).unwrap(), Scheme::LogEuler).unwrap();
        let m = estimate_mean(50_000, 6, |rng| s.terminal(&grid, rng).0.powi(2));
        assert!(within(&m, x0 * x0 + d, 3.0), "d = {d}: {m:?}");
    }
}

#[test]
fn girsanov_weight_has_unit_mean() {
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    let (nu, mu, x0) = (0.25, 0.75, 1.0);
    let s = BesselSampler::new(BesselSpec::from_index(nu, x0).unwrap(), Scheme::LogEuler).unwrap();
    let w = estimate_mean(100_000, 7, |rng| {
        let (x, acc) = s.terminal(&grid, rng);
        girsanov_log_weight(x0, x, acc.inv_sq, nu, mu).exp()
    });
    assert!(within(&w, 1.0, 3.0), "{w:?}");
}

#[test]
fn change_of_measure_grid() {
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    let idx = [0.0, 0.25, 0.5, 1.0];
    let x0 = 1.0;
    let f = |x: f64| x.min(5.0);
    let mut worst: f64 = 0.0;
    for (i, &nu) in idx.iter().enumerate() {
        for (j, &mu) in idx.iter().enumerate() {
            let from = BesselSampler::new(BesselSpec::from_index(nu, x0).unwrap(), Scheme::LogEuler).unwrap();
            let to = BesselSampler::new(BesselSpec::from_index(mu, x0).unwrap(), Scheme::LogEuler).unwrap();
            let tag = 100 + 10 * i as u64 + j as u64;
            let weighted = estimate_mean(20_000, tag, |rng| {
                let (x, acc) = from.terminal(&grid, rng);
                girsanov_log_weight(x0, x, acc.inv_sq, nu, mu).exp() * f(x)
            });
            let direct = estimate_mean(20_000, tag + 1000, |rng| f(to.terminal(&grid, rng).0));
            let z = weighted.z_against(&direct).abs();
            worst = worst.max(z);
            assert!(z < 3.0, "ν = {nu}, μ = {mu}: z = {z}");
        }
    }
    eprintln!("largest |z| over the grid: {worst:.2}");
}

#[test]
fn weight_telescopes_along_sampled_paths() {
    let grid = TimeGrid::uniform(1.0, 1e-2).unwrap();
    let spec = BesselSpec::from_index(0.5, 0.7).unwrap();
    let mut rng = sle_rho::mc::stream(8, 0);
    for _ in 0..20 {
        let path = sample_path(spec, &grid, &mut rng).unwrap();
        let k = path.len() / 3;
        let whole = girsanov_weight(&path, 1.5).unwrap().log_weight;
        let head = girsanov_weight_at(&path, 1.5, k).unwrap().log_weight;
        let tail = girsanov_weight(&path.tail_from(k).unwrap(), 1.5).unwrap().log_weight;
        assert!((whole - head - tail).abs() < 1e-10);
    }
}

#[test]
fn inverse_moment_in_three_dimensions() {
    // |x e₁ + N(0, I₃)| has E[1/R] = erf(x/√2)/x, and √(2/π) at x = 0
    use statrs::function::erf::erf;
    assert!((neg_moment_from_zero(0.5, 1.0, 1.0).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    for x in [0.1, 0.5, 1.0, 3.0] {
        let want = erf(x / 2f64.sqrt()) / x;
        let got = bessel_neg_moment(3.0, x, 1.0, 1.0).unwrap();
        assert!((got - want).abs() < 1e-10, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn inverse_moment_by_quadrature() {
    // chi law with d degrees of freedom, E[R^{-q}] by the trapezoid rule
    for (d, q) in [(3.0, 1.0), (2.5, 0.75), (5.0, 2.5)] {
        let h = 1e-4;
        let dens = |r: f64| r.powf(d - 1.0) * (-r * r / 2.0).exp();
        let (mut num, mut den) = (0.0, 0.0);
        let mut r = h;
        while r < 40.0 {
            num += dens(r) * r.powf(-q);
            den += dens(r);
            r += h;
        }
        let want = num / den;
        let got = bessel_neg_moment(d, 0.0, q, 1.0).unwrap();
        assert!((got - want).abs() < 1e-4 * want, "d = {d}, q = {q}: {got} vs {want}");
    }
}

#[test]
fn positivity_for_non_hitting_dimensions() {
    let grid = TimeGrid::uniform(1.0, 1e-3).unwrap();
    let mut rng = sle_rho::mc::stream(9, 0);
    for d in [2.0, 2.2, 3.0] {
        let path = sample_path(BesselSpec::new(d, 0.05).unwrap(), &grid, &mut rng).unwrap();
        assert!(path.values[1..].iter().all(|x| *x > 0.0));
        assert!(path.inv_sq_integral.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(path.inv_sq_integral[0], 0.0);
    }
}
