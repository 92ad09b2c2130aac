//! Bessel processes of dimension d ≥ 1 and the Girsanov densities that
//! turn a Bessel process of index ν into one of index μ.
//!
//! Two samplers are provided. [`Scheme::LogEuler`] integrates
//! d(log X) = ν/X² dt + dB/X, which keeps paths positive and is used for
//! pathwise functionals. [`Scheme::ExactTransition`] draws each step from the
//! squared-Bessel (noncentral chi-square) transition law and serves as the
//! distributional oracle. Both accumulate ∫ ds/X² and ∫ ds/X by the
//! trapezoid rule, halving the local step while X < 10·√h.

use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mc::Rng;

/// Deepest dyadic refinement of a grid step near the origin.
pub const MAX_REFINE_DEPTH: u32 = 24;

/// Refinement threshold: substeps are halved while X < REFINE_RATIO·√h.
pub const REFINE_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSpec {
    dimension: f64,
    x0: f64,
}

impl BesselSpec {
    pub fn new(dimension: f64, x0: f64) -> Result<Self> {
        if !(dimension >= 1.0 && dimension.is_finite()) {
            return Err(Error::domain("dimension", dimension, "requires d ≥ 1"));
        }
        if !(x0 >= 0.0 && x0.is_finite()) {
            return Err(Error::domain("x0", x0, "requires x0 ≥ 0"));
        }
        Ok(Self { dimension, x0 })
    }

    /// Bessel process of index ν (d = 2 + 2ν).
    pub fn from_index(nu: f64, x0: f64) -> Result<Self> {
        Self::new(2.0 + 2.0 * nu, x0)
    }

    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    pub fn index(&self) -> f64 {
        (self.dimension - 2.0) / 2.0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn is_non_hitting(&self) -> bool {
        self.dimension >= 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LogEuler,
    ExactTransition,
}

/// Running integrals carried along a path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PathIntegrals {
    /// ∫ ds / X²
    pub inv_sq: f64,
    /// ∫ ds / X
    pub inv: f64,
    /// Number of substeps shorter than the grid step.
    pub refinements: u64,
}

/// Step kernel shared by [`sample_path`] and the streaming experiment code.
#[derive(Debug, Clone)]
pub struct BesselSampler {
    spec: BesselSpec,
    scheme: Scheme,
    chi_rest: Option<Gamma<f64>>,
}

impl BesselSampler {
    pub fn new(spec: BesselSpec, scheme: Scheme) -> Result<Self> {
        if scheme == Scheme::LogEuler && !spec.is_non_hitting() {
            return Err(Error::domain(
                "dimension",
                spec.dimension,
                "log-Euler scheme requires d ≥ 2",
            ));
        }
        if spec.x0 == 0.0 && !spec.is_non_hitting() {
            return Err(Error::domain(
                "x0",
                0.0,
                "starting from 0 is only supported for d ≥ 2",
            ));
        }
        let chi_rest = if spec.dimension > 1.0 {
            Some(Gamma::new((spec.dimension - 1.0) / 2.0, 2.0).map_err(|_| {
                Error::domain("dimension", spec.dimension, "invalid chi-square shape")
            })?)
        } else {
            None
        };
        Ok(Self {
            spec,
            scheme,
            chi_rest,
        })
    }

    /// Default scheme: log-Euler when d ≥ 2, exact transitions otherwise.
    pub fn for_spec(spec: BesselSpec) -> Result<Self> {
        let scheme = if spec.is_non_hitting() {
            Scheme::LogEuler
        } else {
            Scheme::ExactTransition
        };
        Self::new(spec, scheme)
    }

    pub fn spec(&self) -> BesselSpec {
        self.spec
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// One draw from the exact transition X_h given X_0 = x.
    pub fn exact_transition(&self, x: f64, h: f64, rng: &mut Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let shifted = z + x / h.sqrt();
        let rest = self.chi_rest.as_ref().map_or(0.0, |g| g.sample(rng));
        (h * (shifted * shifted + rest)).sqrt()
    }

    fn micro_step(&self, x: f64, h: f64, rng: &mut Rng) -> f64 {
        match self.scheme {
            // below the finest substep the log scheme is unresolved
            Scheme::LogEuler if x < REFINE_RATIO * h.sqrt() => self.exact_transition(x, h, rng),
            Scheme::LogEuler => {
                let z: f64 = rng.sample(StandardNormal);
                let nu = self.spec.index();
                x * (nu * h / (x * x) + h.sqrt() * z / x).exp()
            }
            Scheme::ExactTransition => self.exact_transition(x, h, rng),
        }
    }

    /// Advances from `x` across one grid step of length `dt`, adding the
    /// trapezoid contributions to `acc`. Returns the new value.
    pub fn advance(&self, x: f64, dt: f64, rng: &mut Rng, acc: &mut PathIntegrals) -> f64 {
        if x == 0.0 {
            // From the origin X_s ≈ X_dt·√(s/dt): ∫ds/X converges, ∫ds/X² does not.
            let next = self.exact_transition(0.0, dt, rng);
            acc.inv += 2.0 * dt / next;
            acc.inv_sq = f64::INFINITY;
            return next;
        }
        let total: u64 = 1 << MAX_REFINE_DEPTH;
        let unit = dt / total as f64;
        let mut x = x;
        let mut pos: u64 = 0;
        while pos < total {
            // largest aligned dyadic step allowed at this position
            let aligned = if pos == 0 { total } else { 1 << pos.trailing_zeros() };
            let wanted = if x >= REFINE_RATIO * dt.sqrt() {
                total
            } else {
                let u = ((x / REFINE_RATIO).powi(2) / unit) as u64;
                if u == 0 {
                    1
                } else {
                    1 << (63 - u.leading_zeros())
                }
            };
            let h_units = aligned.min(wanted);
            let h = unit * h_units as f64;
            let next = self.micro_step(x, h, rng);
            let next = if next > 0.0 { next } else { f64::MIN_POSITIVE };
            acc.inv_sq += 0.5 * h * (1.0 / (x * x) + 1.0 / (next * next));
            acc.inv += 0.5 * h * (1.0 / x + 1.0 / next);
            if h_units < total {
                acc.refinements += 1;
            }
            pos += h_units;
            x = next;
        }
        x
    }

    /// Runs over the whole grid, reporting `(k, X_k, integrals)` at every grid time.
    pub fn run(&self, grid: &TimeGrid, rng: &mut Rng, mut visit: impl FnMut(usize, f64, &PathIntegrals)) {
        let mut acc = PathIntegrals::default();
        let mut x = self.spec.x0;
        visit(0, x, &acc);
        for k in 0..grid.steps() {
            x = self.advance(x, grid.step(k), rng, &mut acc);
            visit(k + 1, x, &acc);
        }
    }

    /// Terminal value and integrals without storing the path.
    pub fn terminal(&self, grid: &TimeGrid, rng: &mut Rng) -> (f64, PathIntegrals) {
        let mut acc = PathIntegrals::default();
        let mut x = self.spec.x0;
        for k in 0..grid.steps() {
            x = self.advance(x, grid.step(k), rng, &mut acc);
        }
        (x, acc)
    }
}

/// A sampled Bessel trajectory on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselPath {
    pub spec: BesselSpec,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// ∫₀^{t_k} ds / X_s²
    pub inv_sq_integral: Vec<f64>,
    /// ∫₀^{t_k} ds / X_s
    pub inv_integral: Vec<f64>,
    pub refinements: u64,
}

impl BesselPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid step when the grid is uniform.
    pub fn dt(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        let n = (self.times.len() - 1) as f64;
        ((self.times[self.times.len() - 1] - dt * n).abs() < 1e-9 * self.times[self.times.len() - 1])
            .then_some(dt)
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// The part of the path from index `k` on, restarted at X_{t_k}.
    pub fn tail_from(&self, k: usize) -> Result<BesselPath> {
        if k >= self.values.len() {
            return Err(Error::Usage(format!("index {k} beyond path length")));
        }
        let spec = BesselSpec::new(self.spec.dimension, self.values[k])?;
        let t0 = self.times[k];
        let (s0, i0) = (self.inv_sq_integral[k], self.inv_integral[k]);
        Ok(BesselPath {
            spec,
            times: self.times[k..].iter().map(|t| t - t0).collect(),
            values: self.values[k..].to_vec(),
            inv_sq_integral: self.inv_sq_integral[k..].iter().map(|v| v - s0).collect(),
            inv_integral: self.inv_integral[k..].iter().map(|v| v - i0).collect(),
            refinements: 0,
        })
    }

    /// The path truncated at index `k` (inclusive).
    pub fn head_to(&self, k: usize) -> BesselPath {
        let k = k.min(self.values.len() - 1);
        BesselPath {
            spec: self.spec,
            times: self.times[..=k].to_vec(),
            values: self.values[..=k].to_vec(),
            inv_sq_integral: self.inv_sq_integral[..=k].to_vec(),
            inv_integral: self.inv_integral[..=k].to_vec(),
            refinements: self.refinements,
        }
    }
}

/// Samples a path on `grid` with the default scheme for the dimension.
pub fn sample_path(spec: BesselSpec, grid: &TimeGrid, rng: &mut Rng) -> Result<BesselPath> {
    sample_path_with(&BesselSampler::for_spec(spec)?, grid, rng)
}

/// Uniform-grid convenience wrapper around [`sample_path`].
pub fn sample_path_uniform(spec: BesselSpec, t_end: f64, dt: f64, rng: &mut Rng) -> Result<BesselPath> {
    sample_path(spec, &TimeGrid::uniform(t_end, dt)?, rng)
}

pub fn sample_path_with(sampler: &BesselSampler, grid: &TimeGrid, rng: &mut Rng) -> Result<BesselPath> {
    let n = grid.steps() + 1;
    let mut values = Vec::with_capacity(n);
    let mut inv_sq = Vec::with_capacity(n);
    let mut inv = Vec::with_capacity(n);
    let mut refinements = 0;
    sampler.run(grid, rng, |_, x, acc| {
        values.push(x);
        inv_sq.push(acc.inv_sq);
        inv.push(acc.inv);
        refinements = acc.refinements;
    });
    Ok(BesselPath {
        spec: sampler.spec(),
        times: grid.times().to_vec(),
        values,
        inv_sq_integral: inv_sq,
        inv_integral: inv,
        refinements,
    })
}

/// Radon–Nikodym factor changing the index of a Bessel path from ν to μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirsanovWeight {
    pub nu_from: f64,
    pub mu_to: f64,
    pub log_weight: f64,
    pub weight: f64,
}

/// log[(X_t/x)^{μ−ν} · exp(−(μ²−ν²)/2 · ∫ds/X²)].
pub fn girsanov_log_weight(x0: f64, x_t: f64, inv_sq: f64, nu: f64, mu: f64) -> f64 {
    if mu == nu {
        return 0.0;
    }
    (mu - nu) * (x_t / x0).ln() - 0.5 * (mu * mu - nu * nu) * inv_sq
}

fn check_weight_args(x0: f64, nu: f64, mu: f64) -> Result<()> {
    if x0 <= 0.0 {
        return Err(Error::domain("x0", x0, "density singular at start 0"));
    }
    if nu < 0.0 {
        return Err(Error::domain("nu", nu, "requires a path of dimension d ≥ 2"));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::domain("mu", mu, "requires target index μ ≥ 0"));
    }
    Ok(())
}

/// Weight over the whole path, evaluated at its terminal time.
pub fn girsanov_weight(path: &BesselPath, mu_to: f64) -> Result<GirsanovWeight> {
    girsanov_weight_at(path, mu_to, path.len() - 1)
}

pub fn girsanov_weight_at(path: &BesselPath, mu_to: f64, k: usize) -> Result<GirsanovWeight> {
    let nu = path.spec.index();
    check_weight_args(path.spec.x0, nu, mu_to)?;
    let log_weight = girsanov_log_weight(
        path.spec.x0,
        path.values[k],
        path.inv_sq_integral[k],
        nu,
        mu_to,
    );
    Ok(GirsanovWeight {
        nu_from: nu,
        mu_to,
        log_weight,
        weight: log_weight.exp(),
    })
}

fn check_moment(dimension: f64, q: f64) -> Result<()> {
    if !(q < dimension) {
        return Err(Error::domain(
            "q",
            q,
            "moment E[X^{-q}] diverges unless q < d",
        ));
    }
    Ok(())
}

/// E[X_t^{−q}] for a Bessel process of dimension `dimension` started at `x`,
/// summed from the Poisson mixture representation of the noncentral
/// chi-square law.
pub fn bessel_neg_moment(dimension: f64, x: f64, q: f64, t: f64) -> Result<f64> {
    if !(dimension > 0.0) {
        return Err(Error::domain("dimension", dimension, "requires d > 0"));
    }
    if !(t > 0.0) {
        return Err(Error::domain("t", t, "requires t > 0"));
    }
    if x < 0.0 {
        return Err(Error::domain("x", x, "requires x ≥ 0"));
    }
    check_moment(dimension, q)?;
    let s = q / 2.0;
    let half_lambda = x * x / (2.0 * t);
    let chi_term = |k: f64| -> f64 {
        let nu = dimension / 2.0 + k;
        -s * std::f64::consts::LN_2 + ln_gamma(nu - s) - ln_gamma(nu)
    };
    let total = if half_lambda == 0.0 {
        chi_term(0.0).exp()
    } else {
        let ln_hl = half_lambda.ln();
        let k_max = (half_lambda + 12.0 * half_lambda.sqrt() + 60.0).ceil() as usize;
        let mut sum = 0.0;
        for k in 0..=k_max {
            let kf = k as f64;
            let ln_poisson = -half_lambda + kf * ln_hl - ln_gamma(kf + 1.0);
            sum += (ln_poisson + chi_term(kf)).exp();
        }
        sum
    };
    Ok(t.powf(-s) * total)
}

/// E[X̃_t^{−q}] for a Bessel process of index μ started at 0.
pub fn neg_moment_from_zero(mu: f64, q: f64, t: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::domain("mu", mu, "requires μ ≥ 0"));
    }
    bessel_neg_moment(2.0 + 2.0 * mu, 0.0, q, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream;

    #[test]
    fn spec_validation() {
        assert!(BesselSpec::new(0.5, 1.0).is_err());
        assert!(BesselSpec::new(2.0, -1.0).is_err());
        let s = BesselSpec::from_index(0.25, 1.0).unwrap();
        assert!((s.dimension() - 2.5).abs() < 1e-15);
        assert!(BesselSampler::for_spec(BesselSpec::new(1.5, 0.0).unwrap()).is_err());
        assert!(BesselSampler::new(BesselSpec::new(1.5, 1.0).unwrap(), Scheme::LogEuler).is_err());
    }

    #[test]
    fn path_invariants() {
        let spec = BesselSpec::new(2.5, 0.3).unwrap();
        let path = sample_path_uniform(spec, 1.0, 1e-3, &mut stream(3, 0)).unwrap();
        assert_eq!(path.len(), 1001);
        assert_eq!(path.values[0], 0.3);
        assert_eq!(path.inv_sq_integral[0], 0.0);
        assert!(path.values[1..].iter().all(|&x| x > 0.0));
        assert!(path.inv_sq_integral.windows(2).all(|w| w[1] >= w[0]));
        assert!((path.dt().unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn zero_start_for_d_ge_2() {
        let spec = BesselSpec::new(3.0, 0.0).unwrap();
        let path = sample_path_uniform(spec, 0.1, 1e-3, &mut stream(4, 0)).unwrap();
        assert!(path.values[1..].iter().all(|&x| x > 0.0));
        assert!(path.inv_sq_integral[1].is_infinite());
        assert!(path.inv_integral.iter().all(|v| v.is_finite()));
        let err = girsanov_weight(&path, 1.0).unwrap_err();
        assert!(err.to_string().contains("singular"));
    }

    #[test]
    fn weight_is_one_when_index_unchanged() {
        let spec = BesselSpec::from_index(0.5, 1.0).unwrap();
        for seed in 0..5 {
            let path = sample_path_uniform(spec, 1.0, 1e-3, &mut stream(seed, 0)).unwrap();
            assert_eq!(girsanov_weight(&path, 0.5).unwrap().weight, 1.0);
        }
    }

    #[test]
    fn weight_telescopes() {
        let spec = BesselSpec::from_index(0.25, 0.8).unwrap();
        let path = sample_path_uniform(spec, 1.0, 1e-3, &mut stream(5, 0)).unwrap();
        let whole = girsanov_weight(&path, 1.0).unwrap();
        let head = girsanov_weight(&path.head_to(400), 1.0).unwrap();
        let tail = girsanov_weight(&path.tail_from(400).unwrap(), 1.0).unwrap();
        assert!((whole.weight - head.weight * tail.weight).abs() < 1e-10 * whole.weight.max(1.0));
    }

    #[test]
    fn moment_domain() {
        assert!(neg_moment_from_zero(0.5, 3.0, 1.0).is_err());
        assert!((neg_moment_from_zero(0.5, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        // μ = ν gives c = E[X̃^0] = 1
        assert!((neg_moment_from_zero(0.25, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        // t-scaling: E[X_t^{-q}] = t^{-q/2} E[X_1^{-q}]
        let a = neg_moment_from_zero(1.0, 1.5, 1.0).unwrap();
        let b = neg_moment_from_zero(1.0, 1.5, 4.0).unwrap();
        assert!((b - a * 4f64.powf(-0.75)).abs() < 1e-12);
    }

    #[test]
    fn neg_moment_continuous_at_zero_start() {
        let from0 = bessel_neg_moment(4.0, 0.0, 0.75, 1.0).unwrap();
        let near0 = bessel_neg_moment(4.0, 1e-6, 0.75, 1.0).unwrap();
        assert!((from0 - near0).abs() < 1e-9);
        // far start: E[X^{-q}] ≈ x^{-q}
        let far = bessel_neg_moment(3.0, 50.0, 1.0, 1.0).unwrap();
        assert!((far * 50.0 - 1.0).abs() < 1e-3);
    }
}
