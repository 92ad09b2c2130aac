//! Monte Carlo experiments: the Bessel-identity check, one-sided restriction
//! for SLE(8/3, ρ), stationarity of the restriction martingale, Girsanov
//! reweighting, decay-slope fits and the planar Brownian hiding experiment.
//!
//! Every experiment is a pure function of its parameters and an [`MCConfig`];
//! paths are split into fixed-size blocks on keyed RNG substreams and reduced
//! in a fixed order, so results are bit-identical across runs and thread counts.

use std::collections::VecDeque;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::Path;

use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bessel::{
    bessel_neg_moment, girsanov_log_weight, BesselSampler, BesselSpec, PathIntegrals, Scheme,
};
use crate::conformal::{
    martingale_m, slit_phi_prime_at_zero, HQuantities, HitRule, SlitHull, SlitTracker, StepOutcome,
};
use crate::error::{Error, Result};
use crate::exponents::{bar_eta, bar_rho, bar_sigma, bm_hiding_real, min_alpha_for, KappaRho};
use crate::grid::TimeGrid;
use crate::mc::{derive_seed, pairwise_reduce, run_blocks, Estimate, Moments, RatioMoments, Rng};

pub const KAPPA_83: f64 = 8.0 / 3.0;

fn default_t_end() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-4
}
fn default_start() -> f64 {
    1.0
}
fn default_power() -> f64 {
    1.0
}
fn default_arc_points() -> usize {
    32
}
fn default_bm_step() -> f64 {
    0.02
}

/// Monte Carlo settings shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_paths: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    /// Start gap a for experiments that do not take it as a parameter.
    #[serde(default = "default_start")]
    pub start: f64,
    /// Time grid t_k = T(k/N)^power; 1 gives the uniform grid.
    #[serde(default = "default_power")]
    pub grid_power: f64,
    /// Initial sample points on a slit hull.
    #[serde(default = "default_arc_points")]
    pub arc_points: usize,
    /// Hull piece tested against A at each Loewner step.
    #[serde(default)]
    pub hit_rule: HitRule,
    /// Brownian step standard deviation in the hiding experiment.
    #[serde(default = "default_bm_step")]
    pub bm_step: f64,
    /// Raster cell size; defaults to twice the step.
    #[serde(default)]
    pub raster_h: Option<f64>,
}

impl MCConfig {
    pub fn new(n_paths: u64, dt: f64, t_end: f64, seed: u64) -> Self {
        MCConfig {
            n_paths,
            dt,
            t_end,
            seed,
            start: default_start(),
            grid_power: default_power(),
            arc_points: default_arc_points(),
            hit_rule: HitRule::default(),
            bm_step: default_bm_step(),
            raster_h: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: MCConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Usage("n_paths must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::domain("dt", self.dt, "requires 0 < dt ≤ T"));
        }
        if !(self.start > 0.0) {
            return Err(Error::domain("start", self.start, "requires a > 0"));
        }
        if !(self.grid_power >= 1.0) {
            return Err(Error::domain("grid_power", self.grid_power, "requires power ≥ 1"));
        }
        if !(self.bm_step > 0.0) {
            return Err(Error::domain("bm_step", self.bm_step, "requires a positive step"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.validate()?;
        if self.grid_power == 1.0 {
            TimeGrid::uniform(self.t_end, self.dt)
        } else {
            TimeGrid::graded(self.t_end, (self.t_end / self.dt).round() as usize, self.grid_power)
        }
    }

    pub fn raster_cell(&self) -> f64 {
        self.raster_h.unwrap_or(2.0 * self.bm_step)
    }

    /// First 16 hex digits of the SHA-256 of the JSON encoding.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn with_seed(&self, seed: u64) -> MCConfig {
        MCConfig {
            seed,
            ..self.clone()
        }
    }
}

/// One CSV row: experiment, named parameters, estimate and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub experiment: String,
    pub params: Vec<(String, f64)>,
    pub estimate: Estimate,
    pub seed: u64,
    pub config_hash: String,
}

impl Record {
    pub fn new(experiment: &str, params: &[(&str, f64)], estimate: Estimate, cfg: &MCConfig) -> Self {
        Record {
            experiment: experiment.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            estimate,
            seed: cfg.seed,
            config_hash: cfg.config_hash(),
        }
    }
}

const RESERVED_COLUMNS: [&str; 6] = ["experiment", "estimate", "stderr", "n", "seed", "config_hash"];

/// Writes records sharing one parameter layout. Header:
/// `experiment,<params…>,estimate,stderr,n,seed,config_hash`.
pub fn write_records_csv<W: Write>(records: &[Record], mut out: W) -> Result<()> {
    let Some(first) = records.first() else {
        return Err(Error::Usage("no records to write".into()));
    };
    let names: Vec<&str> = first.params.iter().map(|(k, _)| k.as_str()).collect();
    if let Some(clash) = names.iter().find(|n| RESERVED_COLUMNS.contains(n)) {
        return Err(Error::Usage(format!("parameter column '{clash}' is reserved")));
    }
    write!(out, "experiment")?;
    for n in &names {
        write!(out, ",{n}")?;
    }
    writeln!(out, ",estimate,stderr,n,seed,config_hash")?;
    for r in records {
        let these: Vec<&str> = r.params.iter().map(|(k, _)| k.as_str()).collect();
        if these != names {
            return Err(Error::Usage("records have different parameter columns".into()));
        }
        write!(out, "{}", r.experiment)?;
        for (_, v) in &r.params {
            write!(out, ",{v}")?;
        }
        writeln!(
            out,
            ",{},{},{},{},{}",
            r.estimate.mean, r.estimate.stderr, r.estimate.n, r.seed, r.config_hash
        )?;
    }
    Ok(())
}

fn block_moments(n: u64, seed: u64, sample: impl Fn(&mut Rng) -> f64 + Sync) -> Estimate {
    let blocks = run_blocks(n, seed, |_, rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample(rng));
        }
        m
    });
    pairwise_reduce(blocks, Moments::merge).unwrap_or_default().estimate()
}

fn z_score(a: &Estimate, b: &Estimate) -> f64 {
    a.z_against(b)
}

/// Result of [`verify_bessel_identity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub kappa: f64,
    pub rho: f64,
    pub alpha: f64,
    pub a: f64,
    pub nu: f64,
    pub mu: f64,
    /// E[g_T′(0)^α] over SLE(κ,ρ) driving paths.
    pub lhs: Estimate,
    /// E[(x/X̃_T)^{μ−ν}] over exact index-μ Bessel draws.
    pub rhs: Estimate,
    /// The same expectation summed in closed form.
    pub exact: f64,
    pub z: f64,
    pub z_lhs_exact: f64,
    pub refinements_per_path: f64,
}

impl IdentityResult {
    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        let p = [
            ("kappa", self.kappa),
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("a", self.a),
        ];
        vec![
            Record::new("identity_lhs", &p, self.lhs, cfg),
            Record::new("identity_rhs", &p, self.rhs, cfg),
            Record::new("identity_exact", &p, Estimate::exact(self.exact, 0), cfg),
        ]
    }
}

fn identity_indices(kappa: f64, rho: f64, alpha: f64) -> Result<(KappaRho, f64, f64)> {
    let kr = KappaRho::new(kappa, rho)?;
    kr.require_non_hitting()?;
    let floor = min_alpha_for(kappa, rho)?;
    if alpha < floor {
        return Err(Error::domain(
            "alpha",
            alpha,
            "below the normalizability bound −κν²/4 for this (κ, ρ)",
        ));
    }
    let nu = kr.nu();
    let mu = nu + bar_sigma(kappa, rho, alpha)?;
    Ok((kr, nu, mu))
}

/// Checks E[g_T′(0)^α] = E[(x/X̃_T)^{μ−ν}] for SLE(κ,ρ) started from (0, a),
/// x = a/√κ. No conformal maps are involved.
pub fn verify_bessel_identity(kappa: f64, rho: f64, alpha: f64, a: f64, cfg: &MCConfig) -> Result<IdentityResult> {
    if !(a > 0.0) {
        return Err(Error::domain("a", a, "requires a > 0"));
    }
    let (kr, nu, mu) = identity_indices(kappa, rho, alpha)?;
    let x = a / kappa.sqrt();
    let grid = cfg.grid()?;
    let t = grid.t_end();
    let q = mu - nu;
    let exact = if q == 0.0 {
        1.0
    } else {
        x.powf(q) * bessel_neg_moment(2.0 + 2.0 * mu, x, q, t)?
    };
    if alpha == 0.0 {
        let one = Estimate::exact(1.0, cfg.n_paths);
        return Ok(IdentityResult {
            kappa,
            rho,
            alpha,
            a,
            nu,
            mu,
            lhs: one,
            rhs: one,
            exact,
            z: 0.0,
            z_lhs_exact: 0.0,
            refinements_per_path: 0.0,
        });
    }
    let sampler = BesselSampler::new(BesselSpec::new(kr.dimension(), x)?, Scheme::LogEuler)?;
    let coef = 2.0 * alpha / kappa;
    let blocks = run_blocks(cfg.n_paths, derive_seed(cfg.seed, 1), |_, rng, count| {
        let mut m = Moments::default();
        let mut refinements = 0u64;
        for _ in 0..count {
            let (_, acc) = sampler.terminal(&grid, rng);
            refinements += acc.refinements;
            m.push((-coef * acc.inv_sq).exp());
        }
        (m, refinements)
    });
    let refinements: u64 = blocks.iter().map(|b| b.1).sum();
    let lhs = pairwise_reduce(blocks.into_iter().map(|b| b.0).collect(), Moments::merge)
        .unwrap_or_default()
        .estimate();

    let target = BesselSampler::new(BesselSpec::new(2.0 + 2.0 * mu, x)?, Scheme::ExactTransition)?;
    let rhs = block_moments(cfg.n_paths, derive_seed(cfg.seed, 2), |rng| {
        let xt = target.exact_transition(x, t, rng);
        (x / xt).powf(q)
    });
    Ok(IdentityResult {
        kappa,
        rho,
        alpha,
        a,
        nu,
        mu,
        z: z_score(&lhs, &rhs),
        z_lhs_exact: lhs.z_target(exact),
        lhs,
        rhs,
        exact,
        refinements_per_path: refinements as f64 / cfg.n_paths as f64,
    })
}

/// Bounded functionals of the driving path used by the reweighting check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Functional {
    /// min(Y_T, c)
    MinY(f64),
    /// 1{Y_T > c}
    IndicatorY(f64),
}

impl Functional {
    pub fn eval(&self, y_t: f64) -> f64 {
        match *self {
            Functional::MinY(c) => y_t.min(c),
            Functional::IndicatorY(c) => (y_t > c) as u8 as f64,
        }
    }

    /// Parses `min:c` or `indicator:c`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, c) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("functional '{s}' is not kind:c")))?;
        let c: f64 = c
            .parse()
            .map_err(|_| Error::Usage(format!("bad threshold in '{s}'")))?;
        match kind {
            "min" => Ok(Functional::MinY(c)),
            "indicator" => Ok(Functional::IndicatorY(c)),
            _ => Err(Error::Usage(format!("unknown functional '{kind}'"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Functional::MinY(c) => format!("min:{c}"),
            Functional::IndicatorY(c) => format!("indicator:{c}"),
        }
    }
}

/// Result of [`importance_sampling_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReweightResult {
    pub kappa: f64,
    pub rho: f64,
    pub alpha: f64,
    pub rho_bar: f64,
    pub a: f64,
    pub functional: String,
    pub direct: Estimate,
    pub reweighted: Estimate,
    pub z: f64,
}

impl ReweightResult {
    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        let p = [
            ("kappa", self.kappa),
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("rho_bar", self.rho_bar),
        ];
        vec![
            Record::new("reweight_direct", &p, self.direct, cfg),
            Record::new("reweight_weighted", &p, self.reweighted, cfg),
        ]
    }
}

/// Compares E over SLE(κ,ρ̄) of f(Y_T) with the self-normalized
/// Girsanov-weighted mean over SLE(κ,ρ). Both start from (0, cfg.start).
pub fn importance_sampling_check(
    kappa: f64,
    rho: f64,
    alpha: f64,
    functional: Functional,
    cfg: &MCConfig,
) -> Result<ReweightResult> {
    let (kr, nu, _) = identity_indices(kappa, rho, alpha)?;
    let rho_bar = bar_rho(kappa, rho, alpha)?;
    let kr_bar = KappaRho::new(kappa, rho_bar)?;
    kr_bar.require_non_hitting()?;
    let mu = kr_bar.nu();
    let sk = kappa.sqrt();
    let x = cfg.start / sk;
    let grid = cfg.grid()?;

    let direct_sampler = BesselSampler::new(BesselSpec::new(kr_bar.dimension(), x)?, Scheme::LogEuler)?;
    let direct = block_moments(cfg.n_paths, derive_seed(cfg.seed, 11), |rng| {
        functional.eval(sk * direct_sampler.terminal(&grid, rng).0)
    });

    let base = BesselSampler::new(BesselSpec::new(kr.dimension(), x)?, Scheme::LogEuler)?;
    let blocks = run_blocks(cfg.n_paths, derive_seed(cfg.seed, 12), |_, rng, count| {
        let mut r = RatioMoments::default();
        for _ in 0..count {
            let (xt, acc) = base.terminal(&grid, rng);
            let w = girsanov_log_weight(x, xt, acc.inv_sq, nu, mu).exp();
            r.push(w, functional.eval(sk * xt));
        }
        r
    });
    let reweighted = pairwise_reduce(blocks, RatioMoments::merge)
        .unwrap_or_default()
        .ratio_estimate();
    Ok(ReweightResult {
        kappa,
        rho,
        alpha,
        rho_bar,
        a: cfg.start,
        functional: functional.id(),
        z: z_score(&direct, &reweighted),
        direct,
        reweighted,
    })
}

/// Weighted least-squares fit of log p̂ against log scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub scales: Vec<f64>,
    pub probabilities: Vec<Estimate>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

/// Fits log p̂ = c + s·log(scale) with weights p̂²/stderr² (delta method).
/// If any stderr is zero the points are weighted equally and the slope
/// error comes from the residuals.
pub fn estimate_decay(scales: &[f64], probabilities: &[Estimate]) -> Result<DecayFit> {
    let fit = fit_log_log(scales, probabilities)?;
    let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 10.0 - 1e-9 {
        return Err(Error::Usage("scales must span at least one decade".into()));
    }
    Ok(fit)
}

/// The regression behind [`estimate_decay`], for windows of any width.
pub fn fit_log_log(scales: &[f64], probabilities: &[Estimate]) -> Result<DecayFit> {
    if scales.len() != probabilities.len() {
        return Err(Error::Usage("scales and probabilities differ in length".into()));
    }
    if scales.len() < 3 {
        return Err(Error::Usage("a decay fit needs at least three scales".into()));
    }
    if let Some(s) = scales.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::domain("scale", *s, "requires positive scales"));
    }
    if let Some(p) = probabilities.iter().find(|p| !(p.mean > 0.0)) {
        return Err(Error::domain("p", p.mean, "requires every p̂ > 0"));
    }
    let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = probabilities.iter().map(|p| p.mean.ln()).collect();
    let weighted = probabilities.iter().all(|p| p.stderr > 0.0);
    let ws: Vec<f64> = if weighted {
        probabilities
            .iter()
            .map(|p| (p.mean / p.stderr).powi(2))
            .collect()
    } else {
        vec![1.0; xs.len()]
    };
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = ws
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (xs.len() - 2) as f64 / sxx).sqrt()
    };
    Ok(DecayFit {
        scales: scales.to_vec(),
        probabilities: probabilities.to_vec(),
        slope,
        slope_stderr,
        intercept,
    })
}

/// Result of [`identity_decay`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityDecayResult {
    pub kappa: f64,
    pub rho: f64,
    pub alpha: f64,
    pub fit: DecayFit,
    /// Slope of the closed-form values over the same scales.
    pub exact_slope: f64,
    pub exact_values: Vec<f64>,
    pub target: f64,
    /// Largest |lhs − exact| over the scales, in units of the lhs stderr.
    pub max_bias_z: f64,
}

impl IdentityDecayResult {
    /// One row per start gap; `exact` is the closed-form value at that gap.
    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        self.fit
            .scales
            .iter()
            .zip(&self.fit.probabilities)
            .zip(&self.exact_values)
            .map(|((a, p), exact)| {
                Record::new(
                    "decay",
                    &[
                        ("kappa", self.kappa),
                        ("rho", self.rho),
                        ("alpha", self.alpha),
                        ("a", *a),
                        ("exact", *exact),
                        ("target_slope", self.target),
                    ],
                    *p,
                    cfg,
                )
            })
            .collect()
    }
}

/// Fits the decay of E[g_T′(0)^α] over start gaps `a_list`.
pub fn identity_decay(kappa: f64, rho: f64, alpha: f64, a_list: &[f64], cfg: &MCConfig) -> Result<IdentityDecayResult> {
    let mut lhs = Vec::with_capacity(a_list.len());
    let mut exact = Vec::with_capacity(a_list.len());
    let mut max_bias_z: f64 = 0.0;
    for (i, &a) in a_list.iter().enumerate() {
        let r = verify_bessel_identity(kappa, rho, alpha, a, &cfg.with_seed(derive_seed(cfg.seed, 100 + i as u64)))?;
        max_bias_z = max_bias_z.max(r.z_lhs_exact);
        lhs.push(r.lhs);
        exact.push(r.exact);
    }
    let fit = estimate_decay(a_list, &lhs)?;
    let exact_est: Vec<Estimate> = exact.iter().map(|v| Estimate::exact(*v, 0)).collect();
    let exact_slope = estimate_decay(a_list, &exact_est)?.slope;
    Ok(IdentityDecayResult {
        kappa,
        rho,
        alpha,
        fit,
        exact_slope,
        exact_values: exact,
        target: bar_sigma(kappa, rho, alpha)?,
        max_bias_z,
    })
}

/// One coarse step of a streamed SLE(κ,ρ): Bessel coordinate X and force
/// point O at both ends.
#[derive(Debug, Clone, Copy)]
struct SleStep {
    k: usize,
    h: f64,
    from: (f64, f64),
    to: (f64, f64),
}

/// Streams an SLE(κ,ρ) from (0, a) one grid step at a time until `f`
/// breaks or the grid ends. O is the Bessel-integrated force point.
fn drive_sle(
    sampler: &BesselSampler,
    grid: &TimeGrid,
    kappa: f64,
    rng: &mut Rng,
    mut f: impl FnMut(SleStep) -> ControlFlow<()>,
) {
    let sk = kappa.sqrt();
    let mut acc = PathIntegrals::default();
    let mut from = (sampler.spec().x0(), 0.0);
    for k in 0..grid.steps() {
        let h = grid.step(k);
        let x = sampler.advance(from.0, h, rng, &mut acc);
        let to = (x, -2.0 / sk * acc.inv);
        if f(SleStep { k: k + 1, h, from, to }).is_break() {
            return;
        }
        from = to;
    }
}

const BRIDGE_REACH: f64 = 4.0;
const BRIDGE_DEPTH: u32 = 40;
/// Image-plane distance below which the hull counts as touching A.
const CONTACT: f64 = 1e-6;

/// Feeds one coarse step to `tracker`, halving it with Brownian-bridge
/// midpoints of X while the step reaches close to the image of A.
fn advance_tracker(tracker: &mut SlitTracker, step: SleStep, bridge: &mut Rng) -> Result<StepOutcome> {
    let sk = KAPPA_83.sqrt();
    fn go(
        tr: &mut SlitTracker,
        sk: f64,
        from: (f64, f64),
        to: (f64, f64),
        h: f64,
        depth: u32,
        bridge: &mut Rng,
    ) -> Result<StepOutcome> {
        let w = to.1 + sk * to.0;
        let dist = tr.arc_distance();
        if dist < CONTACT {
            return Ok(StepOutcome::Hit);
        }
        let reach = h.sqrt() + (w - tr.root()).abs();
        if depth < BRIDGE_DEPTH && dist < BRIDGE_REACH * reach {
            let z: f64 = bridge.sample(StandardNormal);
            let mid = ((0.5 * (from.0 + to.0) + 0.5 * h.sqrt() * z).abs(), 0.5 * (from.1 + to.1));
            if go(tr, sk, from, mid, 0.5 * h, depth + 1, bridge)? == StepOutcome::Hit {
                return Ok(StepOutcome::Hit);
            }
            return go(tr, sk, mid, to, 0.5 * h, depth + 1, bridge);
        }
        tr.step(w, h)
    }
    go(tracker, sk, step.from, step.to, step.h, 0, bridge)
}

fn sle_sampler(rho: f64, a: f64) -> Result<(KappaRho, BesselSampler)> {
    let kr = KappaRho::new(KAPPA_83, rho)?;
    kr.require_non_hitting()?;
    if !(a > 0.0) {
        return Err(Error::domain("a", a, "requires a > 0"));
    }
    let sampler = BesselSampler::new(BesselSpec::new(kr.dimension(), a / KAPPA_83.sqrt())?, Scheme::LogEuler)?;
    Ok((kr, sampler))
}

/// Result of [`verify_restriction`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionResult {
    pub rho: f64,
    pub hull: (f64, f64),
    pub a: f64,
    /// Fraction of paths whose hull avoided A up to T.
    pub p_hat: Estimate,
    /// φ_A′(0)^η̄(8/3,ρ), the a → 0 value.
    pub target: f64,
    /// M_0 at the actual start gap.
    pub m0: f64,
    /// Survival fraction at T/4, T/2 and T, showing the truncation trend.
    pub trend: Vec<(f64, Estimate)>,
    pub warnings: Vec<String>,
    pub geometry_failures: u64,
}

impl RestrictionResult {
    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        self.trend
            .iter()
            .map(|(t, e)| {
                Record::new(
                    "restriction",
                    &[
                        ("rho", self.rho),
                        ("x", self.hull.0),
                        ("y", self.hull.1),
                        ("a", self.a),
                        ("t", *t),
                        ("target", self.target),
                        ("m0", self.m0),
                    ],
                    *e,
                    cfg,
                )
            })
            .collect()
    }
}

/// M_0 for SLE(8/3, ρ) from (0, a) and hull A.
pub fn initial_martingale(rho: f64, hull: &SlitHull, a: f64) -> Result<f64> {
    martingale_m(&HQuantities::initial(hull, a, 0.0)?, a, 0.0, rho)
}

/// Probability that SLE(8/3, ρ) from (0, a) avoids the slit A before T,
/// compared with φ_A′(0)^η̄. The hull is followed forward in the Loewner
/// chain and each step's slit is tested against the image of A.
pub fn verify_restriction(rho: f64, hull: &SlitHull, a: f64, cfg: &MCConfig) -> Result<RestrictionResult> {
    let (_, sampler) = sle_sampler(rho, a)?;
    let grid = cfg.grid()?;
    let checkpoints: Vec<usize> = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| grid.index_of(f * grid.t_end()).max(1))
        .collect();
    let mut warnings = Vec::new();
    if hull.x < 10.0 * a {
        warnings.push(format!("slit foot x = {} is closer than 10a to the start", hull.x));
    }
    if 2.0 * grid.t_end().sqrt() < 10.0 * hull.x.hypot(hull.y) {
        warnings.push("hull radius 2√T is below ten times the slit extent".into());
    }
    let arc_points = cfg.arc_points;
    let hit_rule = cfg.hit_rule;
    let blocks = run_blocks(cfg.n_paths, derive_seed(cfg.seed, 21), |_, rng, count| {
        let mut survivals = vec![Moments::default(); checkpoints.len()];
        let mut failures = 0u64;
        for _ in 0..count {
            let mut tracker = SlitTracker::new(*hull, arc_points, a).with_rule(hit_rule);
            let mut first_hit = usize::MAX;
            let mut failed = false;
            let mut bridge = Rng::seed_from_u64(rng.random());
            drive_sle(&sampler, &grid, KAPPA_83, rng, |st| match advance_tracker(&mut tracker, st, &mut bridge) {
                Ok(StepOutcome::Clear) => ControlFlow::Continue(()),
                Ok(StepOutcome::Hit) => {
                    first_hit = st.k;
                    ControlFlow::Break(())
                }
                Err(_) => {
                    failed = true;
                    ControlFlow::Break(())
                }
            });
            if failed {
                failures += 1;
                continue;
            }
            for (m, &c) in survivals.iter_mut().zip(&checkpoints) {
                m.push((first_hit > c) as u8 as f64);
            }
        }
        (survivals, failures)
    });
    let failures: u64 = blocks.iter().map(|b| b.1).sum();
    let merged = pairwise_reduce(blocks, |a, b| {
        (
            a.0.iter().zip(&b.0).map(|(x, y)| x.merge(y)).collect::<Vec<_>>(),
            a.1 + b.1,
        )
    })
    .expect("at least one block");
    let trend: Vec<(f64, Estimate)> = checkpoints
        .iter()
        .zip(&merged.0)
        .map(|(&c, m)| (grid.times()[c], m.estimate()))
        .collect();
    check_failure_rate(failures, cfg.n_paths)?;
    Ok(RestrictionResult {
        rho,
        hull: (hull.x, hull.y),
        a,
        p_hat: trend.last().unwrap().1,
        target: slit_phi_prime_at_zero(hull).powf(bar_eta(KAPPA_83, rho)?),
        m0: initial_martingale(rho, hull, a)?,
        trend,
        warnings,
        geometry_failures: failures,
    })
}

fn check_failure_rate(failures: u64, n: u64) -> Result<()> {
    if failures * 100 > n {
        return Err(Error::InvalidExperiment(format!(
            "conformal tracking failed on {failures} of {n} paths"
        )));
    }
    Ok(())
}

/// One checkpoint of [`martingale_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingalePoint {
    pub t: f64,
    pub mean_m: Estimate,
    pub m0: f64,
    pub z: f64,
    /// Fraction of paths whose hull met A by time t.
    pub hit_fraction: f64,
}

/// Result of [`martingale_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleResult {
    pub rho: f64,
    pub hull: (f64, f64),
    pub a: f64,
    pub points: Vec<MartingalePoint>,
    pub max_m: f64,
    pub geometry_failures: u64,
}

impl MartingaleResult {
    pub fn max_z(&self) -> f64 {
        self.points.iter().map(|p| p.z).fold(0.0, f64::max)
    }

    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        self.points
            .iter()
            .map(|p| {
                Record::new(
                    "martingale",
                    &[
                        ("rho", self.rho),
                        ("x", self.hull.0),
                        ("y", self.hull.1),
                        ("a", self.a),
                        ("t", p.t),
                        ("m0", p.m0),
                    ],
                    p.mean_m,
                    cfg,
                )
            })
            .collect()
    }
}

/// E[M_t] at each checkpoint for SLE(8/3, ρ) from (0, a). Paths whose hull
/// met A count as M = 0. h_t is rebuilt at every checkpoint by a zipper on
/// the tracked image of A.
pub fn martingale_check(
    rho: f64,
    hull: &SlitHull,
    a: f64,
    checkpoint_times: &[f64],
    cfg: &MCConfig,
) -> Result<MartingaleResult> {
    let (_, sampler) = sle_sampler(rho, a)?;
    if checkpoint_times.is_empty() {
        return Err(Error::Usage("no checkpoint times".into()));
    }
    let t_max = checkpoint_times.iter().cloned().fold(0.0, f64::max);
    if t_max > cfg.t_end + 1e-12 {
        return Err(Error::Usage("checkpoint beyond the configured horizon".into()));
    }
    let grid = MCConfig {
        t_end: t_max,
        ..cfg.clone()
    }
    .grid()?;
    let checkpoints: Vec<usize> = checkpoint_times.iter().map(|t| grid.index_of(*t)).collect();
    let m0 = initial_martingale(rho, hull, a)?;
    let min_len = 0.005 * hull.y.max(hull.x);
    let arc_points = cfg.arc_points;
    let hit_rule = cfg.hit_rule;

    #[derive(Clone)]
    struct Acc {
        m: Vec<Moments>,
        hits: Vec<u64>,
        failures: u64,
        max_m: f64,
    }
    let blocks = run_blocks(cfg.n_paths, derive_seed(cfg.seed, 31), |_, rng, count| {
        let nc = checkpoints.len();
        let mut acc = Acc {
            m: vec![Moments::default(); nc],
            hits: vec![0; nc],
            failures: 0,
            max_m: 0.0,
        };
        let mut values = vec![0.0; nc];
        for _ in 0..count {
            let mut tracker = SlitTracker::new(*hull, arc_points, a).with_rule(hit_rule);
            let mut hit = false;
            let mut failed = false;
            for (v, &c) in values.iter_mut().zip(&checkpoints) {
                if c == 0 {
                    *v = m0;
                }
            }
            let mut bridge = Rng::seed_from_u64(rng.random());
            drive_sle(&sampler, &grid, KAPPA_83, rng, |st| {
                let (k, o) = (st.k, st.to.1);
                let w = o + KAPPA_83.sqrt() * st.to.0;
                match advance_tracker(&mut tracker, st, &mut bridge) {
                    Ok(StepOutcome::Clear) => {}
                    Ok(StepOutcome::Hit) => {
                        hit = true;
                        return ControlFlow::Break(());
                    }
                    Err(_) => {
                        failed = true;
                        return ControlFlow::Break(());
                    }
                }
                for (v, &c) in values.iter_mut().zip(&checkpoints) {
                    if c == k {
                        match tracker
                            .h_quantities(w, o, min_len)
                            .and_then(|q| martingale_m(&q, w, o, rho))
                        {
                            Ok(m) => *v = m,
                            Err(_) => {
                                failed = true;
                                return ControlFlow::Break(());
                            }
                        }
                    }
                }
                ControlFlow::Continue(())
            });
            if failed {
                acc.failures += 1;
                continue;
            }
            // checkpoints after a hit keep M = 0
            for (i, &v) in values.iter().enumerate() {
                acc.max_m = acc.max_m.max(v);
                if hit && v == 0.0 {
                    acc.hits[i] += 1;
                }
                acc.m[i].push(v);
            }
            values.iter_mut().for_each(|v| *v = 0.0);
        }
        acc
    });
    let merged = pairwise_reduce(blocks, |a, b| Acc {
        m: a.m.iter().zip(&b.m).map(|(x, y)| x.merge(y)).collect(),
        hits: a.hits.iter().zip(&b.hits).map(|(x, y)| x + y).collect(),
        failures: a.failures + b.failures,
        max_m: a.max_m.max(b.max_m),
    })
    .expect("at least one block");
    check_failure_rate(merged.failures, cfg.n_paths)?;
    let done = cfg.n_paths - merged.failures;
    let points = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let e = merged.m[i].estimate();
            MartingalePoint {
                t: grid.times()[c],
                mean_m: e,
                m0,
                z: e.z_target(m0),
                hit_fraction: merged.hits[i] as f64 / done.max(1) as f64,
            }
        })
        .collect();
    Ok(MartingaleResult {
        rho,
        hull: (hull.x, hull.y),
        a,
        points,
        max_m: merged.max_m,
        geometry_failures: merged.failures,
    })
}

/// Result of [`brownian_hiding_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HidingResult {
    pub n: u32,
    pub m: u32,
    pub fit: DecayFit,
    /// The decay exponent, minus the fitted slope.
    pub exponent: f64,
    pub target: f64,
    pub survival: Vec<Estimate>,
}

impl HidingResult {
    pub fn records(&self, cfg: &MCConfig) -> Vec<Record> {
        self.fit
            .scales
            .iter()
            .zip(&self.fit.probabilities)
            .map(|(r, p)| {
                Record::new(
                    "brownian_hiding",
                    &[("n_hidden", self.n as f64), ("m_hiding", self.m as f64), ("R", *r)],
                    *p,
                    cfg,
                )
            })
            .collect()
    }
}

/// Outcome of one hiding sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HidingSample {
    Killed,
    Visible,
    Hidden,
}

/// A Gaussian walk from i, stopped on reaching height `r`; `None` if it
/// leaves the upper half-plane first.
fn walk_to_height(r: f64, step: f64, rng: &mut Rng) -> Option<Vec<(f64, f64)>> {
    let (mut x, mut y) = (0.0f64, 1.0f64);
    let mut pts = vec![(x, y)];
    while y < r {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        x += step * dx;
        y += step * dy;
        if y < 0.0 {
            return None;
        }
        pts.push((x, y));
    }
    Some(pts)
}

/// Raster test: flood-fill the free cells of the strip 1 ≤ Im ≤ r from its
/// right edge; the sample is hidden if no reached cell touches a cell that
/// only the first `n` walks occupy.
fn raster_hidden(walks: &[Vec<(f64, f64)>], n: usize, r: f64, cell: f64) -> bool {
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in walks {
        for &(x, _) in w {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
    }
    let x0 = xmin - 3.0 * cell;
    let cols = ((xmax + 3.0 * cell - x0) / cell).ceil() as usize + 1;
    let y0 = 1.0;
    let rows = ((r - y0) / cell).ceil() as usize + 1;
    // 1 = hider, 2 = hidden candidate
    let mut occ = vec![0u8; rows * cols];
    let mut mark = |pts: &[(f64, f64)], bit: u8| {
        let mut paint = |i: i64, j: i64| {
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < rows && (jj as usize) < cols {
                        occ[ii as usize * cols + jj as usize] |= bit;
                    }
                }
            }
        };
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            let sub = (len / (0.5 * cell)).ceil().max(1.0) as usize;
            for s in 0..=sub {
                let u = s as f64 / sub as f64;
                let (x, y) = (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1));
                if y < y0 - cell || y > r + cell {
                    continue;
                }
                paint(((y - y0) / cell).floor() as i64, ((x - x0) / cell).floor() as i64);
            }
        }
    };
    for (k, w) in walks.iter().enumerate() {
        mark(w, if k < n { 2 } else { 1 });
    }
    let mut seen = vec![false; rows * cols];
    let mut queue = VecDeque::new();
    for i in 0..rows {
        let idx = i * cols + cols - 1;
        if occ[idx] == 0 {
            seen[idx] = true;
            queue.push_back((i, cols - 1));
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        let nbrs = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (ii, jj) in nbrs {
            if ii >= rows || jj >= cols {
                continue;
            }
            let idx = ii * cols + jj;
            match occ[idx] {
                0 if !seen[idx] => {
                    seen[idx] = true;
                    queue.push_back((ii, jj));
                }
                2 => return false,
                _ => {}
            }
        }
    }
    true
}

/// Draws one sample of n + m walks and classifies it.
pub fn hiding_sample(n: u32, m: u32, r: f64, step: f64, cell: f64, rng: &mut Rng) -> HidingSample {
    let mut walks = Vec::with_capacity((n + m) as usize);
    for _ in 0..n + m {
        match walk_to_height(r, step, rng) {
            Some(w) => walks.push(w),
            None => return HidingSample::Killed,
        }
    }
    if raster_hidden(&walks, n as usize, r, cell) {
        HidingSample::Hidden
    } else {
        HidingSample::Visible
    }
}

/// Decay in R of the probability that n + m walks from i reach height R in
/// the upper half-plane and the first n are hidden from +∞ by the other m.
pub fn brownian_hiding_experiment(n: u32, m: u32, r_list: &[f64], cfg: &MCConfig) -> Result<HidingResult> {
    if n == 0 || m == 0 {
        return Err(Error::Usage("hiding needs n ≥ 1 and m ≥ 1".into()));
    }
    if r_list.windows(2).any(|w| w[1] <= w[0]) || r_list.first().is_some_and(|r| *r <= 1.0) {
        return Err(Error::Usage("R values must increase and exceed 1".into()));
    }
    cfg.validate()?;
    let cell = cfg.raster_cell();
    if cell < cfg.bm_step {
        return Err(Error::Usage(format!(
            "raster cell {cell} is finer than the walk step {}",
            cfg.bm_step
        )));
    }
    let mut probs = Vec::with_capacity(r_list.len());
    let mut survival = Vec::with_capacity(r_list.len());
    for (i, &r) in r_list.iter().enumerate() {
        let blocks = run_blocks(cfg.n_paths, derive_seed(cfg.seed, 41 + i as u64), |_, rng, count| {
            let (mut hidden, mut alive) = (Moments::default(), Moments::default());
            for _ in 0..count {
                let s = hiding_sample(n, m, r, cfg.bm_step, cell, rng);
                hidden.push((s == HidingSample::Hidden) as u8 as f64);
                alive.push((s != HidingSample::Killed) as u8 as f64);
            }
            (hidden, alive)
        });
        let (hidden, alive) = pairwise_reduce(blocks, |a, b| (a.0.merge(&b.0), a.1.merge(&b.1))).unwrap();
        probs.push(hidden.estimate());
        survival.push(alive.estimate());
    }
    let fit = fit_log_log(r_list, &probs)?;
    Ok(HidingResult {
        n,
        m,
        exponent: -fit.slope,
        target: bm_hiding_real(n as f64, m as f64)?,
        fit,
        survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n: u64) -> MCConfig {
        MCConfig::new(n, 1e-3, 1.0, 5)
    }

    #[test]
    fn config_json_and_hash() {
        let cfg = MCConfig::from_json(r#"{"n_paths": 10, "seed": 3}"#).unwrap();
        assert_eq!(cfg.dt, 1e-4);
        assert_eq!(cfg.hit_rule, HitRule::TiltedSegment);
        assert_eq!(MCConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.config_hash().len(), 16);
        assert_eq!(cfg.config_hash(), cfg.clone().config_hash());
        assert_ne!(cfg.config_hash(), cfg.with_seed(4).config_hash());
        assert!(MCConfig::from_json(r#"{"n_paths": 0}"#).is_err());
        assert!(MCConfig::from_json(r#"{"n_paths": 5, "dt": 2.0}"#).is_err());
        assert!(MCConfig::from_json(r#"{"n_paths": 5, "grid_power": 0.5}"#).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = quick(4);
        let p = [("kappa", 2.0), ("rho", 0.0)];
        let recs = vec![
            Record::new("x", &p, Estimate::exact(0.5, 4), &cfg),
            Record::new("y", &p, Estimate::exact(0.25, 4), &cfg),
        ];
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,kappa,rho,estimate,stderr,n,seed,config_hash");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("y,2,0,0.25,0,4,5,"));
        let odd = vec![recs[0].clone(), Record::new("z", &[("a", 1.0)], Estimate::exact(1.0, 1), &cfg)];
        assert!(write_records_csv(&odd, Vec::new()).is_err());
        assert!(write_records_csv(&[], Vec::new()).is_err());
    }

    #[test]
    fn decay_fit_recovers_power_law() {
        let scales = [0.02, 0.05, 0.1, 0.2];
        let exact: Vec<Estimate> = scales.iter().map(|a: &f64| Estimate::exact(3.0 * a.powf(0.75), 0)).collect();
        let fit = estimate_decay(&scales, &exact).unwrap();
        assert!((fit.slope - 0.75).abs() < 1e-10);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        let flat = vec![Estimate::exact(0.3, 0); 4];
        assert!(estimate_decay(&scales, &flat).unwrap().slope.abs() < 1e-12);
        // noisy points get inverse-variance weights
        let noisy: Vec<Estimate> = scales
            .iter()
            .map(|a| Estimate { mean: a.powf(0.5), stderr: 0.01, n: 100 })
            .collect();
        let fit = estimate_decay(&scales, &noisy).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-10 && fit.slope_stderr > 0.0);
        assert!(estimate_decay(&[0.1, 0.2, 0.3], &exact[..3]).is_err());
        assert!(estimate_decay(&scales[..2], &exact[..2]).is_err());
        let mut zero = exact.clone();
        zero[1].mean = 0.0;
        assert!(estimate_decay(&scales, &zero).is_err());
    }

    #[test]
    fn identity_trivial_at_zero_alpha() {
        let r = verify_bessel_identity(8.0 / 3.0, 0.0, 0.0, 1.0, &quick(10)).unwrap();
        assert_eq!((r.lhs.mean, r.rhs.mean, r.z), (1.0, 1.0, 0.0));
        assert!((r.exact - 1.0).abs() < 1e-14);
        assert!(verify_bessel_identity(8.0 / 3.0, 0.0, -0.1, 1.0, &quick(10)).is_err());
        assert!(verify_bessel_identity(8.0 / 3.0, -2.0, 0.5, 1.0, &quick(10)).is_err());
    }

    #[test]
    fn identity_is_deterministic_and_close() {
        let cfg = quick(4000);
        let a = verify_bessel_identity(8.0 / 3.0, 0.0, 5.0 / 8.0, 1.0, &cfg).unwrap();
        let b = verify_bessel_identity(8.0 / 3.0, 0.0, 5.0 / 8.0, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.z < 4.0, "z = {}", a.z);
        assert!(a.rhs.z_target(a.exact) < 4.0);
    }

    #[test]
    fn functional_parsing() {
        assert_eq!(Functional::parse("indicator:1").unwrap(), Functional::IndicatorY(1.0));
        assert_eq!(Functional::parse("min:0.5").unwrap().id(), "min:0.5");
        assert!(Functional::parse("max:1").is_err());
        assert!(Functional::parse("min").is_err());
        assert_eq!(Functional::MinY(2.0).eval(3.0), 2.0);
        assert_eq!(Functional::IndicatorY(2.0).eval(1.0), 0.0);
    }

    #[test]
    fn reweighting_trivial_at_zero_alpha() {
        let r = importance_sampling_check(8.0 / 3.0, 0.0, 0.0, Functional::IndicatorY(1.0), &quick(500)).unwrap();
        assert_eq!(r.rho_bar, 0.0);
        assert!(r.z < 4.0);
    }

    #[test]
    fn hiding_event_implies_survival() {
        let cfg = MCConfig { bm_step: 0.05, ..quick(400) };
        let r = brownian_hiding_experiment(1, 3, &[1.5, 2.0, 2.5], &cfg).unwrap();
        for (h, s) in r.fit.probabilities.iter().zip(&r.survival) {
            assert!(h.mean <= s.mean);
        }
        assert!(brownian_hiding_experiment(0, 1, &[2.0, 3.0, 4.0], &cfg).is_err());
        assert!(brownian_hiding_experiment(1, 1, &[3.0, 2.0, 4.0], &cfg).is_err());
        let coarse = MCConfig { raster_h: Some(0.01), ..cfg };
        assert!(brownian_hiding_experiment(1, 1, &[2.0, 3.0, 4.0], &coarse).is_err());
    }

    #[test]
    fn hider_labels_are_exchangeable() {
        // the same walks classified with different paths playing the hidden role
        let mut rng = crate::mc::stream(9, 0);
        let (mut first, mut last, mut total) = (0u32, 0u32, 0u32);
        while total < 3000 {
            let walks: Option<Vec<_>> = (0..3).map(|_| walk_to_height(2.0, 0.05, &mut rng)).collect();
            let Some(mut walks) = walks else { continue };
            total += 1;
            first += raster_hidden(&walks, 1, 2.0, 0.1) as u32;
            walks.rotate_left(2);
            last += raster_hidden(&walks, 1, 2.0, 0.1) as u32;
        }
        let (p, q) = (first as f64 / total as f64, last as f64 / total as f64);
        let se = (p * (1.0 - p) / total as f64).sqrt() * 2f64.sqrt();
        assert!((p - q).abs() < 4.0 * se, "{p} vs {q}");
    }

    #[test]
    fn flat_slit_is_never_hit() {
        let hull = SlitHull::new(1.0, 1e-6).unwrap();
        let cfg = MCConfig::new(200, 2e-3, 1.0, 1);
        let r = verify_restriction(0.0, &hull, 0.01, &cfg).unwrap();
        assert!(r.p_hat.mean >= 0.99, "{:?}", r.p_hat);
        assert!((r.target - 1.0).abs() < 1e-6);
    }

    #[test]
    fn martingale_at_time_zero_is_exact() {
        let hull = SlitHull::new(1.0, 1.0).unwrap();
        let cfg = MCConfig::new(50, 1e-3, 0.05, 2);
        let r = martingale_check(2.0, &hull, 0.1, &[0.0, 0.05], &cfg).unwrap();
        assert_eq!(r.points[0].mean_m.mean, r.points[0].m0);
        assert_eq!(r.points[0].mean_m.stderr, 0.0);
        assert!(r.max_m <= 1.0 + 1e-9);
    }

    #[test]
    fn failure_rate_threshold() {
        assert!(check_failure_rate(1, 100).is_ok());
        assert!(matches!(check_failure_rate(2, 100), Err(Error::InvalidExperiment(_))));
    }
}
