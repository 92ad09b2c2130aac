//! Closed-form exponent calculus for SLE(κ, ρ) processes, one-sided and
//! two-sided restriction measures, and planar Brownian hiding events.
//!
//! Every function here is a composition of square roots and rational
//! functions evaluated directly in `f64`. Inputs outside the region where a
//! formula has meaning are rejected with [`Error::Domain`], naming the
//! constraint that failed.

use crate::error::{Error, Result};

/// κ = 8/3, the restriction-measure value of κ.
pub const KAPPA_RESTRICTION: f64 = 8.0 / 3.0;

const ONE_24: f64 = 1.0 / 24.0;

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be finite"))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    check_finite("kappa", kappa)?;
    if kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("kappa", kappa, "requires κ > 0"))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    check_finite("rho", rho)?;
    if rho > -2.0 {
        Ok(())
    } else {
        Err(Error::domain("rho", rho, "requires ρ > −2"))
    }
}

/// The parameter pair of an SLE(κ, ρ) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRho {
    kappa: f64,
    rho: f64,
}

/// Whether a formula's derivation needs a non-hitting Bessel process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentDomainFlag {
    pub requires_d_ge_2: bool,
}

impl KappaRho {
    pub fn new(kappa: f64, rho: f64) -> Result<Self> {
        check_kappa(kappa)?;
        check_rho(rho)?;
        Ok(Self { kappa, rho })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Bessel index ν = (ρ+2)/κ − 1/2.
    pub fn nu(&self) -> f64 {
        (self.rho + 2.0) / self.kappa - 0.5
    }

    /// Bessel dimension d = 1 + 2(ρ+2)/κ = 2 + 2ν.
    pub fn dimension(&self) -> f64 {
        1.0 + 2.0 * (self.rho + 2.0) / self.kappa
    }

    /// True when the driving Bessel process never hits 0 (d ≥ 2).
    pub fn is_non_hitting(&self) -> bool {
        self.rho >= -2.0 + self.kappa / 2.0
    }

    pub fn domain_flag(&self) -> ExponentDomainFlag {
        ExponentDomainFlag {
            requires_d_ge_2: !self.is_non_hitting(),
        }
    }

    pub fn require_non_hitting(&self) -> Result<()> {
        if self.is_non_hitting() {
            Ok(())
        } else {
            Err(Error::domain(
                "rho",
                self.rho,
                "requires d ≥ 2, i.e. ρ ≥ −2+κ/2",
            ))
        }
    }
}

/// U(a) = √(a + 1/24) − √(1/24).
pub fn u_map(a: f64) -> Result<f64> {
    check_finite("a", a)?;
    if a < 0.0 {
        return Err(Error::domain("a", a, "requires a ≥ 0"));
    }
    Ok((a + ONE_24).sqrt() - ONE_24.sqrt())
}

/// Two-sided inverse of [`u_map`] on [0, ∞).
pub fn u_inverse(y: f64) -> Result<f64> {
    check_finite("y", y)?;
    if y < 0.0 {
        return Err(Error::domain("y", y, "requires y ≥ 0"));
    }
    let s = y + ONE_24.sqrt();
    Ok(s * s - ONE_24)
}

/// Generalized half-plane intersection exponent U⁻¹(ΣU(aᵢ)).
pub fn cascade_xi(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Usage(
            "cascade_xi needs at least one argument".into(),
        ));
    }
    let mut total = 0.0;
    for &ai in a {
        total += u_map(ai)?;
    }
    u_inverse(total)
}

/// Closed form of the two-argument cascade, extended down to −1/24.
pub fn xi_pair(u: f64, alpha: f64) -> Result<f64> {
    check_finite("u", u)?;
    check_finite("alpha", alpha)?;
    if 24.0 * u + 1.0 < 0.0 {
        return Err(Error::domain("u", u, "requires u ≥ −1/24"));
    }
    if 24.0 * alpha + 1.0 < 0.0 {
        return Err(Error::domain("alpha", alpha, "requires α ≥ −1/24"));
    }
    let s = (24.0 * u + 1.0).sqrt() + (24.0 * alpha + 1.0).sqrt() - 1.0;
    Ok((s * s - 1.0) / 24.0)
}

/// Brownian loop-soup intensity that turns SLE_κ into a restriction sample.
pub fn bar_lambda(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa > KAPPA_RESTRICTION {
        return Err(Error::domain(
            "kappa",
            kappa,
            "loop-soup decoration requires κ ≤ 8/3",
        ));
    }
    Ok((8.0 - 3.0 * kappa) * (6.0 - kappa) / (12.0 * kappa))
}

/// Exponent of the restriction sample obtained by decorating SLE(κ, ρ).
pub fn bar_eta(kappa: f64, rho: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_rho(rho)?;
    Ok((rho + 2.0) * (rho + 6.0 - kappa) / (4.0 * kappa))
}

/// Exponent α such that SLE(κ, ρ) is SLE_κ conditioned to avoid a
/// one-sided restriction sample of exponent α.
pub fn bar_alpha(kappa: f64, rho: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_rho(rho)?;
    Ok(rho * (rho + 4.0 - kappa) / (4.0 * kappa))
}

/// Radicand 4α/κ + ν² shared by [`bar_rho`] and [`bar_sigma`].
fn conditioning_radicand(kappa: f64, rho: f64, alpha: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    check_rho(rho)?;
    check_finite("alpha", alpha)?;
    let nu = (rho + 2.0) / kappa - 0.5;
    let rad = 4.0 * alpha / kappa + nu * nu;
    if rad < 0.0 {
        return Err(Error::domain(
            "alpha",
            alpha,
            "reweighting not normalizable: requires 4α/κ + ((ρ+2)/κ − 1/2)² ≥ 0",
        ));
    }
    Ok((rad.sqrt(), nu))
}

/// ρ̄ of SLE(κ, ρ) conditioned to avoid a restriction sample of exponent α.
///
/// Only the normalizability of the reweighting is enforced here; callers
/// that simulate the process check `d ≥ 2` via [`KappaRho::require_non_hitting`].
pub fn bar_rho(kappa: f64, rho: f64, alpha: f64) -> Result<f64> {
    let (mu, _) = conditioning_radicand(kappa, rho, alpha)?;
    Ok(kappa * mu + kappa / 2.0 - 2.0)
}

/// Non-intersection exponent μ − ν between SLE(κ, ρ) and a restriction
/// sample of exponent α; equals `(bar_rho − ρ)/κ`.
pub fn bar_sigma(kappa: f64, rho: f64, alpha: f64) -> Result<f64> {
    let (mu, nu) = conditioning_radicand(kappa, rho, alpha)?;
    Ok(mu - nu)
}

/// Smallest α for which the SLE_κ reweighting stays normalizable.
pub fn min_alpha(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(-(4.0 - kappa).powi(2) / (16.0 * kappa))
}

/// Per-(κ, ρ) lower bound on α: −κν²/4. Coincides with [`min_alpha`] at ρ = 0.
pub fn min_alpha_for(kappa: f64, rho: f64) -> Result<f64> {
    let kr = KappaRho::new(kappa, rho)?;
    Ok(-kappa * kr.nu().powi(2) / 4.0)
}

/// Inverse of `bar_eta(8/3, ·)`: the ρ whose SLE(8/3, ρ) bounds a one-sided
/// restriction sample of exponent η.
pub fn rho_from_eta_83(eta: f64) -> Result<f64> {
    check_finite("eta", eta)?;
    if eta <= 0.0 {
        return Err(Error::domain("eta", eta, "requires η > 0"));
    }
    Ok((2.0 * (1.0 + 24.0 * eta).sqrt() - 8.0) / 3.0)
}

/// One-sided hiding exponent σ(η hides β), valid for every η > 0.
pub fn hide_one_sided(eta: f64, beta: f64) -> Result<f64> {
    check_finite("eta", eta)?;
    check_finite("beta", beta)?;
    if eta <= 0.0 {
        return Err(Error::domain("eta", eta, "requires η > 0"));
    }
    if beta < 0.0 {
        return Err(Error::domain("beta", beta, "requires β ≥ 0"));
    }
    let c = 3.0 - (1.0 + 24.0 * eta).sqrt();
    Ok(0.25 * ((24.0 * beta + c * c).sqrt() + c))
}

/// ρ* = κ − 4 − ρ: the SLE(κ, ρ) with d < 2 conditioned not to hit the
/// negative half-line.
pub fn dual_rho(kappa: f64, rho: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_rho(rho)?;
    let dual = kappa - 4.0 - rho;
    if dual <= -2.0 {
        return Err(Error::domain("rho", rho, "dual requires κ − 4 − ρ > −2"));
    }
    Ok(dual)
}

/// Exponent 2 − d of the probability that an SLE(κ, ρ) with d < 2 avoids
/// the negative half-line up to capacity 1.
pub fn escape_exponent(kappa: f64, rho: f64) -> Result<f64> {
    let kr = KappaRho::new(kappa, rho)?;
    if kr.is_non_hitting() {
        return Err(Error::domain(
            "rho",
            rho,
            "escape exponent requires d < 2, i.e. ρ < −2+κ/2",
        ));
    }
    Ok(2.0 - kr.dimension())
}

fn check_p(p: u32) -> Result<()> {
    if p == 0 {
        Err(Error::domain("p", 0.0, "requires p ≥ 1"))
    } else {
        Ok(())
    }
}

/// ρ of the right-most of p mutually avoiding SLEs: 2(p − 1).
pub fn rho_p(p: u32) -> Result<f64> {
    check_p(p)?;
    Ok(2.0 * (p as f64 - 1.0))
}

/// η_p = p(3p + 2)/8 for p mutually avoiding SLE_{8/3}'s.
pub fn eta_p_83(p: u32) -> Result<f64> {
    check_p(p)?;
    let p = p as f64;
    Ok(p * (3.0 * p + 2.0) / 8.0)
}

/// η_p(κ) = p(2p + 4 − κ)/(2κ).
pub fn eta_p_kappa(kappa: f64, p: u32) -> Result<f64> {
    check_kappa(kappa)?;
    check_p(p)?;
    let p = p as f64;
    Ok(p * (2.0 * p + 4.0 - kappa) / (2.0 * kappa))
}

/// Mutual-avoidance exponent p(p − 1)/κ.
pub fn mutual_avoid(kappa: f64, p: u32) -> Result<f64> {
    check_kappa(kappa)?;
    check_p(p)?;
    let p = p as f64;
    Ok(p * (p - 1.0) / kappa)
}

/// Two-sided hiding exponent τ(η hides β), η > 5/8, β ≥ 5/8.
pub fn hide_two_sided(eta: f64, beta: f64) -> Result<f64> {
    check_finite("eta", eta)?;
    check_finite("beta", beta)?;
    if eta <= 5.0 / 8.0 {
        return Err(Error::domain("eta", eta, "requires η > 5/8"));
    }
    if beta < 5.0 / 8.0 {
        return Err(Error::domain("beta", beta, "requires β ≥ 5/8"));
    }
    let c = (1.0 + 24.0 * eta).sqrt() - 6.0;
    Ok(((24.0 * beta + c * c).sqrt() - c) / 2.0)
}

fn check_cut_domain(eta: f64) -> Result<()> {
    check_finite("eta", eta)?;
    if eta <= 5.0 / 8.0 || eta > 35.0 / 24.0 {
        return Err(Error::domain("eta", eta, "requires 5/8 < η ≤ 35/24"));
    }
    Ok(())
}

/// Decay exponent of "no cut point across the strip": 6 − √(1 + 24η).
pub fn no_cut_delta(eta: f64) -> Result<f64> {
    check_cut_domain(eta)?;
    Ok(6.0 - (1.0 + 24.0 * eta).sqrt())
}

/// Exponent of the two-sided restriction measure conditioned to have no cut point.
pub fn eta_prime(eta: f64) -> Result<f64> {
    Ok(eta + no_cut_delta(eta)?)
}

/// Mixed two-sided hiding exponent τ̂(η, β); symmetric in its arguments.
pub fn mixed_hat_tau(eta: f64, beta: f64) -> Result<f64> {
    check_finite("eta", eta)?;
    check_finite("beta", beta)?;
    if eta < 5.0 / 8.0 {
        return Err(Error::domain("eta", eta, "requires η ≥ 5/8"));
    }
    if beta < 5.0 / 8.0 {
        return Err(Error::domain("beta", beta, "requires β ≥ 5/8"));
    }
    let b = (1.0 + 24.0 * beta).sqrt();
    let e = (1.0 + 24.0 * eta).sqrt();
    let rad = (b - 3.0).powi(2) + (e - 3.0).powi(2) - 1.0;
    Ok((9.0 - b - e + 2.0 * rad.sqrt()) / 4.0)
}

/// Radial hiding exponent ρ(n hides p).
pub fn radial_hide(n: f64, p: f64) -> Result<f64> {
    check_finite("n", n)?;
    check_finite("p", p)?;
    if n <= 0.0 {
        return Err(Error::domain("n", n, "requires n > 0"));
    }
    if p <= 0.0 {
        return Err(Error::domain("p", p, "requires p > 0"));
    }
    let c = (1.0 + 24.0 * n).sqrt() - 6.0;
    let s = (24.0 * p + c * c).sqrt() + 5.0;
    Ok((s * s - 4.0) / 48.0)
}

/// Exponent of n planar Brownian motions staying in the half-plane and
/// being hidden from +∞ by m others, for integer path counts.
pub fn bm_hiding(n: u32, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("m", 0.0, "requires m ≥ 1"));
    }
    bm_hiding_real(n as f64, m as f64)
}

/// Real-argument extension of [`bm_hiding`]. The event itself is only
/// defined for integer path counts; `n = 0` reduces to `m` once m ≥ 1/3.
pub fn bm_hiding_real(n: f64, m: f64) -> Result<f64> {
    check_finite("n", n)?;
    check_finite("m", m)?;
    if n < 0.0 {
        return Err(Error::domain("n", n, "requires n ≥ 0"));
    }
    if m <= 0.0 {
        return Err(Error::domain("m", m, "requires m > 0"));
    }
    let c = (1.0 + 24.0 * m).sqrt() - 3.0;
    Ok(n + m + 0.25 * ((24.0 * n + c * c).sqrt() - c))
}
