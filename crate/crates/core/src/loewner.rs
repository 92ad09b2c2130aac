//! Chordal Loewner chains driven by SLE(κ,ρ) triples.
//!
//! The chain is discretized by freezing the driving function on each grid
//! step, so that step j maps out the vertical slit [W_j, W_j + 2i√Δt_j]:
//!
//!   f_j(z) = W_j + √((z − W_j)² + 4Δt_j).
//!
//! The force point starts at `start_o` and moves by Ȯ = 2/(O − W), so it is
//! decreasing while W − O = Y > 0.

use std::io::Write;

use num_complex::Complex64;

use crate::bessel::{BesselPath, BesselSpec};
use crate::error::{Error, Result};
use crate::exponents::KappaRho;

/// Square root of `sq` with nonnegative imaginary part. For a real positive
/// `sq` the sign follows `side`, the real part of z − W in the caller.
#[inline]
pub(crate) fn upper_sqrt(sq: Complex64, side: f64) -> Complex64 {
    let (a, b) = (sq.re, sq.im);
    if b == 0.0 {
        return if a >= 0.0 {
            Complex64::new(a.sqrt().copysign(side), 0.0)
        } else {
            Complex64::new(0.0, (-a).sqrt())
        };
    }
    let t = ((a.abs() + a.hypot(b)) * 0.5).sqrt();
    let (re, im) = if a >= 0.0 {
        (t, b / (2.0 * t))
    } else {
        (b.abs() / (2.0 * t), t.copysign(b))
    };
    if im < 0.0 {
        Complex64::new(-re, -im)
    } else {
        Complex64::new(re, im)
    }
}

/// Maps out the vertical slit of capacity `dt` rooted at `w`.
#[inline]
pub fn slit_forward(z: Complex64, w: f64, dt: f64) -> Complex64 {
    let d = z - w;
    w + upper_sqrt(d * d + 4.0 * dt, d.re)
}

/// Inverse of [`slit_forward`]: sends the half-plane onto its complement of the slit.
#[inline]
pub fn slit_inverse(u: Complex64, w: f64, dt: f64) -> Complex64 {
    let d = u - w;
    w + upper_sqrt(d * d - 4.0 * dt, d.re)
}

/// Derivative of [`slit_forward`] at `z`.
#[inline]
pub fn slit_forward_derivative(z: Complex64, w: f64, dt: f64) -> Complex64 {
    let d = z - w;
    d / upper_sqrt(d * d + 4.0 * dt, d.re)
}

/// SLE(κ,ρ) started from (o, w) with o ≤ w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleRhoSpec {
    pub kr: KappaRho,
    pub start_o: f64,
    pub start_w: f64,
}

impl SleRhoSpec {
    pub fn new(kr: KappaRho, start_o: f64, start_w: f64) -> Result<Self> {
        if !(start_w >= start_o) {
            return Err(Error::domain("start_w", start_w, "requires start_o ≤ start_w"));
        }
        Ok(SleRhoSpec { kr, start_o, start_w })
    }

    /// Started from (0, a).
    pub fn from_gap(kr: KappaRho, a: f64) -> Result<Self> {
        Self::new(kr, 0.0, a)
    }

    pub fn gap(&self) -> f64 {
        self.start_w - self.start_o
    }

    /// The Bessel process X = Y/√κ behind the driving gap.
    pub fn bessel_spec(&self) -> Result<BesselSpec> {
        BesselSpec::new(self.kr.dimension(), self.gap() / self.kr.kappa().sqrt())
    }
}

/// Driving triple (W, O, Y) on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    times: Vec<f64>,
    w: Vec<f64>,
    o: Vec<f64>,
    y: Vec<f64>,
    inv_sq_y: Vec<f64>,
}

impl DrivingPath {
    /// Builds the triple from a Bessel path: Y = √κ·X, O = start_o − ∫2ds/Y, W = O + Y.
    pub fn from_bessel(path: &BesselPath, kappa: f64, start_o: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain("kappa", kappa, "requires κ > 0"));
        }
        if path.is_empty() {
            return Err(Error::Usage("empty Bessel path".into()));
        }
        let sk = kappa.sqrt();
        let y: Vec<f64> = path.values.iter().map(|x| sk * x).collect();
        let o: Vec<f64> = path
            .inv_integral
            .iter()
            .map(|i| start_o - 2.0 / sk * i)
            .collect();
        let w = o.iter().zip(&y).map(|(o, y)| o + y).collect();
        let inv_sq_y = path.inv_sq_integral.iter().map(|v| v / kappa).collect();
        Ok(DrivingPath {
            times: path.times.clone(),
            w,
            o,
            y,
            inv_sq_y,
        })
    }

    /// A driving function given directly; O is integrated along it by the
    /// trapezoid rule on 1/Y² and the explicit midpoint for O.
    pub fn from_driving(times: Vec<f64>, w: Vec<f64>, start_o: f64) -> Result<Self> {
        if times.is_empty() || times.len() != w.len() {
            return Err(Error::Usage("times and W must have equal nonzero length".into()));
        }
        if !(w[0] > start_o) {
            return Err(Error::domain("start_o", start_o, "requires start_o < W_0"));
        }
        let n = times.len();
        let mut o = Vec::with_capacity(n);
        let mut inv_sq_y = Vec::with_capacity(n);
        o.push(start_o);
        inv_sq_y.push(0.0);
        for k in 1..n {
            let h = times[k] - times[k - 1];
            let prev = w[k - 1] - o[k - 1];
            let mid_o = o[k - 1] - h / prev;
            let mid_w = 0.5 * (w[k - 1] + w[k]);
            let next = o[k - 1] - 2.0 * h / (mid_w - mid_o);
            let gap = w[k] - next;
            if !(gap > 0.0) {
                return Err(Error::Swallowed {
                    step: k,
                    what: "force point reached the driving point".into(),
                });
            }
            o.push(next);
            inv_sq_y.push(inv_sq_y[k - 1] + 0.5 * h * (1.0 / (prev * prev) + 1.0 / (gap * gap)));
        }
        let y = w.iter().zip(&o).map(|(w, o)| w - o).collect();
        Ok(DrivingPath {
            times,
            w,
            o,
            y,
            inv_sq_y,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn o(&self) -> &[f64] {
        &self.o
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// ∫₀^{t_k} ds/Y_s².
    pub fn inv_sq_y(&self) -> &[f64] {
        &self.inv_sq_y
    }

    /// Duration of step j, from t_{j−1} to t_j (j ≥ 1).
    #[inline]
    pub fn dt(&self, j: usize) -> f64 {
        self.times[j] - self.times[j - 1]
    }

    /// The path over [t_k, T], with time reset to 0.
    pub fn tail_from(&self, k: usize) -> DrivingPath {
        let t0 = self.times[k];
        let s0 = self.inv_sq_y[k];
        DrivingPath {
            times: self.times[k..].iter().map(|t| t - t0).collect(),
            w: self.w[k..].to_vec(),
            o: self.o[k..].to_vec(),
            y: self.y[k..].to_vec(),
            inv_sq_y: self.inv_sq_y[k..].iter().map(|v| v - s0).collect(),
        }
    }

    /// Brownian scaling: times by λ², space by λ.
    pub fn scaled(&self, lambda: f64) -> DrivingPath {
        let l2 = lambda * lambda;
        DrivingPath {
            times: self.times.iter().map(|t| t * l2).collect(),
            w: self.w.iter().map(|v| v * lambda).collect(),
            o: self.o.iter().map(|v| v * lambda).collect(),
            y: self.y.iter().map(|v| v * lambda).collect(),
            inv_sq_y: self.inv_sq_y.clone(),
        }
    }

    /// Writes the triple as CSV with header `t,W,O,Y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,W,O,Y")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.times[k], self.w[k], self.o[k], self.y[k]
            )?;
        }
        Ok(())
    }
}

/// Discretized SLE curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub points: Vec<Complex64>,
    pub capacities: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tip(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    /// True when no two non-adjacent polyline segments cross.
    pub fn is_simple(&self) -> bool {
        let p = &self.points;
        let n = p.len();
        if n < 4 {
            return true;
        }
        for i in 0..n - 1 {
            let (a, b) = (p[i], p[i + 1]);
            let (lo_x, hi_x) = (a.re.min(b.re), a.re.max(b.re));
            let (lo_y, hi_y) = (a.im.min(b.im), a.im.max(b.im));
            for j in i + 2..n - 1 {
                let (c, d) = (p[j], p[j + 1]);
                if c.re.max(d.re) < lo_x
                    || c.re.min(d.re) > hi_x
                    || c.im.max(d.im) < lo_y
                    || c.im.min(d.im) > hi_y
                {
                    continue;
                }
                if segments_cross(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Writes the curve as CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,re,im")?;
        for (t, z) in self.capacities.iter().zip(&self.points) {
            writeln!(out, "{},{},{}", t, z.re, z.im)?;
        }
        Ok(())
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper crossing of segments [a,b] and [c,d].
pub(crate) fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Trace points z_k = f_1⁻¹ ∘ … ∘ f_k⁻¹(W_k), with z_0 = W_0. Costs O(N²).
pub fn trace_from_driving(dp: &DrivingPath) -> Trace {
    let n = dp.len();
    let mut points = Vec::with_capacity(n);
    points.push(Complex64::new(dp.w[0], 0.0));
    for k in 1..n {
        let mut z = Complex64::new(dp.w[k], 0.0);
        for j in (1..=k).rev() {
            z = slit_inverse(z, dp.w[j], dp.dt(j));
        }
        points.push(z);
    }
    Trace {
        points,
        capacities: dp.times.clone(),
    }
}

/// g_t′ at the starting force point, which tracks O_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GDerivAtZero {
    pub value: f64,
}

/// exp(−2∫₀^{t_k} ds/Y²).
pub fn g_prime_at_zero(dp: &DrivingPath, upto: usize) -> Result<GDerivAtZero> {
    if upto >= dp.len() {
        return Err(Error::Usage(format!("index {upto} beyond path length")));
    }
    if let Some(k) = dp.y[..=upto].iter().skip(1).position(|y| !(*y > 0.0)) {
        return Err(Error::Swallowed {
            step: k + 1,
            what: "driving gap Y reached 0".into(),
        });
    }
    let v = dp.inv_sq_y[upto];
    Ok(GDerivAtZero {
        value: (-2.0 * v).exp(),
    })
}

/// g_{t_k}(z) by composing the forward slit maps of steps 1..=upto.
pub fn forward_map_eval(dp: &DrivingPath, z: Complex64, upto: usize) -> Result<Complex64> {
    if upto >= dp.len() {
        return Err(Error::Usage(format!("index {upto} beyond path length")));
    }
    let mut z = z;
    for j in 1..=upto {
        let w = dp.w[j];
        if z.im == 0.0 && z.re == w {
            return Err(Error::Swallowed {
                step: j,
                what: format!("point {z} met the driving point"),
            });
        }
        let next = slit_forward(z, w, dp.dt(j));
        if z.im > 0.0 && next.im <= 0.0 {
            return Err(Error::Swallowed {
                step: j,
                what: format!("point {z} lies on the slit"),
            });
        }
        z = next;
    }
    Ok(z)
}

/// Forward map and its derivative at `z`, by the chain rule.
pub fn forward_map_with_derivative(
    dp: &DrivingPath,
    z: Complex64,
    upto: usize,
) -> Result<(Complex64, Complex64)> {
    if upto >= dp.len() {
        return Err(Error::Usage(format!("index {upto} beyond path length")));
    }
    let mut z = z;
    let mut deriv = Complex64::new(1.0, 0.0);
    for j in 1..=upto {
        let (w, h) = (dp.w[j], dp.dt(j));
        let d = z - w;
        if d.norm_sqr() == 0.0 {
            return Err(Error::Swallowed {
                step: j,
                what: format!("point {z} met the driving point"),
            });
        }
        let root = upper_sqrt(d * d + 4.0 * h, d.re);
        deriv *= d / root;
        z = w + root;
    }
    Ok((z, deriv))
}
