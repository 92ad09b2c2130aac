//! Explicit maps for vertical slit hulls, a zipper for discretized arcs, and
//! the quantities h_t(W), h_t(O), h_t′(W), h_t′(O) where h_t removes g_t(A).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::bar_alpha;
use crate::loewner::{segments_cross, slit_forward, upper_sqrt, DrivingPath};

/// The vertical segment A = [x, x + iy] with x > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitHull {
    pub x: f64,
    pub y: f64,
}

impl SlitHull {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain("x", x, "slit foot must lie on the positive axis"));
        }
        if !(y >= 0.0 && y.is_finite()) {
            return Err(Error::domain("y", y, "requires height y ≥ 0"));
        }
        Ok(SlitHull { x, y })
    }

    pub fn tip(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re == self.x && z.im >= 0.0 && z.im <= self.y
    }

    /// Branch of √((z−x)² + y²) asymptotic to z − x.
    fn root(&self, z: Complex64) -> Complex64 {
        let d = z - self.x;
        upper_sqrt(d * d + self.y * self.y, d.re)
    }

    /// The map removing A normalized as z + o(1) at infinity (no shift).
    pub fn map_unshifted(&self, z: Complex64) -> Result<Complex64> {
        if self.contains(z) && self.y > 0.0 {
            return Err(Error::OnBoundary(format!("{z}")));
        }
        Ok(self.x + self.root(z))
    }

    /// Derivative of the slit map at `z`.
    pub fn map_derivative(&self, z: Complex64) -> Result<Complex64> {
        if self.contains(z) && self.y > 0.0 {
            return Err(Error::OnBoundary(format!("{z}")));
        }
        Ok((z - self.x) / self.root(z))
    }
}

/// φ_A(z): removes A, fixes 0, and is z + O(1) at infinity.
pub fn slit_phi(a: &SlitHull, z: Complex64) -> Result<Complex64> {
    Ok(a.map_unshifted(z)? - a.map_unshifted(Complex64::new(0.0, 0.0))?)
}

/// φ_A′(0) = x/√(x²+y²).
pub fn slit_phi_prime_at_zero(a: &SlitHull) -> f64 {
    a.x / a.x.hypot(a.y)
}

/// A simple arc in the closed upper half-plane with its first point real.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPolyline {
    points: Vec<Complex64>,
}

impl ArcPolyline {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if let Some(first) = points.first() {
            if first.im != 0.0 {
                return Err(Error::Geometry(format!("arc foot {first} is not real")));
            }
        }
        if let Some(p) = points.iter().skip(1).find(|p| !(p.im > 0.0)) {
            return Err(Error::Geometry(format!("arc point {p} is not in the open half-plane")));
        }
        let n = points.len();
        for i in 0..n.saturating_sub(1) {
            for j in i + 2..n - 1 {
                if segments_cross(points[i], points[i + 1], points[j], points[j + 1]) {
                    return Err(Error::Geometry(format!(
                        "arc segments {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(ArcPolyline { points })
    }

    /// A sampled at `n` + 1 equally spaced heights.
    pub fn vertical(a: &SlitHull, n: usize) -> Result<Self> {
        let n = n.max(1);
        Self::new(
            (0..=n)
                .map(|k| Complex64::new(a.x, a.y * k as f64 / n as f64))
                .collect(),
        )
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.points {
            for b in &self.points {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Every other point, keeping both endpoints.
    pub fn coarsened(&self) -> ArcPolyline {
        let n = self.points.len();
        let mut pts: Vec<Complex64> = self.points.iter().step_by(2).copied().collect();
        if n > 1 && (n - 1) % 2 == 1 {
            pts.push(self.points[n - 1]);
        }
        ArcPolyline { points: pts }
    }
}

/// Composition of vertical-slit maps z ↦ r + √((z−r)² + s²), first step first.
/// Each factor is z + O(1/z) at infinity, so the chain is too.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapChain {
    steps: Vec<(f64, f64)>,
}

impl MapChain {
    pub fn identity() -> Self {
        MapChain::default()
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.steps.iter().fold(z, |z, &(r, s)| {
            let d = z - r;
            r + upper_sqrt(d * d + s * s, d.re)
        })
    }

    /// Value and derivative by the chain rule.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut z = z;
        let mut deriv = Complex64::new(1.0, 0.0);
        for &(r, s) in &self.steps {
            let d = z - r;
            let root = upper_sqrt(d * d + s * s, d.re);
            deriv *= d / root;
            z = r + root;
        }
        (z, deriv)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).1
    }
}

/// Peels the arc from its foot with vertical slits through successive points.
pub fn zipper_map_out(arc: &ArcPolyline) -> MapChain {
    let mut pts: Vec<Complex64> = arc.points.iter().skip(1).copied().collect();
    let mut steps = Vec::with_capacity(pts.len());
    for k in 0..pts.len() {
        let q = pts[k];
        let (r, s) = (q.re, q.im.max(0.0));
        steps.push((r, s));
        for p in &mut pts[k + 1..] {
            let d = *p - r;
            *p = r + upper_sqrt(d * d + s * s, d.re);
        }
    }
    MapChain { steps }
}

/// h(W), h(O) and the boundary derivatives h′(W), h′(O).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HQuantities {
    pub h_w: f64,
    pub h_o: f64,
    pub hp_w: f64,
    pub hp_o: f64,
}

impl HQuantities {
    pub fn from_chain(chain: &MapChain, w: f64, o: f64) -> Self {
        let (hw, dw) = chain.eval_with_derivative(Complex64::new(w, 0.0));
        let (ho, d_o) = chain.eval_with_derivative(Complex64::new(o, 0.0));
        HQuantities {
            h_w: hw.re,
            h_o: ho.re,
            hp_w: dw.re,
            hp_o: d_o.re,
        }
    }

    /// Zipper on the arc and on the arc with every other point dropped,
    /// combined by first-order Richardson extrapolation.
    pub fn from_arc(arc: &ArcPolyline, w: f64, o: f64) -> Self {
        let fine = Self::from_chain(&zipper_map_out(arc), w, o);
        if arc.len() < 5 {
            return fine;
        }
        let coarse = Self::from_chain(&zipper_map_out(&arc.coarsened()), w, o);
        let ex = |f: f64, c: f64| 2.0 * f - c;
        HQuantities {
            h_w: ex(fine.h_w, coarse.h_w),
            h_o: ex(fine.h_o, coarse.h_o),
            hp_w: ex(fine.hp_w, coarse.hp_w),
            hp_o: ex(fine.hp_o, coarse.hp_o),
        }
    }

    /// Exact values at time 0 from the explicit slit map.
    pub fn initial(a: &SlitHull, w: f64, o: f64) -> Result<Self> {
        let (w, o) = (Complex64::new(w, 0.0), Complex64::new(o, 0.0));
        Ok(HQuantities {
            h_w: a.map_unshifted(w)?.re,
            h_o: a.map_unshifted(o)?.re,
            hp_w: a.map_derivative(w)?.re,
            hp_o: a.map_derivative(o)?.re,
        })
    }
}

/// M = h′(O)^α · h′(W)^{5/8} · ((h(W) − h(O))/(W − O))^{3ρ/8} with α = ᾱ(8/3, ρ).
pub fn martingale_m(q: &HQuantities, w: f64, o: f64, rho: f64) -> Result<f64> {
    if !(w > o) {
        return Err(Error::Degenerate(format!("W = {w} does not exceed O = {o}")));
    }
    let alpha = bar_alpha(8.0 / 3.0, rho)?;
    let ratio = (q.h_w - q.h_o) / (w - o);
    if !(q.hp_w > 0.0 && q.hp_o > 0.0 && ratio > 0.0) {
        return Err(Error::Degenerate(format!("h-quantities out of range: {q:?}")));
    }
    let mut m = q.hp_w.powf(5.0 / 8.0);
    if alpha != 0.0 {
        m *= q.hp_o.powf(alpha);
    }
    if rho != 0.0 {
        m *= ratio.powf(3.0 * rho / 8.0);
    }
    Ok(m)
}

/// Which piece of the discrete hull a step adds, for hit testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HitRule {
    /// The vertical slit [W_j, W_j + 2i√Δt] that the step maps out.
    VerticalSlit,
    /// The segment from the previous driving value to the new slit tip, the
    /// image of the chord between consecutive trace points.
    #[default]
    TiltedSegment,
}

/// Follows the image g_t(A) of a slit hull under a discretized Loewner
/// chain, refining the sampled arc where it approaches the driving point and
/// reporting the first step whose hull piece meets it.
#[derive(Debug, Clone)]
pub struct SlitTracker {
    hull: SlitHull,
    params: Vec<f64>,
    images: Vec<Complex64>,
    history: Vec<(f64, f64)>,
    root: f64,
    rule: HitRule,
    refine_frac: f64,
    max_points: usize,
}

/// Outcome of one tracker step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Clear,
    Hit,
}

impl SlitTracker {
    /// Starts with `n` + 1 sample points on A and the driving point at `start_w`.
    pub fn new(hull: SlitHull, n: usize, start_w: f64) -> Self {
        let n = n.max(2);
        let params: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let images = params
            .iter()
            .map(|s| Complex64::new(hull.x, hull.y * s))
            .collect();
        SlitTracker {
            hull,
            params,
            images,
            history: Vec::new(),
            root: start_w,
            rule: HitRule::default(),
            refine_frac: 0.25,
            max_points: 1 << 14,
        }
    }

    pub fn with_rule(mut self, rule: HitRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_refine_fraction(mut self, frac: f64) -> Self {
        self.refine_frac = frac;
        self
    }

    pub fn images(&self) -> &[Complex64] {
        &self.images
    }

    /// Real point where the latest hull piece is rooted.
    pub fn root(&self) -> f64 {
        self.root
    }

    /// Distance from the current root to the image of A.
    pub fn arc_distance(&self) -> f64 {
        let p = Complex64::new(self.root, 0.0);
        self.images
            .windows(2)
            .map(|s| segment_distance(p, s[0], s[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn steps_taken(&self) -> usize {
        self.history.len()
    }

    pub fn arc(&self) -> Result<ArcPolyline> {
        ArcPolyline::new(self.images.clone())
    }

    fn image_of(&self, s: f64) -> Complex64 {
        let z = Complex64::new(self.hull.x, self.hull.y * s);
        self.history
            .iter()
            .fold(z, |z, &(w, h)| slit_forward(z, w, h))
    }

    /// Inserts sample points where the polyline is coarse relative to its
    /// distance from `w`.
    fn refine(&mut self, w: f64, min_len: f64) -> Result<()> {
        let mut i = 0;
        while i + 1 < self.images.len() {
            let (a, b) = (self.images[i], self.images[i + 1]);
            let len = (b - a).norm();
            let dist = segment_distance(Complex64::new(w, 0.0), a, b);
            let gap = self.params[i + 1] - self.params[i];
            if len > min_len.max(self.refine_frac * dist) && gap > 1e-12 {
                if self.images.len() >= self.max_points {
                    return Err(Error::Geometry(format!(
                        "arc refinement exceeded {} points",
                        self.max_points
                    )));
                }
                let s = 0.5 * (self.params[i] + self.params[i + 1]);
                let z = self.image_of(s);
                self.params.insert(i + 1, s);
                self.images.insert(i + 1, z);
            } else {
                i += 1;
            }
        }
        // drop points left over from earlier close approaches
        let mut i = 1;
        while i + 1 < self.images.len() {
            let (a, b) = (self.images[i - 1], self.images[i + 1]);
            let dist = segment_distance(Complex64::new(w, 0.0), a, b);
            if (b - a).norm() < 0.5 * min_len.max(self.refine_frac * dist) {
                self.params.remove(i);
                self.images.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(())
    }

    /// Whether the closed segment [p, q] meets the current image of A.
    fn segment_hits(&self, p: Complex64, q: Complex64) -> bool {
        let (lo, hi) = (p.re.min(q.re), p.re.max(q.re));
        let top = p.im.max(q.im);
        self.images.windows(2).any(|seg| {
            let (a, b) = (seg[0], seg[1]);
            if a.re.max(b.re) < lo || a.re.min(b.re) > hi || a.im.min(b.im) > top {
                return false;
            }
            segments_meet(p, q, a, b)
        })
    }

    /// Applies one Loewner step with driving value `w` over duration `dt`.
    pub fn step(&mut self, w: f64, dt: f64) -> Result<StepOutcome> {
        self.refine(w, 0.5 * dt.sqrt())?;
        if self.images[0].re <= w {
            return Ok(StepOutcome::Hit);
        }
        let tip = Complex64::new(w, 2.0 * dt.sqrt());
        let foot = Complex64::new(w, 0.0);
        let root = match self.rule {
            HitRule::VerticalSlit => {
                if self.segment_hits(foot, tip) {
                    return Ok(StepOutcome::Hit);
                }
                w
            }
            HitRule::TiltedSegment => {
                if self.segment_hits(Complex64::new(self.root, 0.0), tip) {
                    return Ok(StepOutcome::Hit);
                }
                // the chord misses A; map out a vertical slit that misses it too
                if !self.segment_hits(foot, tip) {
                    w
                } else if !self.segment_hits(
                    Complex64::new(self.root, 0.0),
                    Complex64::new(self.root, tip.im),
                ) {
                    self.root
                } else {
                    return Ok(StepOutcome::Hit);
                }
            }
        };
        for z in &mut self.images {
            *z = slit_forward(*z, root, dt);
        }
        self.images[0].im = 0.0;
        self.history.push((root, dt));
        self.root = root;
        Ok(StepOutcome::Clear)
    }

    /// h-quantities at the current time for driving value `w` and force
    /// point `o`, refining the arc first so the zipper resolves it near `w`.
    pub fn h_quantities(&mut self, w: f64, o: f64, min_len: f64) -> Result<HQuantities> {
        self.refine(w, min_len)?;
        let arc = self.arc()?;
        Ok(HQuantities::from_arc(&arc, w, o))
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed-segment intersection, touching included.
fn segments_meet(p: Complex64, q: Complex64, a: Complex64, b: Complex64) -> bool {
    let d1 = orient(p, q, a);
    let d2 = orient(p, q, b);
    let d3 = orient(a, b, p);
    let d4 = orient(a, b, q);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_segment(p, q, a))
        || (d2 == 0.0 && on_segment(p, q, b))
        || (d3 == 0.0 && on_segment(a, b, p))
        || (d4 == 0.0 && on_segment(a, b, q))
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let u = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + ab * u)).norm()
}

/// h-quantities at step `t_index` of `dp`, recomputed from A by forward
/// tracking. Fails with a swallowed error if the hull met A earlier.
pub fn h_quantities(dp: &DrivingPath, t_index: usize, a: &SlitHull) -> Result<HQuantities> {
    if t_index >= dp.len() {
        return Err(Error::Usage(format!("index {t_index} beyond path length")));
    }
    if t_index == 0 {
        return HQuantities::initial(a, dp.w()[0], dp.o()[0]);
    }
    let mut tracker = SlitTracker::new(*a, 64, dp.w()[0]);
    for j in 1..=t_index {
        if tracker.step(dp.w()[j], dp.dt(j))? == StepOutcome::Hit {
            return Err(Error::Swallowed {
                step: j,
                what: "the Loewner hull met A".into(),
            });
        }
    }
    let min_len = 0.01 * a.y.max(1e-12);
    tracker.h_quantities(dp.w()[t_index], dp.o()[t_index], min_len)
}
