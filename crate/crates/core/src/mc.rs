//! Monte Carlo plumbing: keyed RNG substreams, mergeable moment
//! accumulators, and deterministic block-parallel reduction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

/// Paths per RNG block. Fixed so results do not depend on thread count.
pub const BLOCK_SIZE: u64 = 256;

/// SplitMix64 finalizer, used to derive independent seeds from `(seed, tag)`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a named sub-experiment (e.g. the two sides of an identity).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag))
}

/// RNG substream keyed by `(seed, block)`.
pub fn stream(seed: u64, block: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Running count, mean and centered second moment (Welford / Chan merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
        }
    }
}

/// Bivariate moments of (w, w·f) for self-normalized importance sampling.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioMoments {
    pub n: u64,
    pub mean_w: f64,
    pub mean_v: f64,
    pub m2_w: f64,
    pub m2_v: f64,
    pub c_wv: f64,
}

impl RatioMoments {
    /// Adds one weighted sample: weight `w`, functional value `f`.
    pub fn push(&mut self, w: f64, f: f64) {
        let v = w * f;
        self.n += 1;
        let n = self.n as f64;
        let dw = w - self.mean_w;
        let dv = v - self.mean_v;
        self.mean_w += dw / n;
        self.mean_v += dv / n;
        self.m2_w += dw * (w - self.mean_w);
        self.m2_v += dv * (v - self.mean_v);
        self.c_wv += dw * (v - self.mean_v);
    }

    pub fn merge(&self, o: &RatioMoments) -> RatioMoments {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let nf = n as f64;
        let f = self.n as f64 * o.n as f64 / nf;
        let dw = o.mean_w - self.mean_w;
        let dv = o.mean_v - self.mean_v;
        RatioMoments {
            n,
            mean_w: self.mean_w + dw * o.n as f64 / nf,
            mean_v: self.mean_v + dv * o.n as f64 / nf,
            m2_w: self.m2_w + o.m2_w + dw * dw * f,
            m2_v: self.m2_v + o.m2_v + dv * dv * f,
            c_wv: self.c_wv + o.c_wv + dw * dv * f,
        }
    }

    /// Σw·f / Σw with a delta-method standard error.
    pub fn ratio_estimate(&self) -> Estimate {
        let n = self.n.max(1) as f64;
        let r = self.mean_v / self.mean_w;
        let denom = (self.n.max(2) - 1) as f64;
        let var_v = self.m2_v / denom;
        let var_w = self.m2_w / denom;
        let cov = self.c_wv / denom;
        let var_r = (var_v - 2.0 * r * cov + r * r * var_w) / (self.mean_w * self.mean_w * n);
        Estimate {
            mean: r,
            stderr: var_r.max(0.0).sqrt(),
            n: self.n,
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64, n: u64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            n,
        }
    }

    /// |a − b| / √(se_a² + se_b²); 0 when both sides are exact and equal.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        let diff = (self.mean - other.mean).abs();
        let se = self.stderr.hypot(other.stderr);
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }

    /// |mean − target| / stderr.
    pub fn z_target(&self, target: f64) -> f64 {
        self.z_against(&Estimate::exact(target, self.n))
    }
}

/// Reduces a vector in a fixed binary-tree order.
pub fn pairwise_reduce<T: Clone>(mut items: Vec<T>, merge: impl Fn(&T, &T) -> T) -> Option<T> {
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        for chunk in items.chunks(2) {
            next.push(match chunk {
                [a, b] => merge(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        items = next;
    }
    items.pop()
}

/// Runs `work(block_index, rng, count)` over `ceil(n / BLOCK_SIZE)` blocks
/// in parallel, each on its own substream, and returns results in block order.
pub fn run_blocks<T, F>(n: u64, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Rng, u64) -> T + Sync,
{
    let blocks = n.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let mut rng = stream(seed, b);
            work(b, &mut rng, count)
        })
        .collect()
}

/// Mean and standard error of `sample(rng)` over `n` draws.
pub fn estimate_mean<F>(n: u64, seed: u64, sample: F) -> Estimate
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let blocks = run_blocks(n, seed, |_, rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample(rng));
        }
        m
    });
    pairwise_reduce(blocks, Moments::merge)
        .unwrap_or_default()
        .estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let parts: Vec<Moments> = xs
            .chunks(77)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .collect();
        let merged = pairwise_reduce(parts, Moments::merge).unwrap();
        assert_eq!(merged.n, all.n);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-8);
    }

    #[test]
    fn ratio_with_unit_weights_is_plain_mean() {
        let mut r = RatioMoments::default();
        let mut m = Moments::default();
        for i in 0..500 {
            let f = (i % 7) as f64;
            r.push(1.0, f);
            m.push(f);
        }
        let a = r.ratio_estimate();
        let b = m.estimate();
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.stderr - b.stderr).abs() < 1e-12);
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream(1, 0).random();
        let b: u64 = stream(1, 1).random();
        let c: u64 = stream(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
    }

    #[test]
    fn estimate_mean_is_deterministic() {
        let f = |rng: &mut Rng| rng.random::<f64>();
        let a = estimate_mean(3000, 9, f);
        let b = estimate_mean(3000, 9, f);
        assert_eq!(a, b);
        assert_eq!(a.n, 3000);
        assert!(a.z_target(0.5) < 4.0);
    }

    #[test]
    fn z_scores() {
        let e = Estimate::exact(1.0, 10);
        assert_eq!(e.z_against(&Estimate::exact(1.0, 10)), 0.0);
        assert!(e.z_target(2.0).is_infinite());
        let f = Estimate {
            mean: 1.3,
            stderr: 0.1,
            n: 10,
        };
        assert!((f.z_target(1.0) - 3.0).abs() < 1e-12);
    }
}
