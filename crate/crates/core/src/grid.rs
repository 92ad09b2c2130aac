use crate::error::{Error, Result};

/// Increasing simulation times t_0 = 0 < t_1 < … < t_N.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    uniform_dt: Option<f64>,
}

impl TimeGrid {
    /// N = round(T/dt) equal steps; `dt` is adjusted so the grid ends at T.
    pub fn uniform(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain("dt", dt, "requires dt > 0"));
        }
        if !(t_end >= dt && t_end.is_finite()) {
            return Err(Error::domain("T", t_end, "requires T ≥ dt"));
        }
        let n = (t_end / dt).round().max(1.0) as usize;
        Ok(Self::uniform_steps(t_end, n))
    }

    pub fn uniform_steps(t_end: f64, n: usize) -> Self {
        let dt = t_end / n as f64;
        let times = (0..=n).map(|k| k as f64 * dt).collect();
        TimeGrid {
            times,
            uniform_dt: Some(dt),
        }
    }

    /// t_k = T·(k/N)^power, fine near 0 for power > 1.
    pub fn graded(t_end: f64, n: usize, power: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("graded grid needs at least one step".into()));
        }
        if !(power >= 1.0) {
            return Err(Error::domain("power", power, "requires power ≥ 1"));
        }
        let times = (0..=n)
            .map(|k| t_end * (k as f64 / n as f64).powf(power))
            .collect();
        Ok(TimeGrid {
            times,
            uniform_dt: if power == 1.0 {
                Some(t_end / n as f64)
            } else {
                None
            },
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of steps N.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Length of step k (from t_k to t_{k+1}).
    pub fn step(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    pub fn uniform_dt(&self) -> Option<f64> {
        self.uniform_dt
    }

    /// Index of the grid time closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= self.times.len() {
                    self.times.len() - 1
                } else if (self.times[i] - t).abs() < (t - self.times[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let g = TimeGrid::uniform(1.0, 1e-3).unwrap();
        assert_eq!(g.steps(), 1000);
        assert_eq!(g.t_end(), 1.0);
        assert_eq!(g.index_of(0.5), 500);
        assert_eq!(g.index_of(0.50049), 500);
        assert!(TimeGrid::uniform(1.0, 0.0).is_err());
        assert!(TimeGrid::uniform(1e-4, 1e-3).is_err());
    }

    #[test]
    fn graded_grid() {
        let g = TimeGrid::graded(4.0, 10, 2.0).unwrap();
        assert_eq!(g.steps(), 10);
        assert!((g.step(0) - 0.04).abs() < 1e-15);
        assert!(g.uniform_dt().is_none());
        assert!((g.t_end() - 4.0).abs() < 1e-15);
    }
}
