use crate::error::{Error, Result};

/// Ordered, non-negative sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `n_points` equally spaced times covering `[0, t_max]`.
    pub fn uniform(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        let dt = t_max / (n_points - 1) as f64;
        let times = (0..n_points).map(|i| i as f64 * dt).collect();
        Ok(TimeGrid { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidGrid("times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    /// Largest gap between consecutive samples (0 for a single point).
    pub fn max_spacing(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Fails when the sampling cannot resolve an oscillation of angular
    /// frequency `omega` with at least `samples_per_half_period` points per
    /// half period.
    pub fn check_resolves(
        &self,
        omega: f64,
        samples_per_half_period: f64,
        what: &'static str,
    ) -> Result<()> {
        if omega <= 0.0 {
            return Ok(());
        }
        let limit = std::f64::consts::PI / (samples_per_half_period * omega);
        let spacing = self.max_spacing();
        if spacing > limit * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse {
                spacing,
                limit,
                what,
            });
        }
        Ok(())
    }
}
