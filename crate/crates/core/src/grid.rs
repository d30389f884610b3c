//! Time grids for tabulation and sup-norm comparisons.

use crate::error::{Error, Result};

/// Grid description shared by the CLI and library callers.
///
/// A linear grid has `points` equal steps of `(t_max - t_min) / points`
/// starting one step after `t_min` and ending at `t_max`. A log grid is
/// geometric from `t_min` to `t_max` inclusive and needs `t_min > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.t_min.is_finite() || self.t_min < 0.0 {
            return Err(Error::InvalidGrid(format!("t-min must be finite and nonnegative, got {}", self.t_min)));
        }
        if !self.t_max.is_finite() || self.t_max <= self.t_min {
            return Err(Error::InvalidGrid(format!(
                "t-max must be finite and greater than t-min, got {}",
                self.t_max
            )));
        }
        if self.points == 0 {
            return Err(Error::InvalidGrid("points must be at least 1".into()));
        }
        if self.log && self.t_min == 0.0 {
            return Err(Error::InvalidGrid("log grid needs t-min > 0".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.log {
            geometric(self.t_min, self.t_max, self.points)
        } else {
            let span = self.t_max - self.t_min;
            let n = self.points as f64;
            Ok((1..=self.points)
                .map(|i| self.t_min + span * i as f64 / n)
                .collect())
        }
    }
}

/// `points` values spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidGrid(format!("geometric grid needs 0 < lo < hi, got [{lo}, {hi}]")));
    }
    match points {
        0 => Err(Error::InvalidGrid("points must be at least 1".into())),
        1 => Ok(vec![hi]),
        _ => {
            let ratio = (hi / lo).ln() / (points - 1) as f64;
            let mut g: Vec<f64> = (0..points).map(|i| lo * (ratio * i as f64).exp()).collect();
            g[points - 1] = hi;
            Ok(g)
        }
    }
}

/// Checks that a caller-supplied grid is nonempty, finite, nonnegative and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid("grid times must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}
