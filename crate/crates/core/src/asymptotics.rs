//! Large-`n` limit laws of τ₂ and numerical convergence toward them.
//!
//! With `mu1`, `mu2` taken as functions of `n`:
//!
//! | regime            | hypothesis                           | limit                                  |
//! |-------------------|--------------------------------------|----------------------------------------|
//! | `FixedRatio(α)`   | `mu2 / (mu1 n) → α`                  | `P(mu1 n τ₂ > s) → exp(s f(s α))`       |
//! | `FastSecond`      | `mu2 / (mu1 n) → ∞`                  | `P(mu1 n τ₂ > s) → exp(-s)`             |
//! | `QuadraticHazard(α)` | `mu1 n mu2 → α`, `mu2 → 0`        | `P(τ₂ > t) → exp(-α t² / 2)`            |
//!
//! The first two compare in the rescaled time `s = mu1 n t`, the last one in
//! model time.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_law::{self, ModelParams};
use crate::grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitRegime {
    FixedRatio { alpha: f64 },
    FastSecond,
    QuadraticHazard { alpha: f64 },
}

impl LimitRegime {
    pub fn fixed_ratio(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::FixedRatio { alpha })
    }

    pub fn fast_second() -> Self {
        Self::FastSecond
    }

    pub fn quadratic_hazard(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::QuadraticHazard { alpha })
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Self::FixedRatio { alpha } | Self::QuadraticHazard { alpha } => Some(alpha),
            Self::FastSecond => None,
        }
    }

    /// Whether the limit is stated for `mu1 n τ₂` rather than `τ₂`.
    pub fn is_rescaled(&self) -> bool {
        !matches!(self, Self::QuadraticHazard { .. })
    }

    fn validate(&self) -> Result<()> {
        match self.alpha() {
            Some(a) => check_alpha(a),
            None => Ok(()),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::param("alpha", format!("must be finite and positive, got {alpha}")));
    }
    Ok(())
}

/// Survival function of the limit law at `t` (rescaled time for the first two regimes).
pub fn limit_survival(r: &LimitRegime, t: f64) -> Result<f64> {
    r.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    let log_s = match *r {
        LimitRegime::FixedRatio { alpha } => t * exact_law::shape_kernel(t * alpha),
        LimitRegime::FastSecond => -t,
        LimitRegime::QuadraticHazard { alpha } => -0.5 * alpha * t * t,
    };
    Ok(log_s.exp())
}

/// Sup-norm gaps between the exact law and a limit law along increasing `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    n_values: Vec<f64>,
    gaps: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn new(n_values: Vec<f64>, gaps: Vec<f64>) -> Result<Self> {
        if n_values.len() != gaps.len() {
            return Err(Error::InvalidGrid("n values and gaps differ in length".into()));
        }
        if n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("n values must be strictly increasing".into()));
        }
        if gaps.iter().any(|g| g.is_nan() || *g < 0.0) {
            return Err(Error::InvalidGrid("gaps must be nonnegative".into()));
        }
        Ok(Self { n_values, gaps })
    }

    pub fn n_values(&self) -> &[f64] {
        &self.n_values
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.n_values.iter().copied().zip(self.gaps.iter().copied())
    }
}

/// Maps `n` to `(mu1, mu2)`.
pub trait SequenceRule: Sync {
    fn rates(&self, n: f64) -> (f64, f64);
}

impl<F> SequenceRule for F
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    fn rates(&self, n: f64) -> (f64, f64) {
        self(n)
    }
}

/// Built-in parameter sequence satisfying each regime's hypothesis.
///
/// - `FixedRatio(α)`: `mu1 = 1/n`, `mu2 = α`, so `mu2 / (mu1 n) = α` for every `n`.
/// - `FastSecond`: `mu1 = 1/n²`, `mu2 = 1`, so `mu2 / (mu1 n) = n`.
/// - `QuadraticHazard(α)`: `mu2 = n^{-1/2}`, `mu1 = α n^{-1/2}`, so `mu1 n mu2 = α`.
pub fn default_rule(r: LimitRegime) -> impl SequenceRule {
    move |n: f64| match r {
        LimitRegime::FixedRatio { alpha } => (1.0 / n, alpha),
        LimitRegime::FastSecond => (1.0 / (n * n), 1.0),
        LimitRegime::QuadraticHazard { alpha } => {
            let root = n.sqrt();
            (alpha / root, 1.0 / root)
        }
    }
}

/// 200 points, geometric on `[0.01, 10]`.
pub fn default_grid() -> Vec<f64> {
    grid::geometric(0.01, 10.0, 200).expect("constant grid bounds are valid")
}

pub const DEFAULT_N_VALUES: [f64; 3] = [1e2, 1e4, 1e6];

/// For each `n`, the sup over `grid` of `|exact − limit|`.
///
/// In the rescaled regimes the exact side is `P(mu1 n τ₂ > s)`, i.e. the
/// survival function evaluated at `s / (mu1 n)`.
pub fn regime_gap<R: SequenceRule>(
    rule: &R,
    regime: &LimitRegime,
    grid: &[f64],
    n_values: &[f64],
) -> Result<ConvergenceTrace> {
    regime.validate()?;
    grid::check_grid(grid)?;
    if n_values.is_empty() || n_values.iter().any(|n| !n.is_finite() || *n <= 0.0) {
        return Err(Error::param("n", "sequence needs finite positive n values"));
    }
    let limits = grid
        .iter()
        .map(|&t| limit_survival(regime, t))
        .collect::<Result<Vec<_>>>()?;

    let gaps = n_values
        .par_iter()
        .map(|&n| {
            let (mu1, mu2) = rule.rates(n);
            if !(mu1 > 0.0 && mu2 > 0.0) {
                return Err(Error::param(
                    "sequence rule",
                    format!("nonpositive rates ({mu1}, {mu2}) at n = {n}"),
                ));
            }
            let p = ModelParams::new(mu1, mu2, n)?;
            let scale = if regime.is_rescaled() { p.arrival_rate() } else { 1.0 };
            let mut sup: f64 = 0.0;
            for (&t, &lim) in grid.iter().zip(&limits) {
                let exact = exact_law::survival(&p, t / scale)?;
                sup = sup.max((exact - lim).abs());
            }
            Ok(sup)
        })
        .collect::<Result<Vec<_>>>()?;

    ConvergenceTrace::new(n_values.to_vec(), gaps)
}
