//! Empirical distributions, the one-sample KS statistic, DKW bounds and
//! simulation-versus-formula comparison reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_law::{self, ModelParams, SurvivalCurve};
use crate::grid;
use crate::simulate::{self, BatchOptions, ModelTag, SampleSet};

/// Largest censored fraction accepted by [`compare`].
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("sample contains NaN".into()));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Fraction of draws strictly greater than each grid time.
pub fn empirical_survival(s: &SampleSet, grid: &[f64]) -> Result<SurvivalCurve> {
    grid::check_grid(grid)?;
    let v = sorted(&s.values)?;
    let n = v.len() as f64;
    let values = grid
        .iter()
        .map(|&t| (v.len() - v.partition_point(|&x| x <= t)) as f64 / n)
        .collect();
    SurvivalCurve::new(grid.to_vec(), values)
}

/// Exact one-sample Kolmogorov–Smirnov distance between the empirical CDF of
/// `values` and `reference`.
///
/// With sorted draws `x_(1) ≤ … ≤ x_(n)` this is
/// `max_i max(i/n − F(x_(i)), F(x_(i)) − (i−1)/n)`.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], reference: F) -> Result<f64> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = reference(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        sup = sup.max(above.abs()).max(below.abs());
    }
    Ok(sup.min(1.0))
}

/// DKW radius `sqrt(ln(2/δ) / (2n))`: with probability at least `1 − δ`, the
/// KS distance of `n` draws from the true law is below it.
pub fn dkw_bound(n: u64, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidProbability(delta));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Survival of `Exp(a) + Exp(b)`, the Moran τ₂ law for a single cell.
pub fn hypoexponential_survival(a: f64, b: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if a == b {
        return (-a * t).exp() * (1.0 + a * t);
    }
    (b * (-a * t).exp() - a * (-b * t).exp()) / (b - a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Draws entering the KS statistic (censored draws excluded).
    pub n: u64,
    pub ks: f64,
    pub dkw: f64,
    pub delta: f64,
    pub pass: bool,
    pub model: ModelTag,
    pub params: ModelParams,
    pub seed: u64,
    #[serde(skip)]
    pub censored: u64,
}

/// Draws `n` samples and tests them against the closed-form law.
///
/// The paper model is compared with the exact CDF; the Moran model only for
/// a single cell, where τ₂ is hypoexponential with rates `mu1`, `mu2`.
pub fn compare(p: &ModelParams, n: usize, seed: u64, model: ModelTag, delta: f64) -> Result<ComparisonReport> {
    compare_with(p, n, seed, model, delta, &BatchOptions::default())
}

pub fn compare_with(
    p: &ModelParams,
    n: usize,
    seed: u64,
    model: ModelTag,
    delta: f64,
    opts: &BatchOptions,
) -> Result<ComparisonReport> {
    let reference: Box<dyn Fn(f64) -> f64> = match model {
        ModelTag::Paper => {
            let p = *p;
            Box::new(move |t| -exact_law::log_survival_unchecked(&p, t).exp_m1())
        }
        ModelTag::Moran if p.n() == 1.0 => {
            let (a, b) = (p.mu1(), p.mu2());
            Box::new(move |t| 1.0 - hypoexponential_survival(a, b, t))
        }
        ModelTag::Moran => {
            return Err(Error::NoReference(format!(
                "Moran model with N = {} has no closed-form law",
                p.n()
            )))
        }
    };
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidProbability(delta));
    }

    let samples = simulate::sample_batch_with(p, n, seed, model, opts)?;
    if samples.censored as f64 >= MAX_CENSORED_FRACTION * samples.total() as f64 {
        return Err(Error::Censored {
            censored: samples.censored,
            total: samples.total(),
        });
    }
    let used = samples.len() as u64;
    let ks = ks_distance(&samples.values, reference)?;
    let dkw = dkw_bound(used, delta)?;
    Ok(ComparisonReport {
        n: used,
        ks,
        dkw,
        delta,
        pass: ks <= dkw,
        model,
        params: *p,
        seed,
        censored: samples.censored,
    })
}
