//! Closed-form law of the waiting time τ₂ until the first type-2 mutation.
//!
//! Type-1 mutations arrive as a Poisson process of rate `mu1 * n`; each one
//! starts an independent exponential clock of rate `mu2`. The survival
//! function is
//!
//! ```text
//! P(τ₂ > t) = exp(mu1 * n * t * f(t * mu2)),   f(x) = -1 + (1 - e^{-x}) / x
//! ```
//!
//! Everything here is built on one kernel for `f` that keeps full relative
//! precision near zero, so the small-t regime (where `P(τ₂ ≤ t)` is of order
//! `t²`) is evaluated without cancellation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// Below this argument `f` is evaluated from its Taylor series.
const SERIES_CUTOFF: f64 = 1.0;
/// Number of series terms; the first omitted term is below 1e-18 relative at the cutoff.
const SERIES_TERMS: u32 = 18;

/// Mutation rates `mu1`, `mu2` and the rate multiplier `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    mu1: f64,
    mu2: f64,
    n: f64,
}

impl ModelParams {
    pub fn new(mu1: f64, mu2: f64, n: f64) -> Result<Self> {
        check_rate("mu1", mu1)?;
        check_rate("mu2", mu2)?;
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::param("n", format!("must be finite and positive, got {n}")));
        }
        if !(mu1 * n).is_finite() {
            return Err(Error::param("mu1", "mu1 * n overflows"));
        }
        Ok(Self { mu1, mu2, n })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Intensity `mu1 * n` of the type-1 arrival process.
    pub fn arrival_rate(&self) -> f64 {
        self.mu1 * self.n
    }

    /// True when either rate is zero, so τ₂ is infinite almost surely.
    pub fn is_degenerate(&self) -> bool {
        self.mu1 == 0.0 || self.mu2 == 0.0
    }

    /// The same rates with `n = 1`.
    pub fn single_cell(&self) -> Self {
        Self { n: 1.0, ..*self }
    }
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::param(name, format!("must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

/// A tabulated survival function `P(τ₂ > t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SurvivalCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidGrid("times must be finite and nonnegative".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGrid("values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidGrid("values must be nonincreasing".into()));
        }
        if times.first() == Some(&0.0) && values[0] != 1.0 {
            return Err(Error::InvalidGrid("survival at t = 0 must be 1".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `f(x)` for `x ≥ 0`, accepting `+∞` (where the limit is −1).
pub(crate) fn shape_kernel(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        // f(x) = Σ_{k≥1} (-x)^k / (k+1)!, nested so that term k+1 = term k * (-x / (k+2)).
        let mut acc = 1.0;
        for k in (1..SERIES_TERMS).rev() {
            acc = 1.0 - x / f64::from(k + 2) * acc;
        }
        -0.5 * x * acc
    } else {
        -(-x).exp_m1() / x - 1.0
    }
}

/// `ln((1 - e^{-x}) / x)`, the log of the per-lineage no-maturation probability.
pub(crate) fn ln_lineage_survival(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        shape_kernel(x).ln_1p()
    } else {
        (-(-x).exp_m1()).ln() - x.ln()
    }
}

/// The shape function `f(x) = -1 + (1 - e^{-x}) / x`, with `f(0) = 0`.
///
/// Decreases from 0 towards −1 on `[0, ∞)`.
pub fn f_shape(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::param("x", format!("must be finite and nonnegative, got {x}")));
    }
    Ok(shape_kernel(x))
}

/// `ln P(τ₂ > t) = mu1 * n * t * f(t * mu2)`.
///
/// Evaluated as `n * (mu1 * t * f(t * mu2))`, so the result scales exactly
/// linearly in `n`.
pub fn log_survival(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(log_survival_unchecked(p, t))
}

pub(crate) fn log_survival_unchecked(p: &ModelParams, t: f64) -> f64 {
    let per_cell = p.mu1 * t * shape_kernel(t * p.mu2);
    p.n * per_cell
}

pub fn survival(p: &ModelParams, t: f64) -> Result<f64> {
    Ok(log_survival(p, t)?.exp())
}

/// `P(τ₂ ≤ t)`, computed as `-expm1(log_survival)`.
pub fn cdf(p: &ModelParams, t: f64) -> Result<f64> {
    Ok(-log_survival(p, t)?.exp_m1())
}

/// Density of τ₂: `mu1 * n * (1 - e^{-mu2 t}) * P(τ₂ > t)`.
pub fn pdf(p: &ModelParams, t: f64) -> Result<f64> {
    let s = survival(p, t)?;
    Ok(p.arrival_rate() * -(-p.mu2 * t).exp_m1() * s)
}

/// The `t` solving `cdf(t) = q`.
///
/// Survival is bounded below by `exp(-mu1 n t)`, so the quantile of that
/// envelope is a lower bracket; the upper bracket is found by doubling and
/// the root is refined by bisection on `log_survival`.
pub fn quantile(p: &ModelParams, q: f64) -> Result<f64> {
    if q.is_nan() || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Err(Error::NoFiniteQuantile("q = 1".into()));
    }
    if p.is_degenerate() {
        return Err(Error::NoFiniteQuantile(
            "a zero mutation rate leaves all mass at infinity".into(),
        ));
    }

    let target = (-q).ln_1p();
    let ls = |t: f64| log_survival_unchecked(p, t);

    let mut lo = -target / p.arrival_rate();
    if ls(lo) <= target {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    while ls(hi) > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical(format!("could not bracket quantile {q}")));
        }
    }

    for _ in 0..200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if ls(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    if (ls(lo) - target).abs() <= (ls(hi) - target).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// `P(τ₂ > t | N₁(t) = k) = [(1 - e^{-t mu2}) / (t mu2)]^k`.
///
/// Given `k` arrivals by time `t`, the arrival times are distributed as
/// sorted uniforms on `(0, t)`, and each lineage survives independently.
pub fn conditional_survival_given_k(p: &ModelParams, t: f64, k: u64) -> Result<f64> {
    check_time(t)?;
    if k == 0 {
        return Ok(1.0);
    }
    if t == 0.0 {
        return Err(Error::InvalidTime(t));
    }
    Ok((k as f64 * ln_lineage_survival(t * p.mu2)).exp())
}

/// `E[exp(mu2 U)]` for `U` uniform on `(0, t)`: `(e^{t mu2} - 1) / (t mu2)`.
pub fn mgf_uniform(mu2: f64, t: f64) -> Result<f64> {
    check_rate("mu2", mu2)?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidTime(t));
    }
    let x = t * mu2;
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(x.exp_m1() / x)
}

/// Leading small-time behaviour `P(τ₂ ≤ t) ~ mu1 mu2 n t² / 2`, clamped to `[0, 1]`.
pub fn small_t_cdf_approx(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((0.5 * p.mu1 * p.mu2 * p.n * t * t).clamp(0.0, 1.0))
}

/// `E[τ₂] = ∫₀^∞ P(τ₂ > t) dt` by adaptive Gauss–Kronrod quadrature.
///
/// The integral is truncated where `ln P(τ₂ > t) ≤ -60`. The log-survival
/// is concave, so the neglected tail is at most `e^{-60} / h(T)` with `h` the
/// hazard at the cut point.
pub fn mean_tau2(p: &ModelParams) -> Result<f64> {
    if p.is_degenerate() {
        return Err(Error::InfiniteMean(
            "a zero mutation rate leaves all mass at infinity".into(),
        ));
    }
    const LOG_CUT: f64 = -60.0;
    let mut end = -LOG_CUT / p.arrival_rate();
    while log_survival_unchecked(p, end) > LOG_CUT {
        end *= 2.0;
        if !end.is_finite() {
            return Err(Error::Numerical("could not bound the survival tail".into()));
        }
    }

    // Break at the lineage time scale 1/mu2 when it falls inside the range.
    let mut breaks = vec![0.0];
    let scale = 1.0 / p.mu2;
    if scale < end {
        breaks.push(scale);
    }
    let mut b = breaks[breaks.len() - 1].max(end / 64.0);
    while b < end {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(end);
    breaks.dedup();

    let (value, _) = quad::integrate(|t| log_survival_unchecked(p, t).exp(), &breaks, 1e-13, 4000);
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Numerical(format!("quadrature returned {value}")));
    }
    Ok(value)
}

/// Smallest `K` with the Chernoff bound on `P(Poisson(lambda) > K)` below `tol`.
pub fn poisson_truncation(lambda: f64, tol: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    // P(X ≥ j) ≤ exp(-λ) (eλ / j)^j for j > λ; P(X > K) = P(X ≥ K + 1).
    let ln_tol = tol.ln();
    let mut k = lambda.ceil() as u64;
    loop {
        let j = (k + 1) as f64;
        if -lambda + j * (1.0 + lambda.ln() - j.ln()) < ln_tol {
            return k;
        }
        k += 1;
    }
}

/// `Σ_{k=0}^{K} P(N₁(t) = k) · P(τ₂ > t | N₁(t) = k)`, the Poisson mixture of
/// conditional survivals, truncated where the Poisson tail is below 1e-14.
pub fn poisson_mixture_survival(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let lambda = p.arrival_rate() * t;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let ln_r = ln_lineage_survival(t * p.mu2);
    if ln_r == f64::NEG_INFINITY {
        return Ok((-lambda).exp());
    }
    let cutoff = poisson_truncation(lambda, 1e-14);
    let step = lambda.ln() + ln_r;
    let mut log_terms = Vec::with_capacity(cutoff as usize + 1);
    let mut lt = -lambda;
    log_terms.push(lt);
    for k in 1..=cutoff {
        lt += step - (k as f64).ln();
        log_terms.push(lt);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = log_terms.iter().map(|l| (l - peak).exp()).sum();
    Ok((peak + scaled.ln()).exp())
}

/// Tabulates the exact survival function on `grid`.
pub fn survival_curve(p: &ModelParams, grid: &[f64]) -> Result<SurvivalCurve> {
    let values = grid.iter().map(|&t| survival(p, t)).collect::<Result<Vec<_>>>()?;
    SurvivalCurve::new(grid.to_vec(), values)
}
