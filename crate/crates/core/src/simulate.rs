//! Monte Carlo samplers for τ₂.
//!
//! [`sample_tau2`] draws exactly from the two-stage model: type-1 arrivals
//! of a rate `mu1 n` Poisson process, each followed by an exponential(`mu2`)
//! maturation clock. [`moran_sample_tau2`] runs the Moran model with
//! mutations as a Gillespie simulation over type counts and serves as the
//! baseline.
//!
//! Batches are split into fixed-size chunks. Chunk `i` draws from its own
//! generator seeded from `(seed, i)`, so a batch is identical for any number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_distr::Exp1;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_law::{self, ModelParams};

/// Generator used by all samplers (period 2^256 − 1).
pub type SimRng = Xoshiro256PlusPlus;

/// Draws per chunk in [`sample_batch`]. Part of the reproducibility contract.
pub const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Paper,
    Moran,
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelTag::Paper => "paper",
            ModelTag::Moran => "moran",
        })
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ModelTag::Paper),
            "moran" => Ok(ModelTag::Moran),
            other => Err(Error::param("model", format!("unknown model `{other}`"))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for substream `index` of `seed`.
///
/// The 256-bit state is built from bijective mixes of `seed` and `index`, so
/// distinct `(seed, index)` pairs never share a state.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let words = [
        splitmix64(seed),
        splitmix64(index ^ 0x6a09_e667_f3bc_c908),
        splitmix64(seed ^ 0xbb67_ae85_84ca_a73b),
        splitmix64(index ^ 0x3c6e_f372_fe94_f82b),
    ];
    let mut bytes = [0u8; 32];
    for (dst, w) in bytes.chunks_exact_mut(8).zip(words) {
        dst.copy_from_slice(&w.to_le_bytes());
    }
    SimRng::from_seed(bytes)
}

fn exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// A type-1 arrival and the time its lineage acquires the type-2 mutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutationEvent {
    pub arrival: f64,
    pub maturation: f64,
}

fn require_live(p: &ModelParams) -> Result<()> {
    if p.is_degenerate() {
        return Err(Error::AlmostSurelyInfinite(format!(
            "mu1 = {}, mu2 = {}",
            p.mu1(),
            p.mu2()
        )));
    }
    Ok(())
}

/// One exact draw of τ₂ = min over lineages of the maturation times.
///
/// Arrivals are generated in order while tracking the earliest maturation
/// `m`; generation stops at the first arrival later than `m`, since every
/// later lineage matures after it arrives.
pub fn sample_tau2<R: Rng + ?Sized>(p: &ModelParams, rng: &mut R) -> Result<f64> {
    require_live(p)?;
    Ok(event_driven(p, rng, 0.0).0)
}

/// Like [`sample_tau2`], also returning `N₁(t_obs)`, the number of arrivals in `[0, t_obs]`.
///
/// Arrival generation continues past τ₂ until `t_obs` is passed, which does
/// not change the law of τ₂.
pub fn sample_tau2_observed<R: Rng + ?Sized>(
    p: &ModelParams,
    rng: &mut R,
    t_obs: f64,
) -> Result<(f64, u64)> {
    require_live(p)?;
    if !t_obs.is_finite() || t_obs < 0.0 {
        return Err(Error::InvalidTime(t_obs));
    }
    Ok(event_driven(p, rng, t_obs))
}

fn event_driven<R: Rng + ?Sized>(p: &ModelParams, rng: &mut R, t_obs: f64) -> (f64, u64) {
    let rate = p.arrival_rate();
    let mut arrival = 0.0;
    let mut earliest = f64::INFINITY;
    let mut observed = 0;
    loop {
        arrival += exp_draw(rng, rate);
        if arrival > earliest && arrival > t_obs {
            return (earliest, observed);
        }
        if arrival <= t_obs {
            observed += 1;
        }
        let maturation = arrival + exp_draw(rng, p.mu2());
        earliest = earliest.min(maturation);
    }
}

/// All arrivals up to `horizon` with their maturation times, consuming the
/// random stream in the same order as [`sample_tau2`].
pub fn sample_events<R: Rng + ?Sized>(
    p: &ModelParams,
    rng: &mut R,
    horizon: f64,
) -> Result<Vec<MutationEvent>> {
    require_live(p)?;
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::param("horizon", format!("must be finite and positive, got {horizon}")));
    }
    let rate = p.arrival_rate();
    let mut events = Vec::new();
    let mut arrival = 0.0;
    loop {
        arrival += exp_draw(rng, rate);
        if arrival > horizon {
            return Ok(events);
        }
        let maturation = arrival + exp_draw(rng, p.mu2());
        events.push(MutationEvent { arrival, maturation });
    }
}

/// τ₂ by inversion: `quantile(p, u)` for a uniform variate `u ∈ (0, 1)`.
pub fn sample_tau2_inversion(p: &ModelParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    exact_law::quantile(p, u)
}

/// Type counts of the Moran population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MoranState {
    pub healthy: u64,
    pub pre: u64,
    pub cancer: u64,
}

impl MoranState {
    pub fn total(&self) -> u64 {
        self.healthy + self.pre + self.cancer
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoranOutcome {
    /// First time a cancer cell appears.
    Hit(f64),
    /// No cancer cell by the horizon.
    Censored,
}

/// First cancer time in a Moran population of `n_cells`, or `Censored` at `horizon`.
///
/// Uses `p.mu1()` and `p.mu2()`; the population size is `n_cells`.
pub fn moran_sample_tau2<R: Rng + ?Sized>(
    p: &ModelParams,
    n_cells: u64,
    horizon: f64,
    rng: &mut R,
) -> Result<MoranOutcome> {
    moran_trajectory(p, n_cells, horizon, rng, |_, _| {})
}

/// [`moran_sample_tau2`] that reports the state at time 0 and after every event.
///
/// Every cell dies at rate 1 and is replaced by a copy of a uniformly chosen
/// cell (itself included); healthy cells mutate at rate `mu1` and
/// pre-cancerous ones at rate `mu2`. Only count-changing events are
/// simulated: a healthy cell is replaced by a pre-cancerous copy at total
/// rate `h p / N`, and the reverse at the same rate.
pub fn moran_trajectory<R, F>(
    p: &ModelParams,
    n_cells: u64,
    horizon: f64,
    rng: &mut R,
    mut observe: F,
) -> Result<MoranOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(f64, &MoranState),
{
    if n_cells < 1 {
        return Err(Error::param("n_cells", "must be at least 1"));
    }
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
    }
    let size = n_cells as f64;
    let mut state = MoranState {
        healthy: n_cells,
        pre: 0,
        cancer: 0,
    };
    let mut t = 0.0;
    observe(t, &state);
    loop {
        let h = state.healthy as f64;
        let q = state.pre as f64;
        let swap = h * q / size;
        let mutate1 = p.mu1() * h;
        let mutate2 = p.mu2() * q;
        let total = 2.0 * swap + mutate1 + mutate2;
        if total <= 0.0 {
            return Ok(MoranOutcome::Censored);
        }
        t += exp_draw(rng, total);
        if t > horizon {
            return Ok(MoranOutcome::Censored);
        }
        let pick = rng.random::<f64>() * total;
        if pick < mutate2 {
            state.pre -= 1;
            state.cancer += 1;
            observe(t, &state);
            return Ok(MoranOutcome::Hit(t));
        } else if pick < mutate2 + mutate1 + swap {
            // Type-1 mutation or replacement of a healthy cell by a pre-cancerous copy.
            state.healthy -= 1;
            state.pre += 1;
        } else {
            state.pre -= 1;
            state.healthy += 1;
        }
        observe(t, &state);
    }
}

/// Default censoring horizon `100 / (mu1 min(1, mu2) N)`.
pub fn default_moran_horizon(p: &ModelParams) -> f64 {
    100.0 / (p.mu1() * p.mu2().min(1.0) * p.n())
}

/// A reproducible batch of τ₂ draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub params: ModelParams,
    pub seed: u64,
    pub model: ModelTag,
    /// Uncensored draws in generation order.
    pub values: Vec<f64>,
    /// Draws that passed the horizon (Moran model only).
    pub censored: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of draws including censored ones.
    pub fn total(&self) -> u64 {
        self.values.len() as u64 + self.censored
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BatchOptions {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    /// Moran censoring horizon; `None` uses [`default_moran_horizon`].
    pub horizon: Option<f64>,
}

pub fn sample_batch(p: &ModelParams, n: usize, seed: u64, model: ModelTag) -> Result<SampleSet> {
    sample_batch_with(p, n, seed, model, &BatchOptions::default())
}

pub fn sample_batch_with(
    p: &ModelParams,
    n: usize,
    seed: u64,
    model: ModelTag,
    opts: &BatchOptions,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::param("n", "sample count must be at least 1"));
    }
    let moran = match model {
        ModelTag::Paper => {
            require_live(p)?;
            None
        }
        ModelTag::Moran => {
            let cells = p.n();
            if cells < 1.0 || cells.fract() != 0.0 || cells > u64::MAX as f64 {
                return Err(Error::param("n", format!("Moran population must be a positive integer, got {cells}")));
            }
            let horizon = opts.horizon.unwrap_or_else(|| default_moran_horizon(p));
            if !horizon.is_finite() || horizon <= 0.0 {
                return Err(Error::param(
                    "horizon",
                    format!("must be finite and positive, got {horizon} (zero rates need an explicit horizon)"),
                ));
            }
            Some((cells as u64, horizon))
        }
    };

    let chunks = n.div_ceil(CHUNK_SIZE);
    let run_chunk = |c: usize| -> Result<(Vec<f64>, u64)> {
        let mut rng = substream(seed, c as u64);
        let count = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
        let mut values = Vec::with_capacity(count);
        let mut censored = 0;
        for _ in 0..count {
            match moran {
                None => values.push(event_driven(p, &mut rng, 0.0).0),
                Some((cells, horizon)) => match moran_sample_tau2(p, cells, horizon, &mut rng)? {
                    MoranOutcome::Hit(t) => values.push(t),
                    MoranOutcome::Censored => censored += 1,
                },
            }
        }
        Ok((values, censored))
    };
    let collect = || (0..chunks).into_par_iter().map(run_chunk).collect::<Result<Vec<_>>>();

    let parts = match opts.workers {
        None => collect()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(collect)?,
    };

    let mut values = Vec::with_capacity(n);
    let mut censored = 0;
    for (v, c) in parts {
        values.extend(v);
        censored += c;
    }
    Ok(SampleSet {
        params: *p,
        seed,
        model,
        values,
        censored,
    })
}
