use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use mut2wait_core::asymptotics::{self, LimitRegime};
use mut2wait_core::exact_law::{self, ModelParams};
use mut2wait_core::grid::GridSpec;
use mut2wait_core::simulate::{self, BatchOptions, ModelTag};
use mut2wait_core::{stats, Error};

use crate::output::{fmt_f64, write_csv};
use crate::{
    Command, CompareArgs, EvalArgs, Failure, Format, LimitsArgs, ModelArg, ParamArgs, RegimeArg, SampleArgs,
    THREADS_ENV,
};

pub fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Limits(a) => cmd_limits(&a),
    }
}

fn model_params(a: &ParamArgs) -> Result<ModelParams, Failure> {
    ModelParams::new(a.mu1, a.mu2, a.n).map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Failure::usage(format!("invalid value for --{name}: {reason}")),
        other => other.into(),
    })
}

fn model_tag(m: ModelArg) -> ModelTag {
    match m {
        ModelArg::Paper => ModelTag::Paper,
        ModelArg::Moran => ModelTag::Moran,
    }
}

fn batch_options(horizon: Option<f64>) -> Result<BatchOptions, Failure> {
    if let Some(h) = horizon {
        if !h.is_finite() || h <= 0.0 {
            return Err(Failure::usage(format!("invalid value for --horizon: must be finite and positive, got {h}")));
        }
    }
    let workers = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Some(w),
            _ => return Err(Failure::usage(format!("invalid {THREADS_ENV}={v}: expected a positive integer"))),
        },
        Err(_) => None,
    };
    Ok(BatchOptions { workers, horizon })
}

fn check_count(name: &str, n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::usage(format!("invalid value for --{name}: must be at least 1")));
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::numeric(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    serde_json::to_writer(&mut out, value).map_err(|e| Failure::numeric(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EvalRow {
    t: f64,
    survival: f64,
    cdf: f64,
    pdf: f64,
    small_t_approx: f64,
}

#[derive(Serialize)]
struct EvalTable<'a> {
    params: ModelParams,
    rows: &'a [EvalRow],
}

pub const EVAL_HEADER: [&str; 5] = ["t", "survival", "cdf", "pdf", "small_t_approx"];

fn cmd_eval(a: &EvalArgs) -> Result<u8, Failure> {
    let p = model_params(&a.params)?;
    let spec = GridSpec {
        t_min: a.t_min,
        t_max: a.t_max,
        points: a.points,
        log: a.log_grid,
    };
    let grid = spec.build().map_err(|e| Failure::usage(e.to_string()))?;

    let rows = grid
        .iter()
        .map(|&t| {
            Ok(EvalRow {
                t,
                survival: exact_law::survival(&p, t)?,
                cdf: exact_law::cdf(&p, t)?,
                pdf: exact_law::pdf(&p, t)?,
                small_t_approx: exact_law::small_t_cdf_approx(&p, t)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    match a.format {
        Format::Json => write_json(a.output.as_deref(), &EvalTable { params: p, rows: &rows })?,
        Format::Csv => {
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.t, r.survival, r.cdf, r.pdf, r.small_t_approx])
                .collect();
            let mut out = open_output(a.output.as_deref())?;
            write_csv(&mut out, &EVAL_HEADER, &table)?;
            out.flush()?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SampleSummary {
    n: usize,
    censored: u64,
    mean: Option<f64>,
    q05: Option<f64>,
    q25: Option<f64>,
    median: Option<f64>,
    q75: Option<f64>,
    q95: Option<f64>,
    seed: u64,
    model: ModelTag,
    params: ModelParams,
}

/// Empirical quantile `x_(⌈qn⌉)` of sorted values.
fn order_statistic(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    Some(sorted[idx])
}

fn cmd_sample(a: &SampleArgs) -> Result<u8, Failure> {
    let p = model_params(&a.params)?;
    check_count("samples", a.samples)?;
    let opts = batch_options(a.horizon)?;

    let set = simulate::sample_batch_with(&p, a.samples, a.seed, model_tag(a.model), &opts)?;

    let mut out = open_output(Some(&a.output))?;
    for &v in &set.values {
        writeln!(out, "{}", fmt_f64(v))?;
    }
    out.flush()?;

    let mut sorted = set.values.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let mean = (!sorted.is_empty()).then(|| set.values.iter().sum::<f64>() / set.values.len() as f64);
    let summary = SampleSummary {
        n: set.values.len(),
        censored: set.censored,
        mean,
        q05: order_statistic(&sorted, 0.05),
        q25: order_statistic(&sorted, 0.25),
        median: order_statistic(&sorted, 0.5),
        q75: order_statistic(&sorted, 0.75),
        q95: order_statistic(&sorted, 0.95),
        seed: set.seed,
        model: set.model,
        params: p,
    };
    write_json(a.summary.as_deref(), &summary)?;
    Ok(0)
}

fn cmd_compare(a: &CompareArgs) -> Result<u8, Failure> {
    let p = model_params(&a.params)?;
    check_count("samples", a.samples)?;
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Failure::usage(format!("invalid value for --delta: must lie in (0, 1), got {}", a.delta)));
    }
    let opts = batch_options(a.horizon)?;

    let report = stats::compare_with(&p, a.samples, a.seed, model_tag(a.model), a.delta, &opts)?;
    if report.censored > 0 {
        eprintln!("note: {} censored draws excluded", report.censored);
    }
    write_json(a.output.as_deref(), &report)?;
    Ok(if report.pass { 0 } else { 1 })
}

pub const LIMITS_HEADER: [&str; 2] = ["n", "gap"];

fn cmd_limits(a: &LimitsArgs) -> Result<u8, Failure> {
    let regime = match a.regime {
        RegimeArg::FastSecond => Ok(LimitRegime::fast_second()),
        RegimeArg::FixedRatio => LimitRegime::fixed_ratio(a.alpha),
        RegimeArg::Quadratic => LimitRegime::quadratic_hazard(a.alpha),
    }
    .map_err(|e| Failure::usage(format!("invalid value for --alpha: {e}")))?;
    if a.n_values.is_empty()
        || a.n_values.iter().any(|n| !n.is_finite() || *n <= 0.0)
        || a.n_values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Failure::usage("invalid value for --n-values: need positive, strictly increasing values"));
    }

    let trace = asymptotics::regime_gap(
        &asymptotics::default_rule(regime),
        &regime,
        &asymptotics::default_grid(),
        &a.n_values,
    )?;
    let rows: Vec<Vec<f64>> = trace.iter().map(|(n, g)| vec![n, g]).collect();
    let mut out = open_output(a.output.as_deref())?;
    write_csv(&mut out, &LIMITS_HEADER, &rows)?;
    out.flush()?;
    Ok(0)
}
