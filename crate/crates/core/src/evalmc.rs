//! Reproducible Monte Carlo evaluation of a selector on a true channel.
//!
//! Each trial draws a training sample, selects a rate `R`, and records the
//! conditional outage `q = F(2^R - 1)` of the true law. Using `q` directly
//! rather than sampling a test channel removes the inner sampling noise
//! from both the mean outage and the meta-probability.
//!
//! Trial `t` of sweep point `a` uses its own ChaCha8 stream derived from
//! `(seed, a, t)`, and per-trial results are reduced in trial order, so a
//! report is a pure function of its configuration whatever the number of
//! worker threads.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::channels::ChannelModel;
use crate::learn::TrainingSample;
use crate::rateselect::{Constraint, PreparedSelector, ReliabilityTarget, SelectorSpec};
use crate::{domain, Error, Result};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub true_model: ChannelModel,
    pub selector: SelectorSpec,
    pub target: ReliabilityTarget,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.true_model.validate()?;
        self.selector.validate()?;
        self.target.validate()?;
        if self.n == 0 {
            return Err(domain("n", 0.0, "n >= 1"));
        }
        if self.trials == 0 {
            return Err(domain("trials", 0.0, "trials >= 1"));
        }
        Ok(())
    }
}

/// Point estimate with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Normal-approximation interval for the mean of `values`.
    pub fn normal_mean(sum: f64, sum_sq_dev: f64, count: usize) -> Self {
        let t = count as f64;
        let mean = sum / t;
        let var = if count > 1 { sum_sq_dev / (t - 1.0) } else { 0.0 };
        let h = Z95 * (var / t).sqrt();
        Self {
            estimate: mean,
            lo: mean - h,
            hi: mean + h,
        }
    }

    /// Wilson score interval for `successes` out of `count`.
    pub fn wilson(successes: usize, count: usize) -> Self {
        let t = count as f64;
        let p = successes as f64 / t;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / t;
        let centre = (p + z2 / (2.0 * t)) / denom;
        let h = Z95 / denom * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
        Self {
            estimate: p,
            lo: if successes == 0 { 0.0 } else { (centre - h).max(0.0) },
            hi: if successes == count { 1.0 } else { (centre + h).min(1.0) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mean_outage: Interval,
    pub meta_prob: Interval,
    pub throughput_ratio: Interval,
    pub rate_mean: f64,
    pub rate_stddev: f64,
    pub zero_rate_fraction: f64,
    pub trials: usize,
    /// Trials whose selector failed after the first; counted as rate 0.
    pub failed_trials: usize,
    /// `R_eps(F)` of the true model.
    pub capacity: f64,
    pub eps_n: Option<f64>,
    pub order_index: Option<usize>,
}

/// Per-trial random streams.
pub mod stream {
    use super::*;

    fn splitmix64(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Generator at stream position 0 for a 64-bit seed.
    pub fn base_rng(seed: u64) -> ChaCha8Rng {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }

    /// Stream for one trial of one sweep point.
    pub fn trial_rng(base: &ChaCha8Rng, axis_index: usize, trial: usize) -> ChaCha8Rng {
        debug_assert!(trial < 1 << 40 && axis_index < 1 << 24);
        let mut rng = base.clone();
        rng.set_stream(((axis_index as u64) << 40) | trial as u64);
        rng
    }
}

/// Runs `trials` independent draws of `n` samples from `model` through
/// `rule` and summarises the results against `target`.
///
/// An error on trial 0 is returned; later errors are logged and counted as
/// zero-rate trials.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_rule<F>(
    model: &ChannelModel,
    target: &ReliabilityTarget,
    n: usize,
    trials: usize,
    seed: u64,
    axis_index: usize,
    workers: Option<usize>,
    rule: F,
) -> Result<EvalReport>
where
    F: Fn(&TrainingSample) -> Result<f64> + Sync,
{
    model.validate()?;
    target.validate()?;
    if n == 0 || trials == 0 {
        return Err(domain("n / trials", 0.0, ">= 1"));
    }
    let eps = target.epsilon;
    let capacity = model.epsilon_outage_capacity(eps)?;
    let base = stream::base_rng(seed);
    let sampler = model.sampler();
    let run = |t: usize| -> Result<(f64, f64)> {
        let mut rng = stream::trial_rng(&base, axis_index, t);
        let values: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let rate = rule(&TrainingSample::new(values)?)?;
        let q = if rate > 0.0 {
            model.cdf((rate * std::f64::consts::LN_2).exp_m1())?
        } else {
            0.0
        };
        Ok((rate, q))
    };
    let outcomes = run_trials(trials, workers, run)?;

    let mut failed = 0usize;
    let mut first_error = None;
    let mut results = Vec::with_capacity(trials);
    for (t, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => results.push(v),
            Err(e) if t == 0 => {
                first_error = Some(e);
                break;
            }
            Err(e) => {
                log::debug!("trial {t} failed: {e}");
                failed += 1;
                results.push((0.0, 0.0));
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    if failed > 0 {
        log::warn!("{failed} of {trials} trials failed and were counted as rate 0");
    }
    Ok(summarise(&results, eps, capacity, failed))
}

fn run_trials<F>(trials: usize, workers: Option<usize>, run: F) -> Result<Vec<Result<(f64, f64)>>>
where
    F: Fn(usize) -> Result<(f64, f64)> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match workers {
            Some(1) => Ok((0..trials).map(&run).collect()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|_| domain("workers", w as f64, "a buildable thread pool"))?;
                Ok(pool.install(|| (0..trials).into_par_iter().map(&run).collect()))
            }
            None => Ok((0..trials).into_par_iter().map(&run).collect()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok((0..trials).map(&run).collect())
    }
}

fn summarise(results: &[(f64, f64)], eps: f64, capacity: f64, failed: usize) -> EvalReport {
    let t = results.len();
    let tf = t as f64;
    let rate_sum: f64 = results.iter().map(|r| r.0).sum();
    let q_sum: f64 = results.iter().map(|r| r.1).sum();
    let good_sum: f64 = results.iter().map(|r| r.0 * (1.0 - r.1)).sum();
    let (rate_mean, q_mean, good_mean) = (rate_sum / tf, q_sum / tf, good_sum / tf);
    let rate_ss: f64 = results.iter().map(|r| (r.0 - rate_mean).powi(2)).sum();
    let q_ss: f64 = results.iter().map(|r| (r.1 - q_mean).powi(2)).sum();
    let good_ss: f64 = results.iter().map(|r| (r.0 * (1.0 - r.1) - good_mean).powi(2)).sum();
    let exceed = results.iter().filter(|r| r.1 > eps).count();
    let zeros = results.iter().filter(|r| r.0 == 0.0).count();

    let mut mean_outage = Interval::normal_mean(q_sum, q_ss, t);
    mean_outage.lo = mean_outage.lo.max(0.0);
    mean_outage.hi = mean_outage.hi.min(1.0);
    let good = Interval::normal_mean(good_sum, good_ss, t);
    let norm = capacity * (1.0 - eps);
    let throughput_ratio = Interval {
        estimate: good.estimate / norm,
        lo: (good.lo / norm).max(0.0),
        hi: good.hi / norm,
    };
    EvalReport {
        mean_outage,
        meta_prob: Interval::wilson(exceed, t),
        throughput_ratio,
        rate_mean,
        rate_stddev: if t > 1 { (rate_ss / (tf - 1.0)).sqrt() } else { 0.0 },
        zero_rate_fraction: zeros as f64 / tf,
        trials: t,
        failed_trials: failed,
        capacity,
        eps_n: None,
        order_index: None,
    }
}

/// Evaluates `config` using all available worker threads.
pub fn evaluate(config: &EvalConfig) -> Result<EvalReport> {
    evaluate_with(config, 0, None)
}

/// Evaluates `config` as sweep point `axis_index` with an explicit number
/// of worker threads (`None` for the global pool).
pub fn evaluate_with(config: &EvalConfig, axis_index: usize, workers: Option<usize>) -> Result<EvalReport> {
    config.validate()?;
    let prepared = PreparedSelector::new(config.selector, config.target, config.n)?;
    let mut report = evaluate_rule(
        &config.true_model,
        &config.target,
        config.n,
        config.trials,
        config.seed,
        axis_index,
        workers,
        |s| prepared.rate(s),
    )?;
    report.eps_n = prepared.eps_n();
    report.order_index = prepared.order_index();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    K,
    M,
    Epsilon,
    Xi,
    Beta,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::N => "n",
            Self::K => "k",
            Self::M => "m",
            Self::Epsilon => "epsilon",
            Self::Xi => "xi",
            Self::Beta => "beta",
        }
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(&self, base: &EvalConfig, value: f64) -> Result<EvalConfig> {
        let mut c = *base;
        match self {
            Self::N => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(domain("n", value, "a positive integer"));
                }
                c.n = value as usize;
            }
            Self::K => match c.true_model {
                ChannelModel::Rician { lambda, .. } => c.true_model = ChannelModel::rician(lambda, value)?,
                _ => return Err(Error::Unsupported("axis k requires a Rician true model")),
            },
            Self::M => match c.true_model {
                ChannelModel::Nakagami { lambda, .. } => c.true_model = ChannelModel::nakagami(lambda, value)?,
                _ => return Err(Error::Unsupported("axis m requires a Nakagami true model")),
            },
            Self::Epsilon => c.target.epsilon = value,
            Self::Xi => match c.target.constraint {
                Constraint::ProbablyCorrect { .. } => c.target.constraint = Constraint::ProbablyCorrect { xi: value },
                Constraint::Averaged => return Err(Error::Unsupported("axis xi requires the pcr constraint")),
            },
            Self::Beta => match c.selector {
                SelectorSpec::PowerLawAsymptotic { .. } => {
                    c.selector = SelectorSpec::PowerLawAsymptotic { beta: value }
                }
                SelectorSpec::PowerLawNonAsymptotic { .. } => {
                    c.selector = SelectorSpec::PowerLawNonAsymptotic { beta: value }
                }
                _ => return Err(Error::Unsupported("axis beta requires a power-law selector")),
            },
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidAxis(pub String);

impl fmt::Display for InvalidAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown sweep axis {:?} (expected n, k, m, epsilon, xi or beta)",
            self.0
        )
    }
}

impl std::error::Error for InvalidAxis {}

impl FromStr for SweepAxis {
    type Err = InvalidAxis;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "n" => Ok(Self::N),
            "k" => Ok(Self::K),
            "m" => Ok(Self::M),
            "epsilon" | "eps" => Ok(Self::Epsilon),
            "xi" => Ok(Self::Xi),
            "beta" => Ok(Self::Beta),
            other => Err(InvalidAxis(other.to_string())),
        }
    }
}

/// Evaluates `base` at each value of `axis`, in order. Point `i` is seeded
/// with `(base.seed, i, trial)`.
pub fn sweep(
    base: &EvalConfig,
    axis: SweepAxis,
    values: &[f64],
    workers: Option<usize>,
) -> Result<Vec<(f64, EvalReport)>> {
    // validate every point before spending time on any of them
    let configs = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(values.len());
    for (i, (config, &v)) in configs.iter().zip(values).enumerate() {
        log::info!("sweep {axis} = {v} ({}/{})", i + 1, values.len());
        out.push((v, evaluate_with(config, i, workers)?));
    }
    Ok(out)
}
