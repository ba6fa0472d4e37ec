//! Rate selection for wireless links under statistical reliability
//! constraints, when the channel law is known only through training samples.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: incomplete gamma/beta, Marcum Q, normal quantile.
//! * [`channels`]: Rayleigh, Rician and Nakagami-m received-power laws.
//! * [`learn`]: training samples, the Rayleigh MLE and the power-law tail fit.
//! * [`rateselect`]: the backoff `eps_n` for each selector and the rate map.
//! * [`mismatch`]: exact and approximate outage / meta-probability.
//! * [`evalmc`]: reproducible Monte Carlo evaluation and parameter sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod evalmc;
pub mod learn;
pub mod mismatch;
pub mod quad;
pub mod rateselect;
pub mod roots;
pub mod specfun;

pub use channels::{ChannelModel, PowerLawTail};
pub use evalmc::{evaluate, sweep, EvalConfig, EvalReport, SweepAxis};
pub use learn::{TailFit, TrainingSample};
pub use rateselect::{select_rate, Constraint, PreparedSelector, ReliabilityTarget, SelectorSpec, TailMode};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is invalid (expected {expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(transparent)]
    Special(#[from] specfun::SpecialError),
    #[error(transparent)]
    Root(#[from] roots::RootError),
    #[error("training sample is empty")]
    EmptySample,
    #[error("tail fit needs at least {needed} order statistics, got l = {l}")]
    InsufficientTail { l: usize, needed: usize },
    #[error("order index {l} out of range for a sample of size {n}")]
    Index { l: usize, n: usize },
    #[error("no eps_n satisfies the constraint (smallest achievable value {smallest:.6e})")]
    NoSolution { smallest: f64 },
    #[error("no admissible Chernoff tilt below 1/lambda")]
    NoValidTilt,
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain { what, value, expected }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(what, p, "0 < p < 1"))
    }
}

/// `ceil(x)`, except that values within a few ulps above an integer
/// (products like `0.01 * 300`) round to that integer.
pub(crate) fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `floor(x)`, except that values within a few ulps below an integer round
/// up to it.
pub(crate) fn floor_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}
