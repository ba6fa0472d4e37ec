//! Special functions with explicit accuracy contracts.
//!
//! Everything here is a pure function of its arguments. The incomplete
//! gamma and beta functions return both the regularized value and its
//! complement so callers in the far tails never form `1 - p` themselves.

mod beta;
mod gamma;
mod mixture;
mod normal;

pub use beta::{reg_inc_beta, reg_inc_beta_pair};
pub use gamma::{
    inv_reg_lower_gamma, inv_reg_lower_gamma_with, log_gamma, reg_gamma_pair, reg_lower_gamma, reg_upper_gamma,
};
pub use mixture::{marcum_q1, marcum_q1_complement, poisson_gamma_mixture, poisson_gamma_mixture_ln_pdf};
pub use normal::{std_normal_quantile, std_normal_sf};

#[allow(unused_imports)]
pub(crate) use gamma::{ln_gamma, ln_reg_gamma_pair};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument {value} outside its domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{function}: no convergence after {iterations} iterations")]
    NoConvergence { function: &'static str, iterations: usize },
}

pub(crate) fn domain(function: &'static str, value: f64, expected: &'static str) -> SpecialError {
    SpecialError::Domain {
        function,
        value,
        expected,
    }
}

/// Tolerance and iteration budget for iterative inversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracySpec {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl AccuracySpec {
    pub fn new(rel_tol: f64, max_iter: usize) -> Result<Self, SpecialError> {
        if !(rel_tol > 0.0) {
            return Err(domain("AccuracySpec", rel_tol, "rel_tol > 0"));
        }
        if max_iter == 0 {
            return Err(domain("AccuracySpec", 0.0, "max_iter >= 1"));
        }
        Ok(Self { rel_tol, max_iter })
    }
}

impl Default for AccuracySpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 400,
        }
    }
}

/// `ln(1 + u) - u`, accurate for small `u`.
pub(crate) fn log1pmx(u: f64) -> f64 {
    if u.abs() < 0.25 {
        // -u^2/2 + u^3/3 - u^4/4 + ...
        let mut term = -u * u;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            let add = term / k;
            sum += add;
            if add.abs() <= f64::EPSILON * 0.25 * sum.abs() {
                break;
            }
            term *= -u;
            k += 1.0;
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
