//! Outage and meta-probability of the Rayleigh-designed selector, on its
//! own model and on Rician or Nakagami channels.
//!
//! With `c = -ln(1 - eps_n) / n` the Rayleigh selector transmits at
//! `log2(1 + c S)`, `S = sum x_i`, so its conditional outage is `F(c S)`.
//! All quantities below are expectations or tail probabilities of that
//! expression under the exact law of `S`.

use crate::channels::ChannelModel;
use crate::quad::integrate;
use crate::specfun::{ln_gamma, poisson_gamma_mixture, poisson_gamma_mixture_ln_pdf, reg_gamma_pair};
use crate::{check_probability, domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanOutageMethod {
    /// Adaptive quadrature against the exact density of the sum.
    Numeric,
    /// Second-order expansion around the power-law tail.
    PowerLawApprox,
    /// Large-n closed forms; takes `eps` in place of `eps_n`.
    WeakN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaProbMethod {
    Numeric,
    Chernoff,
}

/// A probability with an absolute error estimate. `clamped` marks values
/// that had to be cut back to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageValue {
    pub value: f64,
    pub abs_error: f64,
    pub clamped: bool,
}

impl OutageValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error: 0.0,
            clamped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffSolution {
    pub t_star: f64,
    pub bound_value: f64,
    pub clamped: bool,
}

/// `1 - (1 - ln(1 - eps_n)/n)^(-n)`.
pub fn mean_outage_exact_rayleigh(eps_n: f64, n: usize) -> Result<f64> {
    check_probability("eps_n", eps_n)?;
    let nf = n as f64;
    Ok(-(-nf * (-(-eps_n).ln_1p() / nf).ln_1p()).exp_m1())
}

/// `P[Erlang(n) > n ln(1 - eps) / ln(1 - eps_n)]`.
pub fn meta_prob_exact_rayleigh(eps_n: f64, eps: f64, n: usize) -> Result<f64> {
    check_probability("eps_n", eps_n)?;
    check_probability("eps", eps)?;
    let nf = n as f64;
    let x = nf * (-eps).ln_1p() / (-eps_n).ln_1p();
    Ok(reg_gamma_pair(nf, x)?.1)
}

/// Law of `S / lambda` for a sum of `n` i.i.d. powers.
#[derive(Debug, Clone, Copy)]
enum SumLaw {
    /// `Gamma(shape, 1)`.
    Gamma { shape: f64 },
    /// `sum_j Pois(j; mu) Gamma(shape + j, 1)`.
    Mixture { shape: f64, mu: f64 },
}

impl SumLaw {
    fn of(model: &ChannelModel, n: usize) -> Self {
        let nf = n as f64;
        match *model {
            ChannelModel::Rayleigh { .. } => Self::Gamma { shape: nf },
            ChannelModel::Nakagami { m, .. } => Self::Gamma { shape: nf * m },
            ChannelModel::Rician { k: 0.0, .. } => Self::Gamma { shape: nf },
            ChannelModel::Rician { k, .. } => Self::Mixture { shape: nf, mu: nf * k },
        }
    }

    fn mean(&self) -> f64 {
        match *self {
            Self::Gamma { shape } => shape,
            Self::Mixture { shape, mu } => shape + mu,
        }
    }

    /// `mean^2 / variance`, the shape of a moment-matched gamma law.
    fn effective_shape(&self) -> f64 {
        match *self {
            Self::Gamma { shape } => shape,
            Self::Mixture { shape, mu } => (shape + mu).powi(2) / (shape + 2.0 * mu),
        }
    }

    /// Exponent of the density near zero (`f(u) ~ u^(shape - 1)`).
    fn shape(&self) -> f64 {
        match *self {
            Self::Gamma { shape } | Self::Mixture { shape, .. } => shape,
        }
    }

    /// `ln(u f(u))` at `u = e^v`.
    fn ln_density_dv(&self, v: f64) -> f64 {
        let u = v.exp();
        match *self {
            Self::Gamma { shape } => shape * v - u - ln_gamma(shape),
            Self::Mixture { shape, mu } => poisson_gamma_mixture_ln_pdf(shape, mu, u) + v,
        }
    }

    /// `P[U > u]`.
    fn survival(&self, u: f64) -> Result<f64> {
        Ok(match *self {
            Self::Gamma { shape } => reg_gamma_pair(shape, u)?.1,
            Self::Mixture { shape, mu } => poisson_gamma_mixture(shape, mu, u)?.1,
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(domain("n", 0.0, "n >= 1"))
    }
}

/// Mean outage `E[F(c S)]` of the Rayleigh-designed rate on `true_model`.
pub fn mean_outage_mismatch(
    true_model: &ChannelModel,
    eps_n: f64,
    n: usize,
    method: MeanOutageMethod,
) -> Result<OutageValue> {
    true_model.validate()?;
    check_probability("eps_n", eps_n)?;
    check_n(n)?;
    match method {
        MeanOutageMethod::Numeric => mean_outage_numeric(true_model, eps_n, n),
        MeanOutageMethod::PowerLawApprox => {
            let tail = true_model.power_law();
            let (mean, var) = true_model.moments();
            let kappa = tail.kappa;
            let base = tail.alpha * (-(-eps_n).ln_1p() * mean).powf(1.0 / kappa);
            let corr = 1.0 + (1.0 - kappa) / (2.0 * n as f64 * kappa * kappa) * var / (mean * mean);
            Ok(OutageValue::exact(base * corr))
        }
        MeanOutageMethod::WeakN => {
            let eps = eps_n;
            let v = match *true_model {
                ChannelModel::Rayleigh { .. } => eps,
                ChannelModel::Rician { k, .. } => (k + 1.0) * (-k).exp() * eps,
                ChannelModel::Nakagami { m, .. } => (m * m.ln() + m * eps.ln() - ln_gamma(m + 1.0)).exp(),
            };
            Ok(OutageValue::exact(v))
        }
    }
}

fn mean_outage_numeric(model: &ChannelModel, eps_n: f64, n: usize) -> Result<OutageValue> {
    if let ChannelModel::Rayleigh { .. } = model {
        return Ok(OutageValue::exact(mean_outage_exact_rayleigh(eps_n, n)?));
    }
    let law = SumLaw::of(model, n);
    let c = -(-eps_n).ln_1p() / n as f64;
    let lambda = model.lambda();
    let tail = model.power_law();
    let ln_mean = law.mean().ln();
    let a_eff = law.effective_shape();
    // the integrand behaves like exp((shape + 1/kappa) v) to the left and like
    // the gamma tail of the sum to the right
    let v_lo = ln_mean - (50.0 / (law.shape() + 1.0 / tail.kappa) + 12.0 / a_eff.sqrt());
    let v_hi = ln_mean + (15.0 / a_eff.sqrt() + 60.0 / a_eff).ln_1p();
    let mut failure = None;
    let result = integrate(
        |v| {
            let y = c * lambda * v.exp();
            match model.cdf(y) {
                Ok(f) if f > 0.0 => (f.ln() + law.ln_density_dv(v)).exp(),
                Ok(_) => 0.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        v_lo,
        v_hi,
        0.0,
        1e-11,
        4000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let value = result.value.clamp(0.0, 1.0);
    Ok(OutageValue {
        value,
        abs_error: result.abs_error,
        clamped: value != result.value,
    })
}

/// Meta-probability `P[F(c S) > eps]` of the Rayleigh-designed rate on `true_model`.
pub fn meta_prob_mismatch(
    true_model: &ChannelModel,
    eps_n: f64,
    eps: f64,
    n: usize,
    method: MetaProbMethod,
) -> Result<OutageValue> {
    true_model.validate()?;
    check_probability("eps_n", eps_n)?;
    check_probability("eps", eps)?;
    check_n(n)?;
    match method {
        MetaProbMethod::Numeric => {
            let c = -(-eps_n).ln_1p() / n as f64;
            let threshold = true_model.quantile(eps)? / (c * true_model.lambda());
            Ok(OutageValue::exact(SumLaw::of(true_model, n).survival(threshold)?))
        }
        MetaProbMethod::Chernoff => {
            let s = chernoff(true_model, eps_n, eps, n)?;
            Ok(OutageValue {
                value: s.bound_value,
                abs_error: f64::NAN,
                clamped: s.clamped,
            })
        }
    }
}

/// Chernoff estimate `exp(-t x) M(t)^n` of `P[S > x]` with
/// `x = n (eps/alpha)^kappa / (-ln(1 - eps_n))`, at the minimising tilt.
pub fn chernoff(true_model: &ChannelModel, eps_n: f64, eps: f64, n: usize) -> Result<ChernoffSolution> {
    true_model.validate()?;
    check_probability("eps_n", eps_n)?;
    check_probability("eps", eps)?;
    check_n(n)?;
    let nf = n as f64;
    let lambda = true_model.lambda();
    let big_l = -(-eps_n).ln_1p();
    let tail = true_model.power_law();
    let x = nf * (eps / tail.alpha).powf(tail.kappa) / big_l;
    let t_star = match *true_model {
        ChannelModel::Rayleigh { .. } => nakagami_tilt(lambda, 1.0, eps, big_l),
        ChannelModel::Nakagami { m, .. } => nakagami_tilt(lambda, m, eps, big_l),
        ChannelModel::Rician { k, .. } => {
            // x u^2 - n lambda u - n lambda k = 0 with u = 1 - lambda t
            let b = nf * lambda;
            let u = (b + (b * b + 4.0 * x * b * k).sqrt()) / (2.0 * x);
            if !(u > 0.0) || !u.is_finite() {
                return Err(Error::NoValidTilt);
            }
            (1.0 - u) / lambda
        }
    };
    if !(t_star * lambda < 1.0) {
        return Err(Error::NoValidTilt);
    }
    if t_star <= 0.0 {
        log::warn!("Chernoff tilt t* = {t_star:.3e} is not positive; estimate clamped to 1");
        return Ok(ChernoffSolution {
            t_star,
            bound_value: 1.0,
            clamped: true,
        });
    }
    let ln_bound = -t_star * x + nf * true_model.ln_mgf(t_star)?;
    let clamped = ln_bound > 0.0;
    if clamped {
        log::warn!("Chernoff estimate exp({ln_bound:.3e}) exceeds 1; clamped");
    }
    Ok(ChernoffSolution {
        t_star,
        bound_value: ln_bound.min(0.0).exp(),
        clamped,
    })
}

/// `(1/lambda)(1 + m ln(1 - eps_n) (eps Gamma(m+1))^(-1/m))`.
fn nakagami_tilt(lambda: f64, m: f64, eps: f64, big_l: f64) -> f64 {
    let g = ((eps.ln() + ln_gamma(m + 1.0)) / m).exp();
    (1.0 - m * big_l / g) / lambda
}

/// Residual of the Rician tilt equation
/// `n lambda (1 - lambda t + k) + (eps n lambda e^k / ln(1 - eps_n)) (1 - lambda t)^2`.
pub fn rician_tilt_residual(lambda: f64, k: f64, eps: f64, eps_n: f64, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let u = 1.0 - lambda * t;
    nf * lambda * (u + k) + eps * nf * lambda * k.exp() / (-eps_n).ln_1p() * u * u
}

/// Large-`n` limit of the mean outage of the power-law selector at level
/// `eps_n` with tail fraction `beta`.
///
/// As `n` grows, `kappa_hat -> (1/beta) int_0^{y_beta} F(y)/y dy` and
/// `Z_(l) -> ln y_beta` with `y_beta = F^{-1}(beta)`, so the selected
/// quantile settles at `y_beta (eps_n/beta)^kappa_inf` and the outage at
/// `F` of that point.
pub fn powerlaw_mean_outage_limit(true_model: &ChannelModel, beta: f64, eps_n: f64) -> Result<f64> {
    true_model.validate()?;
    check_probability("beta", beta)?;
    check_probability("eps_n", eps_n)?;
    let y_beta = true_model.quantile(beta)?;
    let s_max = 80.0 * true_model.power_law().kappa;
    let mut failure = None;
    let r = integrate(
        |s| match true_model.cdf(y_beta * (-s).exp()) {
            Ok(f) => f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        s_max,
        1e-15 * beta,
        1e-12,
        2000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let kappa_inf = r.value / beta;
    let y = y_beta * (kappa_inf * (eps_n / beta).ln()).exp();
    true_model.cdf(y)
}
