//! Backoff `eps_n` and the map from a training sample to a rate.
//!
//! Every selector has the form `R(x^n) = log2(1 + F_hat^{-1}(eps_n))`: an
//! estimated quantile taken at a level `eps_n` below the target `eps`, with
//! `eps_n` chosen so that the reliability constraint holds over the
//! randomness of the training sample.

use std::f64::consts::LN_2;

use crate::learn::{fit_power_tail, tail_count, TailFit, TrainingSample};
use crate::mismatch::meta_prob_exact_rayleigh;
use crate::roots::brent;
use crate::specfun::{ln_reg_gamma_pair, reg_inc_beta_pair, reg_lower_gamma, std_normal_quantile};
use crate::{check_probability, domain, floor_tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// Mean outage over training samples at most `eps`.
    Averaged,
    /// `P[outage > eps] <= xi` over training samples.
    ProbablyCorrect { xi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget {
    pub epsilon: f64,
    pub constraint: Constraint,
}

impl ReliabilityTarget {
    pub fn averaged(epsilon: f64) -> Result<Self> {
        check_probability("epsilon", epsilon)?;
        Ok(Self {
            epsilon,
            constraint: Constraint::Averaged,
        })
    }

    pub fn probably_correct(epsilon: f64, xi: f64) -> Result<Self> {
        check_probability("epsilon", epsilon)?;
        check_probability("xi", xi)?;
        Ok(Self {
            epsilon,
            constraint: Constraint::ProbablyCorrect { xi },
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.constraint {
            Constraint::Averaged => Self::averaged(self.epsilon),
            Constraint::ProbablyCorrect { xi } => Self::probably_correct(self.epsilon, xi),
        }
        .map(|_| ())
    }

    pub fn xi(&self) -> Option<f64> {
        match self.constraint {
            Constraint::Averaged => None,
            Constraint::ProbablyCorrect { xi } => Some(xi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectorSpec {
    ParametricRayleigh,
    NonParametric,
    PowerLawAsymptotic { beta: f64 },
    PowerLawNonAsymptotic { beta: f64 },
    PlugInRayleigh,
    PlugInNonParametric,
}

impl SelectorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PowerLawAsymptotic { beta } | Self::PowerLawNonAsymptotic { beta } => check_probability("beta", beta),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ParametricRayleigh => "rayleigh",
            Self::NonParametric => "nonparametric",
            Self::PowerLawAsymptotic { .. } => "powerlaw-asym",
            Self::PowerLawNonAsymptotic { .. } => "powerlaw-nonasym",
            Self::PlugInRayleigh => "plugin-rayleigh",
            Self::PlugInNonParametric => "plugin-nonparametric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Asymptotic,
    NonAsymptotic,
}

fn check_n(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(domain("n", 0.0, "n >= 1"))
    }
}

// ---------------------------------------------------------------------------
// Rayleigh

/// `eps_n = 1 - exp(-n ((1 - eps)^(-1/n) - 1))`, the level at which the mean
/// outage of the Rayleigh selector equals `eps` for every `lambda`.
pub fn epsn_rayleigh_ar(eps: f64, n: usize) -> Result<f64> {
    check_probability("eps", eps)?;
    check_n(n)?;
    let nf = n as f64;
    Ok(-(-nf * (-(-eps).ln_1p() / nf).exp_m1()).exp_m1())
}

/// Largest `eps_n` with `P[Erlang(n) > n ln(1-eps)/ln(1-eps_n)] <= xi`.
pub fn epsn_rayleigh_pcr(eps: f64, xi: f64, n: usize) -> Result<f64> {
    check_probability("eps", eps)?;
    check_probability("xi", xi)?;
    check_n(n)?;
    let nf = n as f64;
    let ln_keep = (-eps).ln_1p();
    let ln_xi = xi.ln();
    // log meta-probability minus log xi, increasing in v = ln eps_n
    let f = |v: f64| -> f64 {
        let x = nf * ln_keep / (-v.exp()).ln_1p();
        match ln_reg_gamma_pair(nf, x) {
            Ok((_, ln_q)) => ln_q.max(-745.0) - ln_xi,
            Err(_) => f64::NAN,
        }
    };
    let lo = (1e-300f64).ln();
    let hi = (-1e-12f64).ln_1p();
    let f_lo = f(lo);
    if f_lo > 0.0 {
        return Err(Error::NoSolution {
            smallest: (f_lo + ln_xi).exp(),
        });
    }
    if f(hi) <= 0.0 {
        return Ok(hi.exp());
    }
    let v = brent(f, lo, hi, 1e-14, 500)?;
    Ok(v.exp())
}

/// `log2(1 - ln(1 - eps_n) * mean(x))`.
pub fn rate_rayleigh(sample: &TrainingSample, eps_n: f64) -> Result<f64> {
    check_probability("eps_n", eps_n)?;
    Ok(rayleigh_rate_from_mean(sample.mean(), eps_n))
}

pub(crate) fn rayleigh_rate_from_mean(mean: f64, eps_n: f64) -> f64 {
    (-(-eps_n).ln_1p() * mean).ln_1p() / LN_2
}

// ---------------------------------------------------------------------------
// Non-parametric

/// `l = floor(eps (n + 1))`, capped at `n`; `0` means rate zero.
pub fn nonparam_l_ar(eps: f64, n: usize) -> Result<usize> {
    check_probability("eps", eps)?;
    check_n(n)?;
    Ok(floor_tol(eps * (n as f64 + 1.0)).min(n))
}

/// `P[outage of x_(l) > eps] = 1 - I_eps(l, n + 1 - l) = P[Bin(n, eps) <= l - 1]`.
pub fn nonparam_meta_prob(eps: f64, l: usize, n: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    if l > n {
        return Err(Error::Index { l, n });
    }
    Ok(reg_inc_beta_pair(eps, l as f64, (n + 1 - l) as f64)?.1)
}

/// Largest `l` with `1 - I_eps(l, n + 1 - l) <= xi`, or `0` if none.
pub fn nonparam_l_pcr(eps: f64, xi: f64, n: usize) -> Result<usize> {
    check_probability("eps", eps)?;
    check_probability("xi", xi)?;
    check_n(n)?;
    // invariant: lo feasible (0 by convention), hi infeasible (n + 1 by convention)
    let (mut lo, mut hi) = (0usize, n + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if nonparam_meta_prob(eps, mid, n)? <= xi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `log2(1 + x_(l))` for `1 <= l <= n`.
pub fn rate_nonparam(sample: &TrainingSample, l: usize) -> Result<f64> {
    Ok(sample.kth_smallest(l)?.ln_1p() / LN_2)
}

/// `min(floor(n eps + 1), n)`.
pub fn plug_in_nonparam_index(eps: f64, n: usize) -> Result<usize> {
    check_probability("eps", eps)?;
    check_n(n)?;
    Ok(floor_tol(n as f64 * eps + 1.0).min(n))
}

// ---------------------------------------------------------------------------
// Power-law tail

/// `V = (1 - beta + ln^2(eps / beta)) / beta`, the normalised asymptotic
/// variance of the extrapolated log-quantile.
pub fn v_bar(eps: f64, beta: f64) -> f64 {
    let r = (eps / beta).ln();
    (1.0 - beta + r * r) / beta
}

/// `eps_n` for the power-law selector.
///
/// Asymptotic: `eps` under the averaged constraint, and
/// `eps exp(-sqrt(V/n) Q^{-1}(xi))` under the probably-correct one.
/// Non-asymptotic (probably-correct only): the largest `eps_n` for which
/// [`nonasymptotic_bound`] does not exceed `xi`.
pub fn epsn_powerlaw(target: &ReliabilityTarget, n: usize, beta: f64, mode: TailMode) -> Result<f64> {
    target.validate()?;
    check_probability("beta", beta)?;
    check_n(n)?;
    let eps = target.epsilon;
    match (mode, target.constraint) {
        (TailMode::Asymptotic, Constraint::Averaged) => Ok(eps),
        (TailMode::Asymptotic, Constraint::ProbablyCorrect { xi }) => {
            let z = std_normal_quantile(xi)?;
            Ok(eps * (-(v_bar(eps, beta) / n as f64).sqrt() * z).exp())
        }
        (TailMode::NonAsymptotic, Constraint::Averaged) => Err(Error::Unsupported(
            "the non-asymptotic power-law rule is defined for the probably-correct constraint only",
        )),
        (TailMode::NonAsymptotic, Constraint::ProbablyCorrect { xi }) => {
            let l = tail_count(beta, n);
            match l {
                0 | 1 => Err(Error::InsufficientTail { l, needed: 3 }),
                2 => {
                    log::warn!("non-asymptotic power-law rule needs l >= 3 (l = 2); using the asymptotic eps_n");
                    epsn_powerlaw(target, n, beta, TailMode::Asymptotic)
                }
                _ => NonAsymptoticBound::new(eps, l, n)?.solve(xi),
            }
        }
    }
}

const TAU_GRID: usize = 512;

/// Pre-tabulated pieces of the non-asymptotic bound for fixed `(eps, l, n)`.
pub struct NonAsymptoticBound {
    eps: f64,
    l: usize,
    n: usize,
    /// `ln(tau_j / eps)` on a log-spaced grid over `[eps, 1]`.
    ln_ratio: Vec<f64>,
    /// `1 - I_{tau_j}(l, n + 1 - l)`.
    order_term: Vec<f64>,
}

impl NonAsymptoticBound {
    pub fn new(eps: f64, l: usize, n: usize) -> Result<Self> {
        check_probability("eps", eps)?;
        if l < 3 || l > n {
            return Err(Error::InsufficientTail { l, needed: 3 });
        }
        let span = -eps.ln();
        let ln_ratio: Vec<f64> = (0..TAU_GRID).map(|j| span * j as f64 / (TAU_GRID - 1) as f64).collect();
        let order_term = ln_ratio
            .iter()
            .map(|&r| Self::order_term_at(eps * r.exp(), l, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            eps,
            l,
            n,
            ln_ratio,
            order_term,
        })
    }

    fn order_term_at(tau: f64, l: usize, n: usize) -> Result<f64> {
        Ok(reg_inc_beta_pair(tau.min(1.0), l as f64, (n + 1 - l) as f64)?.1)
    }

    /// `P(l - 1, l ln(tau/eps) / (-ln(n eps_n / l)))`.
    fn spread_term(&self, ln_ratio: f64, scale: f64) -> Result<f64> {
        Ok(reg_lower_gamma((self.l - 1) as f64, self.l as f64 * ln_ratio / scale)?)
    }

    /// `min over tau in [eps, 1]` of
    /// `1 - I_tau(l, n + 1 - l) + P(l - 1, l ln(eps/tau) / ln(n eps_n / l))`.
    ///
    /// Grid search followed by golden-section refinement around the best node.
    pub fn evaluate(&self, eps_n: f64) -> Result<f64> {
        let (l, n) = (self.l as f64, self.n as f64);
        if !(eps_n > 0.0 && eps_n < l / n) {
            return Err(domain("eps_n", eps_n, "0 < eps_n < l/n"));
        }
        let scale = -(n * eps_n / l).ln();
        let mut best = (0usize, f64::INFINITY);
        for (j, (&r, &a)) in self.ln_ratio.iter().zip(&self.order_term).enumerate() {
            let v = a + self.spread_term(r, scale)?;
            if v < best.1 {
                best = (j, v);
            }
        }
        let (j, mut value) = best;
        let lo = self.ln_ratio[j.saturating_sub(1)];
        let hi = self.ln_ratio[(j + 1).min(TAU_GRID - 1)];
        let g = |r: f64| -> Result<f64> {
            Ok(Self::order_term_at(self.eps * r.exp(), self.l, self.n)? + self.spread_term(r, scale)?)
        };
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, mut fd) = (g(c)?, g(d)?);
        while (b - a).abs() > 1e-10 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = g(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = g(d)?;
            }
        }
        value = value.min(fc).min(fd);
        Ok(value)
    }

    /// Largest `eps_n` in `(0, l/n)` with bound `<= xi`, to `|bound - xi| <= 1e-6`
    /// or a relative bracket width of `1e-12`.
    pub fn solve(&self, xi: f64) -> Result<f64> {
        check_probability("xi", xi)?;
        let top = (self.l as f64 / self.n as f64).ln();
        let mut lo = top - 1.0;
        let mut hi = top;
        let mut b_lo = self.evaluate(lo.exp())?;
        while b_lo > xi {
            hi = lo;
            lo = top - 2.0 * (top - lo);
            if lo < (1e-300f64).ln() {
                return Err(Error::NoSolution { smallest: b_lo });
            }
            b_lo = self.evaluate(lo.exp())?;
        }
        // bisection on ln eps_n; lo stays feasible, hi infeasible
        for _ in 0..200 {
            if xi - b_lo <= 1e-6 || hi - lo <= 1e-12 * lo.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let b = self.evaluate(mid.exp())?;
            if b <= xi {
                lo = mid;
                b_lo = b;
            } else {
                hi = mid;
            }
        }
        Ok(lo.exp())
    }
}

/// The non-asymptotic probably-correct bound at a given `eps_n`.
pub fn nonasymptotic_bound(eps: f64, l: usize, n: usize, eps_n: f64) -> Result<f64> {
    NonAsymptoticBound::new(eps, l, n)?.evaluate(eps_n)
}

/// `log2(1 + exp(F_Z_hat^{-1}(eps_n)))`.
pub fn rate_powerlaw(fit: &TailFit, eps_n: f64) -> Result<f64> {
    check_probability("eps_n", eps_n)?;
    Ok(fit.tail_quantile(eps_n).exp().ln_1p() / LN_2)
}

// ---------------------------------------------------------------------------
// Dispatch

#[derive(Debug, Clone, Copy, PartialEq)]
enum Plan {
    /// Rayleigh MLE at level `eps_n`.
    Rayleigh { eps_n: f64 },
    /// `x_(l)`; `l = 0` is rate zero.
    Order { l: usize },
    /// Power-law fit with `beta` at level `eps_n`.
    PowerLaw { beta: f64, eps_n: f64 },
}

/// A selector with its sample-independent part (`eps_n` or `l`) solved for
/// one `(target, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedSelector {
    pub spec: SelectorSpec,
    pub target: ReliabilityTarget,
    pub n: usize,
    plan: Plan,
}

impl PreparedSelector {
    pub fn new(spec: SelectorSpec, target: ReliabilityTarget, n: usize) -> Result<Self> {
        spec.validate()?;
        target.validate()?;
        check_n(n)?;
        let eps = target.epsilon;
        let plan = match (spec, target.constraint) {
            (SelectorSpec::ParametricRayleigh, Constraint::Averaged) => Plan::Rayleigh {
                eps_n: epsn_rayleigh_ar(eps, n)?,
            },
            (SelectorSpec::ParametricRayleigh, Constraint::ProbablyCorrect { xi }) => Plan::Rayleigh {
                eps_n: epsn_rayleigh_pcr(eps, xi, n)?,
            },
            (SelectorSpec::NonParametric, Constraint::Averaged) => Plan::Order {
                l: nonparam_l_ar(eps, n)?,
            },
            (SelectorSpec::NonParametric, Constraint::ProbablyCorrect { xi }) => Plan::Order {
                l: nonparam_l_pcr(eps, xi, n)?,
            },
            (SelectorSpec::PowerLawAsymptotic { beta }, _) | (SelectorSpec::PowerLawNonAsymptotic { beta }, _) => {
                let l = tail_count(beta, n);
                if l < 2 {
                    return Err(Error::InsufficientTail { l, needed: 2 });
                }
                let mode = if matches!(spec, SelectorSpec::PowerLawAsymptotic { .. }) {
                    TailMode::Asymptotic
                } else {
                    TailMode::NonAsymptotic
                };
                Plan::PowerLaw {
                    beta,
                    eps_n: epsn_powerlaw(&target, n, beta, mode)?,
                }
            }
            (SelectorSpec::PlugInRayleigh, _) => Plan::Rayleigh { eps_n: eps },
            (SelectorSpec::PlugInNonParametric, _) => Plan::Order {
                l: plug_in_nonparam_index(eps, n)?,
            },
        };
        Ok(Self { spec, target, n, plan })
    }

    /// The backoff level, for the selectors that have one.
    pub fn eps_n(&self) -> Option<f64> {
        match self.plan {
            Plan::Rayleigh { eps_n } | Plan::PowerLaw { eps_n, .. } => Some(eps_n),
            Plan::Order { .. } => None,
        }
    }

    /// The order-statistic index, for the non-parametric selectors.
    pub fn order_index(&self) -> Option<usize> {
        match self.plan {
            Plan::Order { l } => Some(l),
            _ => None,
        }
    }

    pub fn rate(&self, sample: &TrainingSample) -> Result<f64> {
        if sample.len() != self.n {
            return Err(domain("sample size", sample.len() as f64, "equal to the prepared n"));
        }
        match self.plan {
            Plan::Rayleigh { eps_n } => rate_rayleigh(sample, eps_n),
            Plan::Order { l: 0 } => Ok(0.0),
            Plan::Order { l } => rate_nonparam(sample, l),
            Plan::PowerLaw { beta, eps_n } => rate_powerlaw(&fit_power_tail(sample, beta)?, eps_n),
        }
    }
}

/// Selects a rate in bits per channel use. Zero is a valid outcome.
pub fn select_rate(spec: SelectorSpec, target: &ReliabilityTarget, sample: &TrainingSample) -> Result<f64> {
    PreparedSelector::new(spec, *target, sample.len())?.rate(sample)
}

/// Meta-probability of the Rayleigh selector at its own `eps_n`; a shortcut
/// used by tests and the acceptance suite.
pub fn rayleigh_pcr_check(eps: f64, xi: f64, n: usize) -> Result<f64> {
    let eps_n = epsn_rayleigh_pcr(eps, xi, n)?;
    meta_prob_exact_rayleigh(eps_n, eps, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelModel;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn target_validation() {
        assert!(ReliabilityTarget::averaged(0.0).is_err());
        assert!(ReliabilityTarget::averaged(1.0).is_err());
        assert!(ReliabilityTarget::probably_correct(0.1, 1.0).is_err());
        assert_eq!(ReliabilityTarget::probably_correct(0.1, 0.2).unwrap().xi(), Some(0.2));
        assert!(SelectorSpec::PowerLawAsymptotic { beta: 1.5 }.validate().is_err());
    }

    #[test]
    fn epsn_ar_examples() {
        assert!(rel(epsn_rayleigh_ar(1e-3, 1).unwrap(), 1.000_500_166_624_841_5e-3) < 1e-14);
        assert!(rel(epsn_rayleigh_ar(1e-3, 100).unwrap(), 1.000_005_000_016_245_4e-3) < 1e-13);
        assert!(rel(epsn_rayleigh_ar(1e-3, 1_000_000).unwrap(), 1e-3) < 1e-9);
        assert!(epsn_rayleigh_ar(1e-3, 0).is_err());
    }

    #[test]
    fn epsn_pcr_examples() {
        let e = epsn_rayleigh_pcr(1e-4, 1e-3, 100).unwrap();
        assert!(rel(e, 7.475_597_294_738_376e-5) < 1e-9, "{e}");
        for &(eps, xi, n) in &[(1e-3, 1e-3, 1), (1e-5, 0.1, 10_000), (0.2, 0.01, 7)] {
            let meta = rayleigh_pcr_check(eps, xi, n).unwrap();
            assert!((meta - xi).abs() <= 1e-8 * xi.max(1e-3), "{meta} vs {xi}");
        }
        // xi -> 0.5 approaches the averaged level
        let ar = epsn_rayleigh_ar(1e-3, 10_000).unwrap();
        let pcr = epsn_rayleigh_pcr(1e-3, 0.4999, 10_000).unwrap();
        assert!(rel(pcr, ar) < 0.1);
    }

    #[test]
    fn rate_rayleigh_examples() {
        let s = TrainingSample::new(vec![0.5, 1.5]).unwrap();
        assert!((rate_rayleigh(&s, 1e-3).unwrap() - 1.442_695_281_398_345_4e-3).abs() < 1e-16);
        assert!(rate_rayleigh(&s, 1e-300).unwrap() < 1e-299);
        let s2 = TrainingSample::new(vec![1.0, 3.0]).unwrap();
        let e = 0.05f64;
        assert!((rate_rayleigh(&s2, e).unwrap() - (1.0 - 2.0 * (1.0 - e).ln()).log2()).abs() < 1e-15);
        // equals the capacity of the fitted model
        let cap = ChannelModel::rayleigh(1.0).unwrap().epsilon_outage_capacity(e).unwrap();
        assert!((rate_rayleigh(&s, e).unwrap() - cap).abs() < 1e-15);
    }

    #[test]
    fn nonparam_index_examples() {
        assert_eq!(nonparam_l_ar(1e-3, 999).unwrap(), 1);
        assert_eq!(nonparam_l_ar(1e-3, 998).unwrap(), 0);
        assert_eq!(nonparam_l_ar(1e-2, 1000).unwrap(), 10);
        assert_eq!(nonparam_l_pcr(1e-2, 0.1, 1000).unwrap(), 6);
        // empty feasible set
        assert_eq!(nonparam_l_pcr(1e-3, 0.1, 100).unwrap(), 0);
        assert_eq!(plug_in_nonparam_index(1e-3, 1000).unwrap(), 2);
        assert_eq!(plug_in_nonparam_index(1e-3, 100).unwrap(), 1);
        assert_eq!(plug_in_nonparam_index(0.5, 3).unwrap(), 2);
    }

    #[test]
    fn nonparam_pcr_matches_binomial_scan() {
        // P[Bin(1000, 0.01) <= l - 1] for l = 1..=8 from an exact oracle
        let cdf = [4.317e-5, 4.792e-4, 2.679e-3, 0.010_073, 0.028_686, 0.066_140, 0.128_877];
        for (i, &c) in cdf.iter().enumerate() {
            let got = nonparam_meta_prob(0.01, i + 1, 1000).unwrap();
            assert!(rel(got, c) < 1e-3, "l={}: {got}", i + 1);
        }
    }

    #[test]
    fn rate_nonparam_examples() {
        assert_eq!(rate_nonparam(&TrainingSample::new(vec![3.0]).unwrap(), 1).unwrap(), 2.0);
        let s = TrainingSample::new(vec![7.0, 1.0, 3.0]).unwrap();
        assert_eq!(rate_nonparam(&s, 2).unwrap(), 2.0);
        assert!(rate_nonparam(&s, 4).is_err());
        assert!(rate_nonparam(&s, 1).unwrap() <= rate_nonparam(&s, 2).unwrap());
    }

    #[test]
    fn powerlaw_examples() {
        assert!(rel(v_bar(1e-4, 0.01), 2_219.759_244_191_359) < 1e-12);
        let t = ReliabilityTarget::probably_correct(1e-4, 1e-2).unwrap();
        let e = epsn_powerlaw(&t, 1_000_000, 0.01, TailMode::Asymptotic).unwrap();
        assert!(rel(e, 8.961_886_865_435_574e-5) < 1e-9, "{e}");
        let ar = ReliabilityTarget::averaged(3e-3).unwrap();
        assert_eq!(epsn_powerlaw(&ar, 50, 0.2, TailMode::Asymptotic).unwrap(), 3e-3);
        assert!(matches!(
            epsn_powerlaw(&ar, 1000, 0.01, TailMode::NonAsymptotic),
            Err(Error::Unsupported(_))
        ));
        let fit = TailFit {
            alpha_hat: 1.0,
            kappa_hat: 1.0,
            l: 10,
            n: 1000,
            beta: 0.01,
            z_l: 0.01f64.ln(),
        };
        assert!(rel(rate_powerlaw(&fit, 1e-3).unwrap(), 1.441_974_173_906_480_4e-3) < 1e-12);
        assert!(rate_powerlaw(&fit, 1e-300).unwrap() < 1e-290);
    }

    #[test]
    fn nonasymptotic_rule() {
        let t = ReliabilityTarget::probably_correct(1e-2, 0.1).unwrap();
        let n = 100_000;
        let asym = epsn_powerlaw(&t, n, 0.01, TailMode::Asymptotic).unwrap();
        let non = epsn_powerlaw(&t, n, 0.01, TailMode::NonAsymptotic).unwrap();
        assert!(non > 0.0 && non <= asym, "{non} vs {asym}");
        let bound = nonasymptotic_bound(1e-2, 1000, n, non).unwrap();
        assert!(bound <= 0.1 && 0.1 - bound <= 1e-6, "{bound}");
        // l = 2 falls back, l = 1 is an error
        let t2 = ReliabilityTarget::probably_correct(0.1, 0.1).unwrap();
        let fallback = epsn_powerlaw(&t2, 200, 0.01, TailMode::NonAsymptotic).unwrap();
        assert_eq!(fallback, epsn_powerlaw(&t2, 200, 0.01, TailMode::Asymptotic).unwrap());
        assert!(matches!(
            epsn_powerlaw(&t2, 100, 0.01, TailMode::NonAsymptotic),
            Err(Error::InsufficientTail { .. })
        ));
    }

    #[test]
    fn nonasymptotic_bound_increases_in_eps_n() {
        let b = NonAsymptoticBound::new(1e-3, 50, 5000).unwrap();
        let mut prev = 0.0;
        for i in 1..40 {
            let eps_n = 0.01 * i as f64 / 40.0;
            let v = b.evaluate(eps_n).unwrap();
            assert!(v >= prev - 1e-12, "eps_n={eps_n}: {v} < {prev}");
            assert!((0.0..=2.0).contains(&v));
            prev = v;
        }
        assert!(b.evaluate(0.01).is_err());
    }

    #[test]
    fn select_rate_examples() {
        let n = 100;
        let s = TrainingSample::new(vec![1.0; n]).unwrap();
        let ar = ReliabilityTarget::averaged(1e-3).unwrap();
        let r = select_rate(SelectorSpec::ParametricRayleigh, &ar, &s).unwrap();
        assert!(rel(r, 1.442_702_494_900_595e-3) < 1e-12, "{r}");
        let s500 = TrainingSample::new((1..=500).map(f64::from).collect()).unwrap();
        assert_eq!(select_rate(SelectorSpec::NonParametric, &ar, &s500).unwrap(), 0.0);
        let lam = 2.5;
        let s2 = TrainingSample::new(vec![lam; 10]).unwrap();
        let plug = select_rate(SelectorSpec::PlugInRayleigh, &ar, &s2).unwrap();
        let cap = ChannelModel::rayleigh(lam)
            .unwrap()
            .epsilon_outage_capacity(1e-3)
            .unwrap();
        assert!((plug - cap).abs() < 1e-15);
        let p = select_rate(SelectorSpec::PlugInNonParametric, &ar, &s500).unwrap();
        assert_eq!(p, 1.0);
        assert!(matches!(
            select_rate(SelectorSpec::PowerLawAsymptotic { beta: 0.01 }, &ar, &s),
            Err(Error::InsufficientTail { l: 1, .. })
        ));
    }

    #[test]
    fn prepared_selector_checks_size() {
        let ar = ReliabilityTarget::averaged(1e-2).unwrap();
        let p = PreparedSelector::new(SelectorSpec::NonParametric, ar, 1000).unwrap();
        assert_eq!(p.order_index(), Some(10));
        assert_eq!(p.eps_n(), None);
        assert!(p.rate(&TrainingSample::new(vec![1.0; 999]).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn ar_inverse_pair_is_exact(eps in 1e-6f64..0.3, n in 1usize..100_000) {
            let e = epsn_rayleigh_ar(eps, n).unwrap();
            prop_assert!(e >= eps);
            let p = crate::mismatch::mean_outage_exact_rayleigh(e, n).unwrap();
            prop_assert!((p - eps).abs() <= 1e-12 * eps.max(1e-3));
        }

        #[test]
        fn pcr_is_more_conservative(eps in 1e-5f64..0.1, xi in 1e-4f64..0.49, n in 1usize..5000) {
            let ar = epsn_rayleigh_ar(eps, n).unwrap();
            let pcr = epsn_rayleigh_pcr(eps, xi, n).unwrap();
            prop_assert!(pcr <= ar * (1.0 + 1e-12));
            let stricter = epsn_rayleigh_pcr(eps, xi * 0.5, n).unwrap();
            prop_assert!(stricter <= pcr);
        }

        #[test]
        fn l_pcr_is_maximal(eps in 1e-3f64..0.2, xi in 1e-3f64..0.5, n in 1usize..3000) {
            let l = nonparam_l_pcr(eps, xi, n).unwrap();
            if l > 0 {
                prop_assert!(nonparam_meta_prob(eps, l, n).unwrap() <= xi);
            }
            if l < n {
                prop_assert!(nonparam_meta_prob(eps, l + 1, n).unwrap() > xi);
            }
        }

        #[test]
        fn rate_powerlaw_monotone(a in 1e-6f64..0.1, b in 1e-6f64..0.1, kappa in 0.2f64..3.0) {
            let fit = TailFit { alpha_hat: 0.7, kappa_hat: kappa, l: 5, n: 100, beta: 0.05, z_l: -1.0 };
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(rate_powerlaw(&fit, lo).unwrap() <= rate_powerlaw(&fit, hi).unwrap());
        }
    }
}
