//! Received-power distributions of the three fading families.
//!
//! All powers are linear. `Rayleigh { lambda }` is exponential with mean
//! `lambda`; `Rician { lambda, k }` adds a specular component of power
//! `k * lambda` to diffuse power `lambda`; `Nakagami { lambda, m }` is
//! `Gamma(m, lambda)`, the incoherent sum of `m` Rayleigh-like clusters.

use std::f64::consts::LN_2;
use std::fmt;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::roots::brent;
use crate::specfun::{inv_reg_lower_gamma, ln_gamma, poisson_gamma_mixture, reg_gamma_pair};
use crate::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Rayleigh { lambda: f64 },
    Rician { lambda: f64, k: f64 },
    Nakagami { lambda: f64, m: f64 },
}

/// First-order behaviour `F(y) ~ alpha * y^(1/kappa)` of a CDF near zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawTail {
    pub alpha: f64,
    pub kappa: f64,
}

impl PowerLawTail {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain("alpha", alpha, "alpha > 0"));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(domain("kappa", kappa, "kappa > 0"));
        }
        Ok(Self { alpha, kappa })
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.alpha * y.powf(1.0 / self.kappa)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        (p / self.alpha).powf(self.kappa)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain("lambda", lambda, "lambda > 0"))
    }
}

impl ChannelModel {
    pub fn rayleigh(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self::Rayleigh { lambda })
    }

    pub fn rician(lambda: f64, k: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(k >= 0.0) || !k.is_finite() {
            return Err(domain("k", k, "k >= 0"));
        }
        Ok(Self::Rician { lambda, k })
    }

    pub fn nakagami(lambda: f64, m: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(m >= 0.5) || !m.is_finite() {
            return Err(domain("m", m, "m >= 0.5"));
        }
        Ok(Self::Nakagami { lambda, m })
    }

    /// Re-checks the invariants of a value built with a struct literal.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Rayleigh { lambda } => Self::rayleigh(lambda),
            Self::Rician { lambda, k } => Self::rician(lambda, k),
            Self::Nakagami { lambda, m } => Self::nakagami(lambda, m),
        }
        .map(|_| ())
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Self::Rayleigh { lambda } | Self::Rician { lambda, .. } | Self::Nakagami { lambda, .. } => lambda,
        }
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(domain("y", y, "y >= 0"));
        }
        Ok(match *self {
            Self::Rayleigh { lambda } => -(-y / lambda).exp_m1(),
            Self::Rician { lambda, k } => poisson_gamma_mixture(1.0, k, y / lambda)?.0,
            Self::Nakagami { lambda, m } => reg_gamma_pair(m, y / lambda)?.0,
        })
    }

    /// `(F(y), 1 - F(y))`, each accurate in relative terms.
    pub fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        if !(y >= 0.0) {
            return Err(domain("y", y, "y >= 0"));
        }
        Ok(match *self {
            Self::Rayleigh { lambda } => (-(-y / lambda).exp_m1(), (-y / lambda).exp()),
            Self::Rician { lambda, k } => poisson_gamma_mixture(1.0, k, y / lambda)?,
            Self::Nakagami { lambda, m } => reg_gamma_pair(m, y / lambda)?,
        })
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(domain("p", p, "0 <= p < 1"));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Self::Rayleigh { lambda } => Ok(-lambda * (-p).ln_1p()),
            Self::Nakagami { lambda, m } => Ok(lambda * inv_reg_lower_gamma(m, p)?),
            Self::Rician { lambda, k } => {
                if k == 0.0 {
                    return Ok(-lambda * (-p).ln_1p());
                }
                // the Rician CDF lies below the Rayleigh one with the same lambda
                let ln_p = p.ln();
                let f = |v: f64| -> f64 {
                    match poisson_gamma_mixture(1.0, k, v.exp()) {
                        Ok((c, _)) => c.ln() - ln_p,
                        Err(_) => f64::NAN,
                    }
                };
                let lo = (-(-p).ln_1p()).ln();
                let mut hi = (1.0 + k).ln().max(lo + 1.0);
                while f(hi) < 0.0 {
                    hi += 1.0;
                    if hi > 700.0 {
                        return Err(Error::NoSolution { smallest: p });
                    }
                }
                let v = brent(f, lo, hi, 1e-14, 300)?;
                Ok(lambda * v.exp())
            }
        }
    }

    /// `(E[Y], Var[Y])`.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Self::Rayleigh { lambda } => (lambda, lambda * lambda),
            Self::Rician { lambda, k } => (lambda * (1.0 + k), lambda * lambda * (1.0 + 2.0 * k)),
            Self::Nakagami { lambda, m } => (m * lambda, m * lambda * lambda),
        }
    }

    /// `ln E[exp(t Y)]` for `t < 1/lambda`.
    pub fn ln_mgf(&self, t: f64) -> Result<f64> {
        let lambda = self.lambda();
        if !(t * lambda < 1.0) {
            return Err(domain("t", t, "t < 1/lambda"));
        }
        let one_minus = 1.0 - t * lambda;
        Ok(match *self {
            Self::Rayleigh { .. } => -one_minus.ln(),
            Self::Rician { k, .. } => k * lambda * t / one_minus - one_minus.ln(),
            Self::Nakagami { m, .. } => -m * one_minus.ln(),
        })
    }

    pub fn mgf(&self, t: f64) -> Result<f64> {
        self.ln_mgf(t).map(f64::exp)
    }

    pub fn power_law(&self) -> PowerLawTail {
        match *self {
            Self::Rayleigh { lambda } => PowerLawTail {
                alpha: 1.0 / lambda,
                kappa: 1.0,
            },
            Self::Rician { lambda, k } => PowerLawTail {
                alpha: (-k).exp() / lambda,
                kappa: 1.0,
            },
            Self::Nakagami { lambda, m } => PowerLawTail {
                alpha: (-m * lambda.ln() - ln_gamma(m + 1.0)).exp(),
                kappa: 1.0 / m,
            },
        }
    }

    /// `R_eps(F) = log2(1 + F^{-1}(eps))` in bits per channel use.
    pub fn epsilon_outage_capacity(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(domain("eps", eps, "0 < eps < 1"));
        }
        match *self {
            Self::Rayleigh { lambda } => Ok((-lambda * (-eps).ln_1p()).ln_1p() / LN_2),
            _ => Ok(self.quantile(eps)?.ln_1p() / LN_2),
        }
    }

    pub fn sampler(&self) -> ChannelSampler {
        match *self {
            Self::Rayleigh { lambda } => ChannelSampler::Rayleigh { lambda },
            Self::Rician { lambda, k } => ChannelSampler::Rician {
                los: (k * lambda).sqrt(),
                sd: (lambda / 2.0).sqrt(),
            },
            Self::Nakagami { lambda, m } => {
                ChannelSampler::Nakagami(Gamma::new(m, lambda).expect("validated shape and scale"))
            }
        }
    }

    /// `count` i.i.d. draws from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        let sampler = self.sampler();
        (0..count).map(|_| sampler.sample(rng)).collect()
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Rayleigh { lambda } => write!(f, "Rayleigh(lambda={lambda})"),
            Self::Rician { lambda, k } => write!(f, "Rician(lambda={lambda}, k={k})"),
            Self::Nakagami { lambda, m } => write!(f, "Nakagami(lambda={lambda}, m={m})"),
        }
    }
}

/// Pre-built draw routine for one model.
#[derive(Debug, Clone, Copy)]
pub enum ChannelSampler {
    Rayleigh { lambda: f64 },
    Rician { los: f64, sd: f64 },
    Nakagami(Gamma<f64>),
}

impl Distribution<f64> for ChannelSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Rayleigh { lambda } => {
                let u: f64 = rng.sample(Open01);
                -lambda * (-u).ln_1p()
            }
            Self::Rician { los, sd } => {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let re = los + sd * g1;
                let im = sd * g2;
                re * re + im * im
            }
            Self::Nakagami(gamma) => gamma.sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<ChannelModel> {
        vec![
            ChannelModel::rayleigh(1.0).unwrap(),
            ChannelModel::rayleigh(2.5).unwrap(),
            ChannelModel::rician(1.0, 3.0).unwrap(),
            ChannelModel::rician(0.5, 7.0).unwrap(),
            ChannelModel::nakagami(1.0, 0.5).unwrap(),
            ChannelModel::nakagami(2.0, 3.0).unwrap(),
        ]
    }

    #[test]
    fn constructors_validate() {
        assert!(ChannelModel::rayleigh(0.0).is_err());
        assert!(ChannelModel::rician(1.0, -0.1).is_err());
        assert!(ChannelModel::nakagami(1.0, 0.4).is_err());
        assert!(ChannelModel::Nakagami { lambda: 1.0, m: 0.2 }.validate().is_err());
    }

    #[test]
    fn cdf_examples() {
        let r = ChannelModel::rayleigh(1.0).unwrap();
        assert!((r.cdf(0.0010005).unwrap() - 0.001).abs() < 1e-9);
        assert!(r.cdf(-1.0).is_err());
        for &y in &[1e-6, 0.01, 0.5, 3.0] {
            let base = r.cdf(y).unwrap();
            assert!((ChannelModel::rician(1.0, 0.0).unwrap().cdf(y).unwrap() - base).abs() < 1e-15);
            assert!((ChannelModel::nakagami(1.0, 1.0).unwrap().cdf(y).unwrap() - base).abs() < 1e-15);
        }
    }

    #[test]
    fn rician_cdf_matches_marcum() {
        let m = ChannelModel::rician(2.0, 3.0).unwrap();
        let y = 1.7;
        let q = crate::specfun::marcum_q1((2.0f64 * 3.0).sqrt(), (2.0 * y / 2.0f64).sqrt()).unwrap();
        assert!((m.cdf(y).unwrap() - (1.0 - q)).abs() < 1e-14);
    }

    #[test]
    fn quantile_examples() {
        let r = ChannelModel::rayleigh(1.0).unwrap();
        assert!((r.quantile(1e-3).unwrap() - 1.000_500_333_583_533_5e-3).abs() < 1e-18);
        for m in models() {
            assert_eq!(m.quantile(0.0).unwrap(), 0.0);
            assert!(m.quantile(1.0).is_err());
            for &p in &[1e-8, 1e-4, 0.01, 0.3, 0.9] {
                let y = m.quantile(p).unwrap();
                let back = m.cdf(y).unwrap();
                assert!((back / p - 1.0).abs() < 1e-9, "{m}: p={p}, back={back}");
            }
        }
    }

    #[test]
    fn moments_examples() {
        assert_eq!(ChannelModel::rayleigh(1.0).unwrap().moments(), (1.0, 1.0));
        assert_eq!(ChannelModel::rician(1.0, 0.0).unwrap().moments(), (1.0, 1.0));
        assert_eq!(ChannelModel::nakagami(2.0, 3.0).unwrap().moments(), (6.0, 12.0));
    }

    #[test]
    fn mgf_examples() {
        for m in models() {
            assert_eq!(m.mgf(0.0).unwrap(), 1.0);
            assert!(m.mgf(1.0 / m.lambda()).is_err());
        }
        assert!((ChannelModel::rayleigh(1.0).unwrap().mgf(0.5).unwrap() - 2.0).abs() < 1e-15);
        let v = ChannelModel::rician(1.0, 3.0).unwrap().mgf(0.5).unwrap();
        assert!((v - 40.171_073_846_375_335).abs() < 1e-11);
    }

    #[test]
    fn mgf_matches_sample_average() {
        let m = ChannelModel::rician(1.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = 0.1;
        let n = 400_000;
        let s: f64 = m.sample(&mut rng, n).iter().map(|y| (t * y).exp()).sum();
        let exact = m.mgf(t).unwrap();
        assert!((s / n as f64 / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn power_law_examples() {
        assert_eq!(
            ChannelModel::rayleigh(2.0).unwrap().power_law(),
            PowerLawTail { alpha: 0.5, kappa: 1.0 }
        );
        let r = ChannelModel::rician(1.0, 3.0).unwrap().power_law();
        assert!((r.alpha - 0.049_787_068_367_863_944).abs() < 1e-15 && r.kappa == 1.0);
        let n = ChannelModel::nakagami(1.0, 0.5).unwrap().power_law();
        assert!((n.alpha - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14 && n.kappa == 2.0);
    }

    #[test]
    fn power_law_matches_cdf_near_zero() {
        for m in models() {
            let tail = m.power_law();
            // the relative second-order term is O(k y/lambda) for Rician and
            // O(y/lambda) for Nakagami, so large k and m need deeper levels
            let (p, tol) = match m {
                ChannelModel::Rayleigh { .. } => (1e-6, 1e-3),
                ChannelModel::Rician { k, .. } => (1e-4 * (-k).exp().min(1.0), 0.05),
                ChannelModel::Nakagami { m, .. } if m > 1.0 => (1e-10, 0.05),
                ChannelModel::Nakagami { .. } => (1e-4, 0.05),
            };
            let y = m.quantile(p).unwrap();
            let ratio = m.cdf(y).unwrap() / tail.cdf(y);
            assert!((ratio - 1.0).abs() < tol, "{m}: {ratio}");
        }
    }

    #[test]
    fn stochastic_ordering_near_zero() {
        let ray = ChannelModel::rayleigh(1.0).unwrap();
        let y_max = ray.quantile(1e-2).unwrap();
        for i in 1..=20 {
            let y = y_max * i as f64 / 20.0;
            let r = ray.cdf(y).unwrap();
            for &k in &[0.5, 3.0] {
                assert!(ChannelModel::rician(1.0, k).unwrap().cdf(y).unwrap() < r);
            }
            for &m in &[0.5, 0.8] {
                assert!(ChannelModel::nakagami(1.0, m).unwrap().cdf(y).unwrap() > r);
            }
        }
    }

    #[test]
    fn capacity_examples() {
        let r = ChannelModel::rayleigh(1.0).unwrap();
        let c = r.epsilon_outage_capacity(1e-3).unwrap();
        assert!((c - 1.442_695_281_398_345_4e-3).abs() < 1e-16);
        assert!(r.epsilon_outage_capacity(1e-300).unwrap() < 1e-299);
        let ric = ChannelModel::rician(1.0, 0.0).unwrap();
        assert!((ric.epsilon_outage_capacity(1e-3).unwrap() - c).abs() < 1e-16);
        // closed form against the generic quantile path
        for &lambda in &[0.1, 1.0, 10.0] {
            let m = ChannelModel::rayleigh(lambda).unwrap();
            for &eps in &[1e-5, 1e-2, 0.5] {
                let generic = m.quantile(eps).unwrap().ln_1p() / LN_2;
                assert!((m.epsilon_outage_capacity(eps).unwrap() - generic).abs() < 1e-10);
            }
        }
    }

    fn ks_statistic(model: &ChannelModel, mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = model.cdf(x).unwrap();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn samplers_pass_ks_test() {
        let n = 100_000;
        let critical = 1.628 / (n as f64).sqrt();
        for (i, m) in models().into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let d = ks_statistic(&m, m.sample(&mut rng, n));
            assert!(d < critical, "{m}: D = {d}");
        }
    }

    #[test]
    fn sample_means_match_moments() {
        let n = 1_000_000;
        for (i, m) in [
            ChannelModel::rayleigh(2.0).unwrap(),
            ChannelModel::rician(1.0, 3.0).unwrap(),
            ChannelModel::nakagami(1.0, 2.0).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let mut rng = ChaCha8Rng::seed_from_u64(7 + i as u64);
            let mean = m.sample(&mut rng, n).iter().sum::<f64>() / n as f64;
            let (mu, var) = m.moments();
            assert!((mean - mu).abs() < 3.0 * (var / n as f64).sqrt(), "{m}: {mean}");
        }
    }

    proptest! {
        #[test]
        fn reductions_agree_with_rayleigh(lambda in 0.05f64..20.0, u in 1e-6f64..0.999) {
            let ray = ChannelModel::rayleigh(lambda).unwrap();
            let ric = ChannelModel::rician(lambda, 0.0).unwrap();
            let nak = ChannelModel::nakagami(lambda, 1.0).unwrap();
            let y = ray.quantile(u).unwrap();
            let f = ray.cdf(y).unwrap();
            for m in [ric, nak] {
                prop_assert!((m.cdf(y).unwrap() - f).abs() < 1e-9);
                prop_assert!((m.quantile(u).unwrap() / y - 1.0).abs() < 1e-9);
                prop_assert_eq!(m.moments(), ray.moments());
                let t = (u - 0.5) / lambda;
                prop_assert!((m.mgf(t).unwrap() / ray.mgf(t).unwrap() - 1.0).abs() < 1e-9);
                let (a, b) = (m.power_law(), ray.power_law());
                prop_assert!((a.alpha / b.alpha - 1.0).abs() < 1e-9 && a.kappa == b.kappa);
            }
        }

        #[test]
        fn cdf_is_monotone(y in 0.0f64..30.0, dy in 0.0f64..1.0, k in 0.0f64..8.0, m in 0.5f64..4.0) {
            for model in [ChannelModel::rician(1.0, k).unwrap(), ChannelModel::nakagami(1.0, m).unwrap()] {
                prop_assert!(model.cdf(y + dy).unwrap() >= model.cdf(y).unwrap() - 1e-15);
            }
        }
    }
}
