//! Training samples and the estimators built on them.

use std::borrow::Cow;
use std::path::Path;
use std::sync::OnceLock;

use crate::{ceil_tol, check_probability, domain, Error, Result};

/// `n` non-negative received-power measurements.
///
/// Order statistics are 1-based with `x_(0) = 0` and `x_(n+1) = +inf`.
/// The full sort is computed on first use and cached; the partial-order
/// accessors avoid it when it is not needed.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    values: Vec<f64>,
    sorted: OnceLock<Vec<f64>>,
}

impl PartialEq for TrainingSample {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl TrainingSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain("measurement", bad, "finite and >= 0"));
        }
        Ok(Self {
            values,
            sorted: OnceLock::new(),
        })
    }

    /// Parses one decimal per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{line:?}: {e}"),
            })?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("{line:?}: measurement must be finite and non-negative"),
                });
            }
            values.push(v);
        }
        Self::new(values)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut v = self.values.clone();
            v.sort_by(f64::total_cmp);
            v
        })
    }

    /// `x_(i)` with the boundary conventions for `i = 0` and `i = n + 1`.
    pub fn order_stat(&self, i: usize) -> Result<f64> {
        let n = self.len();
        match i {
            0 => Ok(0.0),
            i if i <= n => Ok(self.sorted()[i - 1]),
            i if i == n + 1 => Ok(f64::INFINITY),
            _ => Err(Error::Index { l: i, n }),
        }
    }

    /// `x_(l)` for `1 <= l <= n`, by selection when the sort is not cached.
    pub fn kth_smallest(&self, l: usize) -> Result<f64> {
        let n = self.len();
        if l == 0 || l > n {
            return Err(Error::Index { l, n });
        }
        if let Some(s) = self.sorted.get() {
            return Ok(s[l - 1]);
        }
        let mut v = self.values.clone();
        let (_, x, _) = v.select_nth_unstable_by(l - 1, f64::total_cmp);
        Ok(*x)
    }

    /// The `l` smallest values in ascending order.
    pub fn smallest(&self, l: usize) -> Result<Cow<'_, [f64]>> {
        let n = self.len();
        if l > n {
            return Err(Error::Index { l, n });
        }
        if let Some(s) = self.sorted.get() {
            return Ok(Cow::Borrowed(&s[..l]));
        }
        if l == 0 {
            return Ok(Cow::Owned(Vec::new()));
        }
        let mut v = self.values.clone();
        v.select_nth_unstable_by(l - 1, f64::total_cmp);
        v.truncate(l);
        v.sort_by(f64::total_cmp);
        Ok(Cow::Owned(v))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// Maximum-likelihood estimate of the Rayleigh mean power: the sample mean.
pub fn rayleigh_mle(sample: &TrainingSample) -> f64 {
    sample.mean()
}

/// `F_hat(y) = #{x_i <= y} / n`.
pub fn empirical_cdf(sample: &TrainingSample, y: f64) -> f64 {
    let s = sample.sorted();
    s.partition_point(|&x| x <= y) as f64 / s.len() as f64
}

/// Power-law fit `F(y) ~ alpha_hat * y^(1/kappa_hat)` from the `l = ceil(beta n)`
/// smallest log-measurements `Z_(1) <= ... <= Z_(l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub alpha_hat: f64,
    pub kappa_hat: f64,
    pub l: usize,
    pub n: usize,
    pub beta: f64,
    /// `Z_(l)`, the largest log-value used.
    pub z_l: f64,
}

/// Tail-fraction size `l = ceil(beta n)`.
pub fn tail_count(beta: f64, n: usize) -> usize {
    ceil_tol(beta * n as f64)
}

pub fn fit_power_tail(sample: &TrainingSample, beta: f64) -> Result<TailFit> {
    check_probability("beta", beta)?;
    let n = sample.len();
    let l = tail_count(beta, n);
    if l < 2 {
        return Err(Error::InsufficientTail { l, needed: 2 });
    }
    let head = sample.smallest(l)?;
    if head[0] <= 0.0 {
        return Err(domain("measurement", head[0], "> 0 for the log-tail fit"));
    }
    let z_l = head[l - 1].ln();
    let spread: f64 = head.iter().map(|x| z_l - x.ln()).sum();
    let kappa_hat = spread / l as f64;
    if !(kappa_hat > 0.0) {
        return Err(domain(
            "kappa_hat",
            kappa_hat,
            "> 0 (the l smallest values are all equal)",
        ));
    }
    let alpha_hat = (l as f64 / n as f64) * (-z_l / kappa_hat).exp();
    Ok(TailFit {
        alpha_hat,
        kappa_hat,
        l,
        n,
        beta,
        z_l,
    })
}

impl TailFit {
    /// Estimated `F_Z^{-1}(eps_n)` for `Z = ln Y`, i.e. `kappa_hat ln(eps_n / alpha_hat)`.
    ///
    /// Computed as `Z_(l) + kappa_hat ln(n eps_n / l)`, which is the same
    /// quantity without the round trip through `alpha_hat`.
    pub fn tail_quantile(&self, eps_n: f64) -> f64 {
        self.z_l + self.kappa_hat * (self.n as f64 * eps_n / self.l as f64).ln()
    }

    /// `kappa_hat ln(eps_n / alpha_hat)` evaluated literally.
    pub fn tail_quantile_direct(&self, eps_n: f64) -> f64 {
        self.kappa_hat * (eps_n / self.alpha_hat).ln()
    }
}

pub fn tail_quantile(fit: &TailFit, eps_n: f64) -> Result<f64> {
    check_probability("eps_n", eps_n)?;
    Ok(fit.tail_quantile(eps_n))
}
