use std::path::{Path, PathBuf};

use clap::ValueEnum;
use relrate_core::{ChannelModel, EvalConfig, ReliabilityTarget, SelectorSpec, SweepAxis};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintName {
    Ar,
    Pcr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SelectorName {
    Rayleigh,
    Nonparametric,
    PowerlawAsym,
    PowerlawNonasym,
    PluginRayleigh,
    PluginNonparametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelName {
    Rayleigh,
    Rician,
    Nakagami,
}

impl SelectorName {
    pub fn is_power_law(self) -> bool {
        matches!(self, Self::PowerlawAsym | Self::PowerlawNonasym)
    }

    pub fn spec(self, beta: Option<f64>) -> Result<SelectorSpec, CliError> {
        let beta = match (self.is_power_law(), beta) {
            (true, Some(b)) => b,
            (true, None) => return Err(CliError::Config("power-law selectors need `beta`".into())),
            (false, _) => 0.0,
        };
        Ok(match self {
            Self::Rayleigh => SelectorSpec::ParametricRayleigh,
            Self::Nonparametric => SelectorSpec::NonParametric,
            Self::PowerlawAsym => SelectorSpec::PowerLawAsymptotic { beta },
            Self::PowerlawNonasym => SelectorSpec::PowerLawNonAsymptotic { beta },
            Self::PluginRayleigh => SelectorSpec::PlugInRayleigh,
            Self::PluginNonparametric => SelectorSpec::PlugInNonParametric,
        })
    }
}

pub fn target(constraint: ConstraintName, eps: f64, xi: Option<f64>) -> Result<ReliabilityTarget, CliError> {
    Ok(match (constraint, xi) {
        (ConstraintName::Ar, None) => ReliabilityTarget::averaged(eps)?,
        (ConstraintName::Ar, Some(_)) => {
            return Err(CliError::Config("`xi` only applies to the pcr constraint".into()))
        }
        (ConstraintName::Pcr, Some(xi)) => ReliabilityTarget::probably_correct(eps, xi)?,
        (ConstraintName::Pcr, None) => return Err(CliError::Config("the pcr constraint needs `xi`".into())),
    })
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

fn non_empty(values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        Err(CliError::Config("`values` must not be empty".into()))
    } else {
        Ok(())
    }
}

/// A Monte Carlo sweep: one base experiment and one axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub channel: ChannelName,
    #[serde(default = "unit")]
    pub lambda: f64,
    pub k: Option<f64>,
    pub m: Option<f64>,
    pub selector: SelectorName,
    pub beta: Option<f64>,
    pub constraint: ConstraintName,
    pub epsilon: f64,
    pub xi: Option<f64>,
    pub n: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub axis: String,
    pub values: Vec<f64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn unit() -> f64 {
    1.0
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_toml(path)
    }

    /// The parsed axis and the base experiment. A key that is swept may be
    /// left out; the first axis value stands in for it.
    pub fn experiment(&self) -> Result<(SweepAxis, EvalConfig), CliError> {
        let axis: SweepAxis = self.axis.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        non_empty(&self.values)?;
        let first = self.values[0];
        let swept = |a: SweepAxis, given: Option<f64>, name: &str| -> Result<f64, CliError> {
            match (given, axis == a) {
                (Some(v), _) => Ok(v),
                (None, true) => Ok(first),
                (None, false) => Err(CliError::Config(format!("missing key `{name}`"))),
            }
        };
        let true_model = match self.channel {
            ChannelName::Rayleigh => {
                self.reject(self.k, "k")?;
                self.reject(self.m, "m")?;
                ChannelModel::rayleigh(self.lambda)?
            }
            ChannelName::Rician => {
                self.reject(self.m, "m")?;
                ChannelModel::rician(self.lambda, swept(SweepAxis::K, self.k, "k")?)?
            }
            ChannelName::Nakagami => {
                self.reject(self.k, "k")?;
                ChannelModel::nakagami(self.lambda, swept(SweepAxis::M, self.m, "m")?)?
            }
        };
        let beta = if self.selector.is_power_law() {
            Some(swept(SweepAxis::Beta, self.beta, "beta")?)
        } else {
            self.reject(self.beta, "beta")?;
            None
        };
        let xi = match self.constraint {
            ConstraintName::Pcr => Some(swept(SweepAxis::Xi, self.xi, "xi")?),
            ConstraintName::Ar => self.xi,
        };
        let n = match self.n {
            Some(n) => n,
            None if axis == SweepAxis::N => first as usize,
            None => return Err(CliError::Config("missing key `n`".into())),
        };
        let config = EvalConfig {
            true_model,
            selector: self.selector.spec(beta)?,
            target: target(self.constraint, self.epsilon, xi)?,
            n,
            trials: self.trials,
            seed: self.seed,
        };
        config.validate()?;
        Ok((axis, config))
    }

    fn reject(&self, value: Option<f64>, name: &str) -> Result<(), CliError> {
        match value {
            Some(_) => Err(CliError::Config(format!(
                "key `{name}` does not apply to this channel or selector"
            ))),
            None => Ok(()),
        }
    }
}

/// A mismatch table: Rician `k` or Nakagami `m` against several selectors.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MismatchConfig {
    pub channel: ChannelName,
    #[serde(default = "unit")]
    pub lambda: f64,
    pub values: Vec<f64>,
    pub selectors: Vec<SelectorName>,
    pub beta: Option<f64>,
    pub epsilon: f64,
    pub xi: Option<f64>,
    pub n: usize,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl MismatchConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let c: Self = read_toml(path)?;
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), CliError> {
        non_empty(&self.values)?;
        if self.selectors.is_empty() {
            return Err(CliError::Config("`selectors` must not be empty".into()));
        }
        if self.channel == ChannelName::Rayleigh {
            return Err(CliError::Config("mismatch `channel` must be rician or nakagami".into()));
        }
        let power_law = self.selectors.iter().any(|s| s.is_power_law());
        if power_law && (self.trials.is_none() || self.seed.is_none()) {
            return Err(CliError::Config(
                "power-law selectors are evaluated by Monte Carlo and need `trials` and `seed`".into(),
            ));
        }
        if !power_law && self.beta.is_some() {
            return Err(CliError::Config("key `beta` needs a power-law selector".into()));
        }
        for v in &self.values {
            self.model(*v)?;
        }
        target(ConstraintName::Ar, self.epsilon, None)?;
        if let Some(xi) = self.xi {
            target(ConstraintName::Pcr, self.epsilon, Some(xi))?;
        }
        Ok(())
    }

    pub fn param_name(&self) -> &'static str {
        match self.channel {
            ChannelName::Nakagami => "m",
            _ => "k",
        }
    }

    pub fn model(&self, value: f64) -> Result<ChannelModel, CliError> {
        Ok(match self.channel {
            ChannelName::Nakagami => ChannelModel::nakagami(self.lambda, value)?,
            _ => ChannelModel::rician(self.lambda, value)?,
        })
    }
}
