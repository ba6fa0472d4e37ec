use relrate_core::evalmc::evaluate_with;
use relrate_core::mismatch::{
    mean_outage_mismatch, meta_prob_mismatch, powerlaw_mean_outage_limit, MeanOutageMethod, MetaProbMethod,
};
use relrate_core::rateselect::nonparam_meta_prob;
use relrate_core::{sweep, ChannelModel, EvalConfig, PreparedSelector, ReliabilityTarget, SelectorSpec};

use crate::config::{MismatchConfig, SweepConfig};
use crate::{sci, CliError};

pub const SWEEP_HEADER: [&str; 16] = [
    "axis_name",
    "axis_value",
    "rate_mean",
    "rate_stddev",
    "mean_outage",
    "mean_outage_ci_lo",
    "mean_outage_ci_hi",
    "meta_prob",
    "meta_prob_ci_lo",
    "meta_prob_ci_hi",
    "omega",
    "omega_ci_lo",
    "omega_ci_hi",
    "zero_rate_fraction",
    "trials",
    "seed",
];

pub const MISMATCH_HEADER: [&str; 7] = [
    "param_name",
    "param_value",
    "selector",
    "mean_outage_numeric",
    "mean_outage_approx",
    "meta_prob_numeric",
    "meta_prob_chernoff",
];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

fn record(w: &mut csv::Writer<Vec<u8>>, fields: &[String]) -> Result<(), CliError> {
    w.write_record(fields).map_err(|e| CliError::Usage(format!("csv: {e}")))
}

/// Runs the sweep in `config` and renders it as CSV.
pub fn sweep_csv(config: &SweepConfig, workers: Option<usize>) -> Result<Vec<u8>, CliError> {
    let (axis, base) = config.experiment()?;
    let points = sweep(&base, axis, &config.values, workers)?;
    let mut w = writer();
    record(&mut w, &SWEEP_HEADER.map(String::from))?;
    for (value, r) in &points {
        if r.zero_rate_fraction > 0.0 {
            log::warn!(
                "{axis} = {value}: {:.3}% of trials selected rate 0",
                100.0 * r.zero_rate_fraction
            );
        }
        let row = [
            axis.name().to_string(),
            sci(*value),
            sci(r.rate_mean),
            sci(r.rate_stddev),
            sci(r.mean_outage.estimate),
            sci(r.mean_outage.lo),
            sci(r.mean_outage.hi),
            sci(r.meta_prob.estimate),
            sci(r.meta_prob.lo),
            sci(r.meta_prob.hi),
            sci(r.throughput_ratio.estimate),
            sci(r.throughput_ratio.lo),
            sci(r.throughput_ratio.hi),
            sci(r.zero_rate_fraction),
            r.trials.to_string(),
            base.seed.to_string(),
        ];
        record(&mut w, &row)?;
    }
    finish(w)
}

#[derive(Default)]
struct Cells {
    mean_numeric: Option<f64>,
    mean_approx: Option<f64>,
    meta_numeric: Option<f64>,
    meta_chernoff: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

/// Builds the mismatch table in `config` and renders it as CSV.
///
/// Rayleigh-designed selectors are evaluated by quadrature with the
/// power-law expansion and the Chernoff estimate alongside; the
/// non-parametric ones are distribution-free and exact; the power-law ones
/// are simulated, with the large-`n` limit as the approximation.
pub fn mismatch_csv(config: &MismatchConfig, workers: Option<usize>) -> Result<Vec<u8>, CliError> {
    config.check()?;
    let ar = ReliabilityTarget::averaged(config.epsilon)?;
    let pcr = config
        .xi
        .map(|xi| ReliabilityTarget::probably_correct(config.epsilon, xi))
        .transpose()?;
    let mut w = writer();
    record(&mut w, &MISMATCH_HEADER.map(String::from))?;
    let mut row_index = 0;
    for &value in &config.values {
        let model = config.model(value)?;
        for &name in &config.selectors {
            let spec = name.spec(config.beta)?;
            let cells = mismatch_row(config, &model, spec, &ar, pcr.as_ref(), row_index, workers)?;
            let row = [
                config.param_name().to_string(),
                sci(value),
                spec.name().to_string(),
                cell(cells.mean_numeric),
                cell(cells.mean_approx),
                cell(cells.meta_numeric),
                cell(cells.meta_chernoff),
            ];
            record(&mut w, &row)?;
            row_index += 1;
        }
    }
    finish(w)
}

/// `None` when the selector has no design under `target`.
fn prepare(spec: SelectorSpec, target: &ReliabilityTarget, n: usize) -> Result<Option<PreparedSelector>, CliError> {
    match PreparedSelector::new(spec, *target, n) {
        Ok(p) => Ok(Some(p)),
        Err(relrate_core::Error::Unsupported(why)) => {
            log::info!("{}: {why}", spec.name());
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn mismatch_row(
    config: &MismatchConfig,
    model: &ChannelModel,
    spec: SelectorSpec,
    ar: &ReliabilityTarget,
    pcr: Option<&ReliabilityTarget>,
    row_index: usize,
    workers: Option<usize>,
) -> Result<Cells, CliError> {
    let n = config.n;
    let eps = config.epsilon;
    let mut cells = Cells::default();
    let ar_design = prepare(spec, ar, n)?;
    let pcr_design = match pcr {
        Some(t) => prepare(spec, t, n)?,
        None => None,
    };
    match spec {
        SelectorSpec::ParametricRayleigh | SelectorSpec::PlugInRayleigh => {
            if let Some(eps_n) = ar_design.and_then(|p| p.eps_n()) {
                cells.mean_numeric = Some(mean_outage_mismatch(model, eps_n, n, MeanOutageMethod::Numeric)?.value);
                cells.mean_approx =
                    Some(mean_outage_mismatch(model, eps_n, n, MeanOutageMethod::PowerLawApprox)?.value);
            }
            if let Some(eps_n) = pcr_design.and_then(|p| p.eps_n()) {
                cells.meta_numeric = Some(meta_prob_mismatch(model, eps_n, eps, n, MetaProbMethod::Numeric)?.value);
                cells.meta_chernoff = Some(meta_prob_mismatch(model, eps_n, eps, n, MetaProbMethod::Chernoff)?.value);
            }
        }
        SelectorSpec::NonParametric | SelectorSpec::PlugInNonParametric => {
            if let Some(l) = ar_design.and_then(|p| p.order_index()) {
                cells.mean_numeric = Some(l as f64 / (n + 1) as f64);
            }
            if let Some(l) = pcr_design.and_then(|p| p.order_index()) {
                cells.meta_numeric = Some(nonparam_meta_prob(eps, l, n)?);
            }
        }
        SelectorSpec::PowerLawAsymptotic { beta } | SelectorSpec::PowerLawNonAsymptotic { beta } => {
            let (trials, seed) = match (config.trials, config.seed) {
                (Some(t), Some(s)) => (t, s),
                _ => return Err(CliError::Config("power-law rows need `trials` and `seed`".into())),
            };
            let run = |target: ReliabilityTarget, design: usize| {
                let c = EvalConfig {
                    true_model: *model,
                    selector: spec,
                    target,
                    n,
                    trials,
                    seed,
                };
                evaluate_with(&c, 2 * row_index + design, workers)
            };
            if let Some(p) = ar_design {
                cells.mean_numeric = Some(run(*ar, 0)?.mean_outage.estimate);
                if let Some(eps_n) = p.eps_n() {
                    cells.mean_approx = Some(powerlaw_mean_outage_limit(model, beta, eps_n)?);
                }
            }
            if let (Some(_), Some(t)) = (pcr_design, pcr) {
                cells.meta_numeric = Some(run(*t, 1)?.meta_prob.estimate);
            }
        }
    }
    Ok(cells)
}
