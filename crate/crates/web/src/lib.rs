//! WebAssembly bindings behind `www/index.html`.
//!
//! The plain functions return `Result<_, String>` and are what the native
//! tests exercise; the `#[wasm_bindgen]` wrappers only convert errors.

use relrate_core::evalmc::evaluate_with;
use relrate_core::mismatch::{mean_outage_mismatch, MeanOutageMethod};
use relrate_core::rateselect::epsn_rayleigh_ar;
use relrate_core::{ChannelModel, EvalConfig, PreparedSelector, ReliabilityTarget, SelectorSpec};
use wasm_bindgen::prelude::*;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn target(constraint: &str, eps: f64, xi: f64) -> Result<ReliabilityTarget, String> {
    match constraint {
        "ar" => ReliabilityTarget::averaged(eps).map_err(text),
        "pcr" => ReliabilityTarget::probably_correct(eps, xi).map_err(text),
        other => Err(format!("unknown constraint {other:?}")),
    }
}

fn selector(name: &str, beta: f64) -> Result<SelectorSpec, String> {
    Ok(match name {
        "rayleigh" => SelectorSpec::ParametricRayleigh,
        "nonparametric" => SelectorSpec::NonParametric,
        "powerlaw-asym" => SelectorSpec::PowerLawAsymptotic { beta },
        "powerlaw-nonasym" => SelectorSpec::PowerLawNonAsymptotic { beta },
        "plugin-rayleigh" => SelectorSpec::PlugInRayleigh,
        "plugin-nonparametric" => SelectorSpec::PlugInNonParametric,
        other => return Err(format!("unknown selector {other:?}")),
    })
}

fn channel(name: &str, param: f64) -> Result<ChannelModel, String> {
    match name {
        "rayleigh" => ChannelModel::rayleigh(1.0),
        "rician" => ChannelModel::rician(1.0, param),
        "nakagami" => ChannelModel::nakagami(1.0, param),
        other => return Err(format!("unknown channel {other:?}")),
    }
    .map_err(text)
}

fn sample_size(n: f64) -> Result<usize, String> {
    if n >= 1.0 && n.fract() == 0.0 && n < 1e9 {
        Ok(n as usize)
    } else {
        Err(format!("n = {n} is not a positive integer"))
    }
}

/// `eps_n` of `selector` at each `n`; `NaN` where the selector has no
/// backoff level (order-statistic rules) or no solution.
pub fn backoff_curve(
    selector_name: &str,
    constraint: &str,
    eps: f64,
    xi: f64,
    beta: f64,
    ns: &[f64],
) -> Result<Vec<f64>, String> {
    let spec = selector(selector_name, beta)?;
    let target = target(constraint, eps, xi)?;
    ns.iter()
        .map(|&n| {
            let n = sample_size(n)?;
            Ok(match PreparedSelector::new(spec, target, n) {
                Ok(p) => p.eps_n().unwrap_or(f64::NAN),
                Err(_) => f64::NAN,
            })
        })
        .collect()
}

/// Mean outage of the averaged-reliability Rayleigh selector when the
/// channel is actually `channel_name` with parameter `k` or `m`. Returns the
/// numeric values followed by the weak-`n` closed forms.
pub fn mismatch_curve(channel_name: &str, params: &[f64], eps: f64, n: f64) -> Result<Vec<f64>, String> {
    let n = sample_size(n)?;
    let eps_n = epsn_rayleigh_ar(eps, n).map_err(text)?;
    let mut numeric = Vec::with_capacity(2 * params.len());
    let mut weak = Vec::with_capacity(params.len());
    for &p in params {
        let model = channel(channel_name, p)?;
        numeric.push(
            mean_outage_mismatch(&model, eps_n, n, MeanOutageMethod::Numeric)
                .map_err(text)?
                .value,
        );
        weak.push(
            mean_outage_mismatch(&model, eps, n, MeanOutageMethod::WeakN)
                .map_err(text)?
                .value,
        );
    }
    numeric.extend(weak);
    Ok(numeric)
}

/// Monte Carlo throughput ratio, mean outage and meta-probability at each
/// `n`, returned as three consecutive blocks of `ns.len()` values.
#[allow(clippy::too_many_arguments)]
pub fn throughput_curve(
    selector_name: &str,
    constraint: &str,
    eps: f64,
    xi: f64,
    beta: f64,
    channel_name: &str,
    param: f64,
    ns: &[f64],
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let base = EvalConfig {
        true_model: channel(channel_name, param)?,
        selector: selector(selector_name, beta)?,
        target: target(constraint, eps, xi)?,
        n: 1,
        trials: trials as usize,
        seed,
    };
    let mut out = vec![f64::NAN; 3 * ns.len()];
    for (i, &n) in ns.iter().enumerate() {
        let config = EvalConfig {
            n: sample_size(n)?,
            ..base
        };
        // points the selector cannot handle (too little tail data) stay NaN
        if let Ok(r) = evaluate_with(&config, i, Some(1)) {
            out[i] = r.throughput_ratio.estimate;
            out[ns.len() + i] = r.mean_outage.estimate;
            out[2 * ns.len() + i] = r.meta_prob.estimate;
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = backoffCurve)]
pub fn backoff_curve_js(
    selector: &str,
    constraint: &str,
    eps: f64,
    xi: f64,
    beta: f64,
    ns: Vec<f64>,
) -> Result<Vec<f64>, JsError> {
    backoff_curve(selector, constraint, eps, xi, beta, &ns).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mismatchCurve)]
pub fn mismatch_curve_js(channel: &str, params: Vec<f64>, eps: f64, n: f64) -> Result<Vec<f64>, JsError> {
    mismatch_curve(channel, &params, eps, n).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = throughputCurve)]
pub fn throughput_curve_js(
    selector: &str,
    constraint: &str,
    eps: f64,
    xi: f64,
    beta: f64,
    channel: &str,
    param: f64,
    ns: Vec<f64>,
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    throughput_curve(selector, constraint, eps, xi, beta, channel, param, &ns, trials, seed)
        .map_err(|e| JsError::new(&e))
}
