use rand::Rng;
use relrate_core::evalmc::{evaluate_rule, evaluate_with, stream, Interval};
use relrate_core::mismatch::{mean_outage_exact_rayleigh, meta_prob_exact_rayleigh};
use relrate_core::rateselect::{epsn_rayleigh_ar, nonparam_meta_prob, PreparedSelector};
use relrate_core::{
    evaluate, sweep, ChannelModel, EvalConfig, ReliabilityTarget, SelectorSpec, SweepAxis, TrainingSample,
};

fn config(
    model: ChannelModel,
    selector: SelectorSpec,
    target: ReliabilityTarget,
    n: usize,
    trials: usize,
) -> EvalConfig {
    EvalConfig {
        true_model: model,
        selector,
        target,
        n,
        trials,
        seed: 20_240_601,
    }
}

fn overlap(a: &Interval, b: &Interval) -> bool {
    a.lo <= b.hi && b.lo <= a.hi
}

#[test]
fn degenerate_selector_reaches_capacity() {
    let model = ChannelModel::rician(1.0, 2.0).unwrap();
    let target = ReliabilityTarget::averaged(0.01).unwrap();
    let cap = model.epsilon_outage_capacity(0.01).unwrap();
    let r = evaluate_rule(&model, &target, 5, 50, 1, 0, Some(1), |_| Ok(cap)).unwrap();
    assert!((r.throughput_ratio.estimate - 1.0).abs() < 1e-12);
    assert!((r.mean_outage.estimate - 0.01).abs() < 1e-12);
    assert_eq!(r.zero_rate_fraction, 0.0);
    assert!(r.rate_stddev < 1e-12);
}

#[test]
fn report_is_independent_of_worker_count() {
    let c = config(
        ChannelModel::nakagami(1.0, 0.7).unwrap(),
        SelectorSpec::PowerLawAsymptotic { beta: 0.05 },
        ReliabilityTarget::probably_correct(0.05, 0.1).unwrap(),
        200,
        500,
    );
    let one = evaluate_with(&c, 3, Some(1)).unwrap();
    let four = evaluate_with(&c, 3, Some(4)).unwrap();
    let global = evaluate_with(&c, 3, None).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, global);
    // a different sweep position is a different experiment
    assert_ne!(one, evaluate_with(&c, 4, Some(1)).unwrap());
}

#[test]
fn analytic_conditioning_agrees_with_double_sampling() {
    let model = ChannelModel::rayleigh(1.0).unwrap();
    let target = ReliabilityTarget::averaged(0.05).unwrap();
    let n = 20;
    let trials = 1000;
    let prepared = PreparedSelector::new(SelectorSpec::ParametricRayleigh, target, n).unwrap();
    let base = stream::base_rng(7);
    let test_base = stream::base_rng(8);
    let sampler = model.sampler();
    let (mut q_sum, mut q_ss, mut hits) = (0.0, Vec::new(), 0usize);
    for t in 0..trials {
        let mut rng = stream::trial_rng(&base, 0, t);
        let s = TrainingSample::new((0..n).map(|_| rng.sample(sampler)).collect()).unwrap();
        let rate = prepared.rate(&s).unwrap();
        let q = model.cdf(rate.exp2() - 1.0).unwrap();
        q_sum += q;
        q_ss.push(q);
        let y: f64 = stream::trial_rng(&test_base, 0, t).sample(sampler);
        if rate > (1.0 + y).log2() {
            hits += 1;
        }
    }
    let mean = q_sum / trials as f64;
    let ss: f64 = q_ss.iter().map(|q| (q - mean).powi(2)).sum();
    let analytic = Interval::normal_mean(q_sum, ss, trials);
    let naive = Interval::wilson(hits, trials);
    assert!(overlap(&analytic, &naive), "{analytic:?} vs {naive:?}");
    // the conditioned estimate is far tighter
    assert!(analytic.half_width() < 0.5 * naive.half_width());
}

#[test]
fn rayleigh_selector_matches_exact_formulas() {
    let model = ChannelModel::rayleigh(3.0).unwrap();
    let n = 20;
    let ar = ReliabilityTarget::averaged(0.05).unwrap();
    let r = evaluate(&config(model, SelectorSpec::ParametricRayleigh, ar, n, 4000)).unwrap();
    let exact = mean_outage_exact_rayleigh(r.eps_n.unwrap(), n).unwrap();
    assert!((exact - 0.05).abs() < 1e-12);
    assert!(r.mean_outage.contains(exact), "{:?}", r.mean_outage);

    let pcr = ReliabilityTarget::probably_correct(0.05, 0.1).unwrap();
    let r = evaluate(&config(model, SelectorSpec::ParametricRayleigh, pcr, n, 4000)).unwrap();
    let exact = meta_prob_exact_rayleigh(r.eps_n.unwrap(), 0.05, n).unwrap();
    assert!((exact - 0.1).abs() < 1e-8);
    assert!(r.meta_prob.contains(exact), "{:?}", r.meta_prob);
}

#[test]
fn nonparametric_identities_hold() {
    let (eps, n) = (0.05, 200);
    let model = ChannelModel::rayleigh(1.0).unwrap();
    let ar = ReliabilityTarget::averaged(eps).unwrap();
    let r = evaluate(&config(model, SelectorSpec::NonParametric, ar, n, 4000)).unwrap();
    let l = r.order_index.unwrap();
    assert_eq!(l, 10);
    assert!(r.mean_outage.contains(l as f64 / (n + 1) as f64), "{:?}", r.mean_outage);

    let pcr = ReliabilityTarget::probably_correct(eps, 0.1).unwrap();
    let r = evaluate(&config(model, SelectorSpec::NonParametric, pcr, n, 4000)).unwrap();
    let l = r.order_index.unwrap();
    let exact = nonparam_meta_prob(eps, l, n).unwrap();
    assert!(exact <= 0.1);
    assert!(r.meta_prob.contains(exact), "{:?} vs {exact}", r.meta_prob);
}

#[test]
fn later_failures_are_counted() {
    let model = ChannelModel::rayleigh(1.0).unwrap();
    let target = ReliabilityTarget::averaged(0.1).unwrap();
    let always = evaluate_rule(&model, &target, 3, 10, 1, 0, Some(1), |_| {
        Err(relrate_core::Error::Unsupported("test"))
    });
    assert!(always.is_err());
    // fails whenever the first measurement exceeds 2 (probability e^-2)
    let rule = |s: &TrainingSample| {
        if s.values()[0] > 2.0 {
            Err(relrate_core::Error::Unsupported("test"))
        } else {
            Ok(0.1)
        }
    };
    match evaluate_rule(&model, &target, 3, 2000, 5, 0, Some(1), rule) {
        Ok(r) => {
            let frac = r.failed_trials as f64 / 2000.0;
            assert!((frac - (-2.0f64).exp()).abs() < 0.03, "{frac}");
            assert!((r.zero_rate_fraction - frac).abs() < 1e-12);
        }
        Err(_) => {
            // trial 0 itself failed; that must be reported, not counted
            let mut rng = stream::trial_rng(&stream::base_rng(5), 0, 0);
            assert!(rng.sample(model.sampler()) > 2.0);
        }
    }
}

#[test]
fn sweep_is_reproducible() {
    let base = config(
        ChannelModel::rayleigh(1.0).unwrap(),
        SelectorSpec::NonParametric,
        ReliabilityTarget::averaged(0.05).unwrap(),
        10,
        10,
    );
    let a = sweep(&base, SweepAxis::N, &[10.0, 100.0], Some(1)).unwrap();
    let b = sweep(&base, SweepAxis::N, &[10.0, 100.0], Some(2)).unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(a, b);
    assert!(sweep(&base, SweepAxis::K, &[1.0], None).is_err());
}

#[test]
fn rician_sweep_at_zero_k_matches_rayleigh() {
    let target = ReliabilityTarget::averaged(0.05).unwrap();
    let rician = config(
        ChannelModel::rician(1.0, 2.0).unwrap(),
        SelectorSpec::NonParametric,
        target,
        100,
        2000,
    );
    let points = sweep(&rician, SweepAxis::K, &[0.0, 1.0], None).unwrap();
    let mut rayleigh = rician;
    rayleigh.true_model = ChannelModel::rayleigh(1.0).unwrap();
    rayleigh.seed += 1;
    let r = evaluate(&rayleigh).unwrap();
    let k0 = &points[0].1;
    assert!(overlap(&k0.mean_outage, &r.mean_outage));
    assert!(overlap(&k0.throughput_ratio, &r.throughput_ratio));
}

#[test]
fn rayleigh_throughput_ratio_grows_with_n() {
    let base = config(
        ChannelModel::rayleigh(1.0).unwrap(),
        SelectorSpec::ParametricRayleigh,
        ReliabilityTarget::averaged(0.01).unwrap(),
        2,
        2000,
    );
    let points = sweep(&base, SweepAxis::N, &[2.0, 5.0, 20.0, 100.0], None).unwrap();
    for w in points.windows(2) {
        let (a, b) = (&w[0].1.throughput_ratio, &w[1].1.throughput_ratio);
        let slack = 2.0 * (a.hi - a.lo).max(b.hi - b.lo);
        assert!(b.estimate >= a.estimate - slack, "{} -> {}", a.estimate, b.estimate);
    }
    // AR design: p-bar stays at eps for every n
    for (n, r) in &points {
        let eps_n = epsn_rayleigh_ar(0.01, *n as usize).unwrap();
        assert_eq!(r.eps_n, Some(eps_n));
        assert!(r.mean_outage.contains(0.01), "n={n}: {:?}", r.mean_outage);
    }
}
