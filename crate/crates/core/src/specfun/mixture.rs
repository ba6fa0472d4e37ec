//! Poisson mixtures of gamma laws: the noncentral chi-square family and
//! the first-order Marcum Q-function.
//!
//! A sum of `n` i.i.d. Rician powers scaled by `1/lambda` has law
//! `sum_j Pois(j; mu) Gamma(n + j, 1)` with `mu = n k`, and
//! `Q1(a, b)` is the survival function of the `n = 1`, `mu = a^2/2` member
//! at `b^2/2`. Every term in these series is positive, so both the CDF and
//! the survival function can be summed without cancellation.

use super::gamma::{ln_gamma, ln_reg_gamma_pair};
use super::{domain, log_add_exp, SpecialError};

/// Index range that carries all non-negligible mixture terms.
///
/// Term magnitudes peak near `mu` (Poisson weight) and near `j*` solving
/// `j (shape + j) = mu x` (where the weight times the gamma tail balance).
/// Outside `[min - 12 sd - 40, max + 12 sd + 40]` they fall off faster than
/// geometrically and are below 1e-30 of the peak.
fn mixture_range(shape: f64, mu: f64, x: f64) -> (u64, u64) {
    let j_star = 0.5 * (-shape + (shape * shape + 4.0 * mu * x).sqrt());
    let lo_c = mu.min(j_star);
    let hi_c = mu.max(j_star);
    let lo = (lo_c - 12.0 * (lo_c + 1.0).sqrt() - 40.0).max(0.0).floor() as u64;
    let hi = (hi_c + 12.0 * (hi_c + 1.0).sqrt() + 40.0).ceil() as u64;
    (lo, hi)
}

fn ln_poisson(j: u64, mu: f64) -> f64 {
    let jf = j as f64;
    -mu + jf * mu.ln() - ln_gamma(jf + 1.0)
}

/// `ln(x^a e^{-x} / Gamma(a + 1))`, the step between `P(a, x)` and `P(a + 1, x)`.
fn ln_step(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a + 1.0)
}

/// Incremental log-sum-exp accumulator.
struct LogSum {
    value: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
        }
    }
    fn add(&mut self, ln_term: f64) {
        self.value = log_add_exp(self.value, ln_term);
    }
}

/// CDF and survival function of `sum_j Pois(j; mu) Gamma(shape + j, 1)` at `x`.
///
/// Returns `(P, Q)`; each is summed from positive terms with recurrences that
/// only ever add, so both are accurate in relative terms.
pub fn poisson_gamma_mixture(shape: f64, mu: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(domain("poisson_gamma_mixture", shape, "shape > 0"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(domain("poisson_gamma_mixture", mu, "mu >= 0"));
    }
    if !(x >= 0.0) {
        return Err(domain("poisson_gamma_mixture", x, "x >= 0"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    if mu == 0.0 {
        let (ln_p, ln_q) = ln_reg_gamma_pair(shape, x)?;
        return Ok((ln_p.exp(), ln_q.exp()));
    }
    let (lo, hi) = mixture_range(shape, mu, x);

    // P(a, x) decreases in a: start at the top and recur downward, adding
    // P(a - 1, x) = P(a, x) + x^{a-1} e^{-x} / Gamma(a).
    let mut ln_p = ln_reg_gamma_pair(shape + hi as f64, x)?.0;
    let mut p_sum = LogSum::new();
    let mut j = hi;
    loop {
        p_sum.add(ln_poisson(j, mu) + ln_p);
        if j == lo {
            break;
        }
        j -= 1;
        ln_p = log_add_exp(ln_p, ln_step(shape + j as f64, x));
    }
    // Terms below lo only matter when lo > 0 and they are already negligible;
    // include a short guard run so tiny sums keep their leading terms.
    let mut guard = j;
    while guard > 0 {
        guard -= 1;
        ln_p = log_add_exp(ln_p, ln_step(shape + guard as f64, x));
        let term = ln_poisson(guard, mu) + ln_p;
        p_sum.add(term);
        if term < p_sum.value - 80.0 {
            break;
        }
    }

    // Q(a, x) increases in a: start at the bottom and recur upward.
    let mut ln_q = ln_reg_gamma_pair(shape + lo as f64, x)?.1;
    let mut q_sum = LogSum::new();
    let mut j = lo;
    loop {
        q_sum.add(ln_poisson(j, mu) + ln_q);
        ln_q = log_add_exp(ln_q, ln_step(shape + j as f64, x));
        j += 1;
        if j > hi {
            let term = ln_poisson(j, mu) + ln_q;
            if term < q_sum.value - 80.0 {
                break;
            }
        }
    }

    let p = p_sum.value.exp().min(1.0);
    let q = q_sum.value.exp().min(1.0);
    Ok((p, q))
}

/// `ln` of the density of `sum_j Pois(j; mu) Gamma(shape + j, 1)` at `x > 0`.
pub fn poisson_gamma_mixture_ln_pdf(shape: f64, mu: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_x = x.ln();
    let ln_gamma_pdf = |a: f64| (a - 1.0) * ln_x - x - ln_gamma(a);
    if mu == 0.0 {
        return ln_gamma_pdf(shape);
    }
    let (lo, hi) = mixture_range(shape, mu, x);
    let mut sum = LogSum::new();
    for j in lo..=hi {
        sum.add(ln_poisson(j, mu) + ln_gamma_pdf(shape + j as f64));
    }
    sum.value
}

/// First-order Marcum Q-function `Q1(a, b)`.
///
/// Evaluated as the Poisson mixture `sum_j Pois(j; a^2/2) Q(j + 1, b^2/2)`,
/// the incomplete-gamma form of the Bessel series; the index range carries
/// an explicit 12-standard-deviation truncation bound.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64, SpecialError> {
    marcum_pair(a, b).map(|(_, q)| q)
}

/// `1 - Q1(a, b)`, accurate when it is tiny.
pub fn marcum_q1_complement(a: f64, b: f64) -> Result<f64, SpecialError> {
    marcum_pair(a, b).map(|(p, _)| p)
}

fn marcum_pair(a: f64, b: f64) -> Result<(f64, f64), SpecialError> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain("marcum_q1", a, "a >= 0"));
    }
    if !(b >= 0.0) {
        return Err(domain("marcum_q1", b, "b >= 0"));
    }
    if b == 0.0 {
        return Ok((0.0, 1.0));
    }
    let half_b2 = 0.5 * b * b;
    if a == 0.0 {
        return Ok((-(-half_b2).exp_m1(), (-half_b2).exp()));
    }
    poisson_gamma_mixture(1.0, 0.5 * a * a, half_b2)
}
