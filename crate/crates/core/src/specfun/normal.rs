//! Standard normal tail and its inverse.

use super::gamma::ln_reg_gamma_pair;
use super::{domain, SpecialError};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// `Q(x) = P[N(0,1) > x]`, via `erfc(z) = Q(1/2, z^2)` for the regularized
/// upper incomplete gamma function.
pub fn std_normal_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    let z2 = 0.5 * x * x;
    let (ln_p, ln_q) = ln_reg_gamma_pair(0.5, z2).expect("finite non-negative argument");
    if x >= 0.0 {
        0.5 * ln_q.exp()
    } else {
        0.5 + 0.5 * ln_p.exp()
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Acklam's rational approximation of the lower-tail quantile (rel. error ~1e-9).
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    if p < 0.02425 {
        tail(p)
    } else if p > 1.0 - 0.02425 {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `Q^{-1}(p)`: the `x` with `P[N(0,1) > x] = p`, for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64, SpecialError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("std_normal_quantile", p, "0 < p < 1"));
    }
    // work on the smaller tail so Newton steps see relative, not absolute, error
    let (q, sign) = if p <= 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let mut x = -acklam_lower(q);
    for _ in 0..4 {
        let f = std_normal_sf(x) - q;
        let step = f / std_normal_pdf(x);
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(sign * x)
}
