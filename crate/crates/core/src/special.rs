//! Gamma-family special functions: `gamma`, its entire reciprocal `rgamma`,
//! a signed log-gamma, and the generalized binomial coefficient.
//!
//! `rgamma` is deliberately not written as `1/gamma`: several series
//! coefficients in this crate are evaluated exactly at gamma poles, where the
//! reciprocal must come out as an exact zero.

use crate::error::{Error, Result};

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_TAU: f64 = 2.506_628_274_631_000_5;

fn is_nonpositive_integer(z: f64) -> bool {
    z <= 0.0 && z == z.floor()
}

/// sin(pi x) with the argument reduced against exact integers, so the zeros
/// at integer x are exact and values near large negative integers stay accurate.
fn sin_pi(x: f64) -> f64 {
    let k = x.round();
    let r = x - k;
    let s = (std::f64::consts::PI * r).sin();
    if (k as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Lanczos sum A(z) for z >= 0.5.
fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z - 1.0 + i as f64);
    }
    acc
}

/// Gamma for z >= 0.5 (no poles on this branch).
pub(crate) fn gamma_pos(z: f64) -> f64 {
    debug_assert!(z >= 0.5);
    let t = z + 6.5; // z - 1 + g + 0.5
    SQRT_TAU * t.powf(z - 0.5) * (-t).exp() * lanczos_sum(z)
}

/// Gamma function. Poles at non-positive integers are reported as errors.
pub fn gamma(z: f64) -> Result<f64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole { z });
    }
    if z >= 0.5 {
        Ok(gamma_pos(z))
    } else {
        // reflection: gamma(z) gamma(1-z) = pi / sin(pi z)
        Ok(std::f64::consts::PI / (sin_pi(z) * gamma_pos(1.0 - z)))
    }
}

/// Reciprocal gamma, entire: exactly 0 at non-positive integers.
pub fn rgamma(z: f64) -> f64 {
    if z >= 0.5 {
        1.0 / gamma_pos(z)
    } else if is_nonpositive_integer(z) {
        0.0
    } else {
        sin_pi(z) * gamma_pos(1.0 - z) / std::f64::consts::PI
    }
}

/// log|gamma(z)| with the sign of gamma(z) carried separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogGamma {
    pub log_abs: f64,
    pub sign: f64,
}

pub fn signed_log_gamma(z: f64) -> Result<SignedLogGamma> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole { z });
    }
    if z >= 0.5 {
        let t = z + 6.5;
        let log_abs = SQRT_TAU.ln() + (z - 0.5) * t.ln() - t + lanczos_sum(z).ln();
        Ok(SignedLogGamma { log_abs, sign: 1.0 })
    } else {
        // log|gamma(z)| = log(pi) - log|sin(pi z)| - log gamma(1-z)
        let s = sin_pi(z);
        let rec = signed_log_gamma(1.0 - z)?;
        Ok(SignedLogGamma {
            log_abs: std::f64::consts::PI.ln() - s.abs().ln() - rec.log_abs,
            sign: s.signum(),
        })
    }
}

/// gamma(a) / gamma(b) for a > 0, stable for large arguments.
pub(crate) fn gamma_ratio(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0);
    let ga = if a >= 0.5 {
        gamma_pos(a)
    } else {
        std::f64::consts::PI / (sin_pi(a) * gamma_pos(1.0 - a))
    };
    if b < 0.5 {
        // 1/gamma(b) may be an exact zero here; keep it multiplicative
        ga * rgamma(b)
    } else if a.max(b) < 30.0 {
        ga / gamma_pos(b)
    } else {
        let la = signed_log_gamma(a).expect("a > 0");
        let lb = signed_log_gamma(b).expect("b >= 0.5");
        (la.log_abs - lb.log_abs).exp()
    }
}

/// Generalized binomial coefficient gbinom(z, k) for real z and integer k,
/// via the multiplicative recurrence; k < 0 yields 0.
pub fn gbinom(z: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut c = 1.0;
    for j in 0..k {
        c *= (z - j as f64) / (j as f64 + 1.0);
    }
    c
}
