use std::f64::consts::PI;

use super::EvalResult;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
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

/// Taylor coefficients of `1/Γ(1+x) = Σ a_k x^k` (A&S 6.1.34 shifted by one).
const RECIP_GAMMA_1P: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

fn lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Γ(x) for real `x` that is not a nonpositive integer.
pub(crate) fn gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * lanczos(1.0 - x))
    } else {
        lanczos(x)
    }
}

/// ln Γ(x) for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_raw(x).ln();
    }
    let x1 = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x1 + i as f64);
    }
    let t = x1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x1 + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function on the positive half-line.
pub fn gamma_fn(x: f64) -> Result<EvalResult> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("gamma_fn", format!("x = {x} must be positive")));
    }
    let value = if x.fract() == 0.0 && x <= 171.0 {
        // exact factorial for integer arguments
        (1..x as u32).fold(1.0, |acc, k| acc * k as f64)
    } else {
        gamma_raw(x)
    };
    if !value.is_finite() {
        return Err(Error::Range {
            op: "gamma_fn",
            msg: format!("Γ({x}) overflows"),
        });
    }
    Ok(EvalResult::new(value, value.abs() * 1e-14))
}

/// Pochhammer symbol by direct product: `(d)_0 = 1`, `(d)_n = d (d+1) ... (d+n-1)`.
pub fn pochhammer(d: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (d + k as f64))
}

/// `1/Γ(1+x)` for |x| <= 1/2 from its Taylor series.
pub(crate) fn recip_gamma_1p(x: f64) -> f64 {
    RECIP_GAMMA_1P.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Temme's auxiliary functions for |mu| <= 1/2:
/// `(Γ1, Γ2, 1/Γ(1+mu), 1/Γ(1-mu))` with
/// `Γ1 = (1/Γ(1-mu) - 1/Γ(1+mu)) / (2 mu)` and `Γ2 = (1/Γ(1-mu) + 1/Γ(1+mu)) / 2`.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    // odd coefficients feed Γ1, even ones Γ2
    for (k, c) in RECIP_GAMMA_1P.iter().enumerate().rev() {
        if k % 2 == 1 {
            g1 = g1 * mu * mu + c;
        } else {
            g2 = g2 * mu * mu + c;
        }
    }
    // g1 currently holds Σ a_{2j+1} mu^{2j}
    let gam1 = -g1;
    let gam2 = g2;
    (gam1, gam2, recip_gamma_1p(mu), recip_gamma_1p(-mu))
}

/// Regularized lower incomplete gamma `P(a, x) = γ(a, x) / Γ(a)` by its power series.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x < 0.0 {
        return Err(Error::domain("regularized_lower_gamma", format!("a = {a}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // P(a,x) = x^a e^{-x} Σ x^n / Γ(a+n+1)
    let mut term = (a * x.ln() - x - ln_gamma(a + 1.0)).exp();
    let mut sum = term;
    for n in 1..10_000 {
        term *= x / (a + n as f64);
        sum += term;
        if term < sum * 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::Accuracy {
        op: "regularized_lower_gamma",
        msg: "series did not converge".into(),
        partial: sum,
    })
}
