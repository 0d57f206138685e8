//! Modified Bessel functions `I_ν` and `K_ν` of real order ν ≥ 0 and positive
//! real argument.
//!
//! `I_ν` is summed from its ascending series below a crossover and from the
//! Hankel asymptotic expansion above it. `K_ν` uses Temme's series for z < 2,
//! Steed's continued fraction otherwise, and upward recurrence from the reduced
//! order |μ| ≤ 1/2. Integer and non-integer orders share the same path.

use std::f64::consts::PI;

use super::gamma::{ln_gamma, temme_gammas};
use super::{BesselOrder, EvalResult};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_ITER: usize = 100_000;

/// Largest argument for which `e^z` stays finite.
pub const EXP_OVERFLOW: f64 = 709.0;

/// Argument above which the scaled `I_ν` switches to the asymptotic expansion.
pub fn i_crossover(nu: f64) -> f64 {
    35.0 + nu * nu
}

pub(crate) fn i_series_scaled(nu: f64, z: f64) -> EvalResult {
    let half = 0.5 * z;
    let mut term = (nu * half.ln() - z - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let q = half * half;
    let mut k = 1usize;
    while k < MAX_ITER {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1;
    }
    EvalResult::new(sum, sum * EPS * (4.0 + (k as f64).sqrt()))
}

pub(crate) fn i_asymptotic_scaled(nu: f64, z: f64) -> EvalResult {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..MAX_ITER {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * z);
        if term == 0.0 {
            last = 0.0;
            break;
        }
        if term.abs() > last {
            // series started diverging; keep the previous partial sum
            break;
        }
        sum += term;
        last = term.abs();
        if last <= sum.abs() * 1e-17 {
            break;
        }
    }
    let norm = 1.0 / (2.0 * PI * z).sqrt();
    let err = norm * (last + sum.abs() * 4.0 * EPS);
    EvalResult::new(sum * norm, err)
}

/// `e^{-z} I_ν(z)`.
pub fn bessel_i_scaled(order: BesselOrder, z: f64) -> Result<EvalResult> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain("bessel_i_scaled", format!("z = {z} must be positive")));
    }
    let nu = order.nu();
    Ok(if z <= i_crossover(nu) {
        i_series_scaled(nu, z)
    } else {
        i_asymptotic_scaled(nu, z)
    })
}

/// Temme's series for `(K_μ(z), K_{μ+1}(z))`, |μ| ≤ 1/2, z < 2 (unscaled).
fn k_temme(mu: f64, z: f64) -> (f64, f64, usize) {
    let half = 0.5 * z;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -half.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = half * half;
    let mut sum1 = p;
    let mu2 = mu * mu;
    let mut iters = 0;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        iters = i;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / z, iters)
}

/// Steed's continued fraction for scaled `(e^z K_μ(z), e^z K_{μ+1}(z))`, z ≥ 2.
fn k_steed_scaled(mu: f64, z: f64) -> (f64, f64, usize) {
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut iters = 0;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        iters = i;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * z)).sqrt() / s;
    let k1 = kmu * (mu + z + 0.5 - h) / z;
    (kmu, k1, iters)
}

/// Scaled pair `(e^z K_ν(z), e^z K_{ν+1}(z))`.
pub(crate) fn k_scaled_pair(nu: f64, z: f64) -> (f64, f64, f64) {
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let (mut kmu, mut k1, iters) = if z < 2.0 {
        let (a, b, it) = k_temme(mu, z);
        let s = z.exp();
        (a * s, b * s, it)
    } else {
        k_steed_scaled(mu, z)
    };
    for i in 1..=nl {
        let next = (mu + i as f64) * (2.0 / z) * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    let rel = EPS * (8.0 + iters as f64 / 4.0 + nl as f64);
    (kmu, k1, rel)
}

/// `e^{z} K_ν(z)`.
pub fn bessel_k_scaled(order: BesselOrder, z: f64) -> Result<EvalResult> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain("bessel_k_scaled", format!("z = {z} must be positive")));
    }
    let (k, _, rel) = k_scaled_pair(order.nu(), z);
    Ok(EvalResult::new(k, k * rel))
}

/// `I_ν(z)`; errors with a range error when `e^z` overflows.
pub fn bessel_i(order: BesselOrder, z: f64) -> Result<EvalResult> {
    let scaled = bessel_i_scaled(order, z)?;
    if z > EXP_OVERFLOW {
        return Err(Error::Range {
            op: "bessel_i",
            msg: format!("e^{z} overflows; use bessel_i_scaled"),
        });
    }
    let s = z.exp();
    Ok(EvalResult::new(scaled.value * s, scaled.abs_error_estimate * s))
}

/// `K_ν(z)`.
pub fn bessel_k(order: BesselOrder, z: f64) -> Result<EvalResult> {
    let scaled = bessel_k_scaled(order, z)?;
    let s = (-z).exp();
    Ok(EvalResult::new(scaled.value * s, scaled.abs_error_estimate * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // I_{1/2}, I_{3/2}, K_{1/2}, K_{3/2} in closed form
    fn i_half(z: f64) -> f64 {
        (2.0 / (PI * z)).sqrt() * z.sinh()
    }
    fn i_three_halves(z: f64) -> f64 {
        // cosh z - sinh z / z = Σ 2k z^{2k} / (2k+1)!, summed directly for small z
        let bracket = if z < 1.0 {
            let (mut term, mut sum) = (1.0, 0.0);
            for k in 1..30 {
                let k2 = 2.0 * k as f64;
                term *= z * z / (k2 * (k2 + 1.0));
                sum += k2 * term;
            }
            sum
        } else {
            z.cosh() - z.sinh() / z
        };
        (2.0 / (PI * z)).sqrt() * bracket
    }
    fn k_half(z: f64) -> f64 {
        (PI / (2.0 * z)).sqrt() * (-z).exp()
    }
    fn k_three_halves(z: f64) -> f64 {
        k_half(z) * (1.0 + 1.0 / z)
    }

    #[test]
    fn spec_examples_i() {
        let v = bessel_i_scaled(ord(0.5), 1.0).unwrap().value;
        assert!(rel(v, (-1.0f64).exp() * i_half(1.0)) < 1e-14);
        let v = bessel_i(ord(0.5), 1.0).unwrap().value;
        assert!((v - 0.937_674_888_245_488).abs() < 1e-12);
        // ν = 2, z = 50: √(2πz) e^{-z} I is still 3.7% below its limit 1
        let v = bessel_i_scaled(ord(2.0), 50.0).unwrap().value * (2.0 * PI * 50.0).sqrt();
        assert!((v - 0.962_830_638_420_325_5).abs() < 1e-12);
        let v = bessel_i_scaled(ord(2.0), 5000.0).unwrap().value * (2.0 * PI * 5000.0).sqrt();
        assert!((v - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spec_examples_k() {
        let v = bessel_k_scaled(ord(0.5), 2.0).unwrap().value;
        assert!((v - (PI / 4.0).sqrt()).abs() < 1e-14);
        let v = bessel_k(ord(1.5), 1.0).unwrap().value;
        assert!((v - 0.922_137_008_895_789).abs() < 1e-12);
        let v = bessel_k_scaled(ord(0.5), 50.0).unwrap().value * (100.0 / PI).sqrt();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(matches!(bessel_k(ord(1.0), 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn half_integer_closed_forms() {
        for &z in &[1e-3, 0.1, 0.7, 1.9, 2.0, 2.5, 10.0, 30.0, 36.0, 60.0, 200.0] {
            let cases = [(0.5, i_half(z), k_half(z)), (1.5, i_three_halves(z), k_three_halves(z))];
            for (nu, iv, kv) in cases {
                let is = bessel_i_scaled(ord(nu), z).unwrap().value;
                let ks = bessel_k_scaled(ord(nu), z).unwrap().value;
                if z < 700.0 && iv.is_finite() {
                    assert!(rel(is, iv * (-z).exp()) < 1e-12, "I nu={nu} z={z}");
                }
                assert!(rel(ks, kv * z.exp()) < 1e-12, "K nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn integer_order_reference_values() {
        // A&S table values
        let k0 = bessel_k(ord(0.0), 1.0).unwrap().value;
        assert!(rel(k0, 0.421_024_438_240_708_3) < 1e-13);
        let k1 = bessel_k(ord(1.0), 1.0).unwrap().value;
        assert!(rel(k1, 0.601_907_230_197_234_6) < 1e-13);
        let i0 = bessel_i(ord(0.0), 1.0).unwrap().value;
        assert!(rel(i0, 1.266_065_877_752_008_4) < 1e-14);
        let i1 = bessel_i(ord(1.0), 1.0).unwrap().value;
        assert!(rel(i1, 0.565_159_103_992_485_0) < 1e-14);
        let k2 = bessel_k(ord(2.0), 5.0).unwrap().value;
        assert!(rel(k2, 5.308_943_712_223_460e-3) < 1e-12);
    }

    #[test]
    fn crossover_overlap_agrees() {
        for &nu in &[0.0, 0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 10.0] {
            let z = i_crossover(nu);
            let a = i_series_scaled(nu, z).value;
            let b = i_asymptotic_scaled(nu, z).value;
            assert!(rel(a, b) < 1e-10, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn large_argument_is_finite() {
        let v = bessel_i_scaled(ord(3.0), 5000.0).unwrap().value * (5000.0f64).sqrt();
        assert!((v * (2.0 * PI).sqrt() - 1.0).abs() < 1e-3);
        assert!(matches!(bessel_i(ord(1.0), 800.0), Err(Error::Range { .. })));
    }
}
