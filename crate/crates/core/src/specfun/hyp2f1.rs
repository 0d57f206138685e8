use super::EvalResult;
use crate::error::{Error, Result};

/// Arguments of the Gauss hypergeometric function `F(a, b, c; z)` on `0 <= z < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HypergeometricParams {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        let p = Self { a, b, c, z };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::domain("hyp2f1", format!("c = {} must be positive", self.c)));
        }
        if !(0.0..1.0).contains(&self.z) {
            return Err(Error::domain("hyp2f1", format!("z = {} outside [0, 1)", self.z)));
        }
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::domain("hyp2f1", "a and b must be finite"));
        }
        Ok(())
    }
}

/// Above this argument a negative `c - a - b` triggers the Euler transformation.
const EULER_THRESHOLD: f64 = 0.75;
const MAX_TERMS: usize = 1_000_000;

fn series(a: f64, b: f64, c: f64, z: f64) -> std::result::Result<EvalResult, f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut abs_sum = 1.0f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        if term == 0.0 {
            // terminating series
            return Ok(EvalResult::new(sum, abs_sum * 4.0 * f64::EPSILON));
        }
        sum += term;
        abs_sum += term.abs();
        let n1 = nf + 1.0;
        let ratio = ((a + n1) * (b + n1) / ((c + n1) * (n1 + 1.0)) * z).abs();
        // once the term ratio is below one and shrinking, the tail is geometric-bounded
        if ratio < 1.0 && nf + 1.0 > (a.abs() + b.abs() + c) {
            let tail = term.abs() * ratio / (1.0 - ratio);
            if tail <= 0.5 * f64::EPSILON * sum.abs() {
                let rounding = abs_sum * f64::EPSILON * (2.0 + (n as f64).sqrt());
                return Ok(EvalResult::new(sum, tail + rounding));
            }
        }
    }
    Err(sum)
}

/// Gauss hypergeometric function `F(a, b, c; z) = Σ (a)_n (b)_n / ((c)_n n!) z^n`.
///
/// For `z > 0.75` with `c - a - b < 0` the Euler form
/// `(1-z)^{c-a-b} F(c-a, c-b, c; z)` is summed instead, whose coefficients decay.
pub fn hyp2f1(params: HypergeometricParams) -> Result<EvalResult> {
    params.validate()?;
    let HypergeometricParams { a, b, c, z } = params;
    let s = c - a - b;
    let (prefactor, aa, bb) = if z > EULER_THRESHOLD && s < 0.0 {
        ((1.0 - z).powf(s), c - a, c - b)
    } else {
        (1.0, a, b)
    };
    match series(aa, bb, c, z) {
        Ok(r) => Ok(EvalResult::new(prefactor * r.value, prefactor * r.abs_error_estimate)),
        Err(partial) => Err(Error::Accuracy {
            op: "hyp2f1",
            msg: format!("series did not converge within {MAX_TERMS} terms at z = {z}"),
            partial: prefactor * partial,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: f64, b: f64, c: f64, z: f64) -> f64 {
        hyp2f1(HypergeometricParams::new(a, b, c, z).unwrap()).unwrap().value
    }

    #[test]
    fn spec_examples() {
        for &(a, b) in &[(0.3, 1.7), (2.0, 0.5), (1.5, 2.0)] {
            let v = f(a, b, a, 0.5);
            assert!((v / 0.5f64.powf(-b) - 1.0).abs() < 1e-13);
        }
        assert_eq!(f(1.0, 2.0, 3.0, 0.0), 1.0);
        let v = f(0.5, 1.0, 1.5, 0.25);
        assert!((v - 0.5f64.atanh() / 0.5).abs() < 1e-14);
    }

    #[test]
    fn near_one_with_negative_excess() {
        // F(a, b, a; z) = (1-z)^{-b} close to the light cone
        for &z in &[0.9, 0.99, 0.999] {
            let v = f(1.0, 1.5, 1.0, z);
            assert!((v / (1.0 - z).powf(-1.5) - 1.0).abs() < 1e-12);
        }
        // F(1,1,2;z) = -ln(1-z)/z
        let z = 0.99;
        let v = f(1.0, 1.0, 2.0, z);
        assert!((v / (-(1.0 - z).ln() / z) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn positive_excess_stays_finite() {
        // F(1/2, 1/2, 2; z) has c - a - b = 1 > 0; compare with z = 0.99 value from the
        // Gauss-summation limit Γ(2)Γ(1)/(Γ(3/2)^2) = 4/π as z → 1
        let v = f(0.5, 0.5, 2.0, 0.999_9);
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn domain_and_accuracy_errors() {
        assert!(matches!(
            HypergeometricParams::new(1.0, 1.0, 1.0, 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            HypergeometricParams::new(1.0, 1.0, 0.0, 0.5),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            HypergeometricParams::new(1.0, 1.0, 1.0, -0.1),
            Err(Error::Domain { .. })
        ));
        // c - a - b = 0 with z extremely close to 1: series budget exhausted
        let p = HypergeometricParams::new(1.0, 1.0, 2.0, 1.0 - 1e-9).unwrap();
        match hyp2f1(p) {
            Err(Error::Accuracy { partial, .. }) => assert!(partial > 1.0),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
