use serde::Serialize;

use crate::error::{Error, Result};

/// `σ(x) = exp(-1/x)` for x > 0, else 0, with its first two derivatives.
fn sigma(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = (-1.0 / x).exp();
    let x2 = x * x;
    (s, s / x2, s * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// Smooth step `η(s)`: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, with `(η, η', η'')`.
pub fn eta(s: f64) -> (f64, f64, f64) {
    let (a, a1, a2) = sigma(2.0 - 2.0 * s);
    let (b, b1, b2) = sigma(2.0 * s - 1.0);
    // chain rule for the inner affine maps
    let (da, dda) = (-2.0 * a1, 4.0 * a2);
    let (db, ddb) = (2.0 * b1, 4.0 * b2);
    let d = a + b;
    let num = da * b - a * db;
    let num1 = dda * b - a * ddb;
    let dd = da + db;
    (a / d, num / (d * d), (num1 * d - 2.0 * num * dd) / (d * d * d))
}

/// Time cutoff `η_R(t) = η(t/R)`, optionally starred (zero for `t < R/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub scale_r: f64,
    pub starred: bool,
}

impl CutoffSpec {
    pub fn new(scale_r: f64, starred: bool) -> Result<Self> {
        if !(scale_r > 1.0) || !scale_r.is_finite() {
            return Err(Error::Config(format!("cutoff scale R = {scale_r} must exceed 1")));
        }
        Ok(Self { scale_r, starred })
    }

    /// `(η_R, η_R', η_R'')` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let s = t / self.scale_r;
        if self.starred && s < 0.5 {
            return (0.0, 0.0, 0.0);
        }
        let (e, e1, e2) = eta(s);
        let r = self.scale_r;
        (e, e1 / r, e2 / (r * r))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// `(η_R^q, d/dt η_R^q, d²/dt² η_R^q)` for `q >= 2`, using
    /// `(η^q)'' = q η^{q-2} ((q-1) η'² + η η'')`.
    pub fn power(&self, t: f64, q: f64) -> (f64, f64, f64) {
        let (e, e1, e2) = self.eval(t);
        if e == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let v = e.powf(q);
        let d1 = q * e.powf(q - 1.0) * e1;
        let d2 = q * e.powf(q - 2.0) * ((q - 1.0) * e1 * e1 + e * e2);
        (v, d1, d2)
    }
}
