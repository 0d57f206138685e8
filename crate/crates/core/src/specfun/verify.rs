//! Property grid for the Bessel and hypergeometric evaluators.
//!
//! Each check reduces a family of identities to one number and compares it with
//! a fixed threshold. The suite is evaluator-agnostic so it can be pointed at a
//! deliberately broken evaluator.

use std::f64::consts::PI;

use serde::Serialize;

use super::{hyp2f1, BesselEvaluator, BesselOrder, HypergeometricParams};
use crate::error::{Error, Result};

pub const WRONSKIAN_TOL: f64 = 1e-9;
pub const MIN_DERIVATIVE_ORDER: f64 = 1.8;
pub const SMALL_ARG_TOL: f64 = 1e-5;
pub const LARGE_ARG_TOL: f64 = 1e-2;
pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const HYPERGEOMETRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyGrid {
    pub orders: Vec<f64>,
    pub z_values: Vec<f64>,
    pub derivative_z: Vec<f64>,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        let n = 61;
        let (lo, hi) = (1e-3f64.ln(), 50f64.ln());
        let z_values = (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect();
        Self {
            orders: vec![0.5, 1.0, 1.5, 2.0, 2.5],
            z_values,
            derivative_z: vec![0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// observed value must not exceed the threshold
    AtMost,
    /// observed value must reach the threshold
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub observed: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
    /// (ν, z) where the observed extreme occurred
    pub worst_input: Option<(f64, f64)>,
}

impl IdentityCheck {
    fn new(name: &'static str, observed: f64, threshold: f64, bound: Bound, worst_input: Option<(f64, f64)>) -> Self {
        let passed = observed.is_finite()
            && match bound {
                Bound::AtMost => observed <= threshold,
                Bound::AtLeast => observed >= threshold,
            };
        Self {
            name,
            observed,
            threshold,
            bound,
            passed,
            worst_input,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub evaluator: String,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failing(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tracks the largest (or smallest) value seen and where.
struct Extreme {
    value: f64,
    at: Option<(f64, f64)>,
    largest: bool,
}

impl Extreme {
    fn max() -> Self {
        Self {
            value: 0.0,
            at: None,
            largest: true,
        }
    }

    fn min() -> Self {
        Self {
            value: f64::INFINITY,
            at: None,
            largest: false,
        }
    }

    fn push(&mut self, v: f64, nu: f64, z: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        let better = if self.largest { v > self.value } else { v < self.value };
        if better || self.at.is_none() {
            self.value = v;
            self.at = Some((nu, z));
        }
    }
}

fn order(nu: f64) -> Result<BesselOrder> {
    BesselOrder::new(nu)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs every identity in the grid against `eval`.
pub fn run_suite(eval: &dyn BesselEvaluator, grid: &VerifyGrid) -> Result<VerifyReport> {
    if grid.orders.is_empty() || grid.z_values.is_empty() || grid.derivative_z.is_empty() {
        return Err(Error::Config("specfun verification grid is empty".into()));
    }
    if grid.orders.iter().any(|&nu| !(nu >= 0.0)) {
        return Err(Error::Config("orders must be nonnegative".into()));
    }
    if grid
        .z_values
        .iter()
        .chain(&grid.derivative_z)
        .any(|&z| !(z > 0.0) || z > 700.0)
    {
        return Err(Error::Config("arguments must lie in (0, 700]".into()));
    }

    let is = |nu: f64, z: f64| -> Result<f64> { eval.i_scaled(order(nu)?, z) };
    let ks = |nu: f64, z: f64| -> Result<f64> { eval.k_scaled(order(nu)?, z) };

    let mut checks = Vec::new();

    // z (I_ν K_{ν+1} + I_{ν+1} K_ν) = 1
    let mut w = Extreme::max();
    for &nu in &grid.orders {
        for &z in &grid.z_values {
            let s = z * (is(nu, z)? * ks(nu + 1.0, z)? + is(nu + 1.0, z)? * ks(nu, z)?);
            w.push((s - 1.0).abs(), nu, z);
        }
    }
    checks.push(IdentityCheck::new(
        "wronskian",
        w.value,
        WRONSKIAN_TOL,
        Bound::AtMost,
        w.at,
    ));

    // centered differences against the closed-form derivatives
    let i_unscaled = |nu: f64, z: f64| -> Result<f64> { Ok(is(nu, z)? * z.exp()) };
    let k_unscaled = |nu: f64, z: f64| -> Result<f64> { Ok(ks(nu, z)? * (-z).exp()) };
    type Pair<'a> = (
        &'static str,
        Box<dyn Fn(f64, f64) -> Result<f64> + 'a>,
        Box<dyn Fn(f64, f64) -> Result<f64> + 'a>,
    );
    let relations: Vec<Pair> = vec![
        (
            // d/dz (z^{-ν} I_ν) = z^{-ν} I_{ν+1}
            "derivative_i_order",
            Box::new(|nu, z| Ok(z.powf(-nu) * i_unscaled(nu, z)?)),
            Box::new(|nu, z| Ok(z.powf(-nu) * i_unscaled(nu + 1.0, z)?)),
        ),
        (
            // d/dz (z^{-ν} K_ν) = -z^{-ν} K_{ν+1}
            "derivative_k_order",
            Box::new(|nu, z| Ok(z.powf(-nu) * k_unscaled(nu, z)?)),
            Box::new(|nu, z| Ok(-z.powf(-nu) * k_unscaled(nu + 1.0, z)?)),
        ),
        (
            // d/dz (z^{ν} K_ν) = -z^{ν} K_{ν-1}, with K_{-μ} = K_μ
            "derivative_k_lowering_order",
            Box::new(|nu, z| Ok(z.powf(nu) * k_unscaled(nu, z)?)),
            Box::new(|nu, z| Ok(-z.powf(nu) * k_unscaled((nu - 1.0).abs(), z)?)),
        ),
    ];
    for (name, f, df) in &relations {
        let mut worst = Extreme::min();
        for &nu in &grid.orders {
            for &z in &grid.derivative_z {
                let h = 0.1 * z.min(1.0);
                let residual = |h: f64| -> Result<f64> {
                    let fd = (f(nu, z + h)? - f(nu, z - h)?) / (2.0 * h);
                    let exact = df(nu, z)?;
                    Ok(((fd - exact) / exact).abs())
                };
                let r1 = residual(h)?;
                let r2 = residual(h / 2.0)?;
                worst.push((r1 / r2).log2(), nu, z);
            }
        }
        checks.push(IdentityCheck::new(
            name,
            worst.value,
            MIN_DERIVATIVE_ORDER,
            Bound::AtLeast,
            worst.at,
        ));
    }

    // limits at 0 and ∞
    let z0: f64 = 1e-6;
    let mut small_i = Extreme::max();
    let mut small_k = Extreme::max();
    let zinf: f64 = 500.0;
    let mut large_i = Extreme::max();
    let mut large_k = Extreme::max();
    for &nu in &grid.orders {
        let gnu1 = super::gamma_raw(nu + 1.0);
        let v = z0.powf(-nu) * i_unscaled(nu, z0)?;
        small_i.push(rel(v, 1.0 / (2f64.powf(nu) * gnu1)), nu, z0);
        if nu > 0.0 {
            let v = z0.powf(nu) * k_unscaled(nu, z0)?;
            small_k.push(rel(v, 2f64.powf(nu - 1.0) * super::gamma_raw(nu)), nu, z0);
        }
        let v = zinf.sqrt() * is(nu, zinf)?;
        large_i.push(rel(v, 1.0 / (2.0 * PI).sqrt()), nu, zinf);
        let v = zinf.sqrt() * ks(nu, zinf)?;
        large_k.push(rel(v, (PI / 2.0).sqrt()), nu, zinf);
    }
    checks.push(IdentityCheck::new(
        "small_argument_i",
        small_i.value,
        SMALL_ARG_TOL,
        Bound::AtMost,
        small_i.at,
    ));
    checks.push(IdentityCheck::new(
        "small_argument_k",
        small_k.value,
        SMALL_ARG_TOL,
        Bound::AtMost,
        small_k.at,
    ));
    checks.push(IdentityCheck::new(
        "large_argument_i",
        large_i.value,
        LARGE_ARG_TOL,
        Bound::AtMost,
        large_i.at,
    ));
    checks.push(IdentityCheck::new(
        "large_argument_k",
        large_k.value,
        LARGE_ARG_TOL,
        Bound::AtMost,
        large_k.at,
    ));

    // half-integer orders in elementary closed form
    let mut closed = Extreme::max();
    for &z in &grid.z_values {
        let ki = (PI / (2.0 * z)).sqrt();
        let ih = (2.0 / (PI * z)).sqrt();
        // e^{-z} sinh z and e^{-z} cosh z without overflow
        let sh = 0.5 * (1.0 - (-2.0 * z).exp());
        let ch = 0.5 * (1.0 + (-2.0 * z).exp());
        let i_half = ih * sh;
        let i_3half = if z < 1.0 {
            // e^{-z}(cosh z - sinh z / z) via Σ 2k z^{2k}/(2k+1)! to avoid cancellation
            let (mut term, mut sum) = (1.0, 0.0);
            for k in 1..30 {
                let k2 = 2.0 * k as f64;
                term *= z * z / (k2 * (k2 + 1.0));
                sum += k2 * term;
            }
            ih * sum * (-z).exp()
        } else {
            ih * (ch - sh / z)
        };
        closed.push(rel(is(0.5, z)?, i_half), 0.5, z);
        closed.push(rel(is(1.5, z)?, i_3half), 1.5, z);
        closed.push(rel(ks(0.5, z)?, ki), 0.5, z);
        closed.push(rel(ks(1.5, z)?, ki * (1.0 + 1.0 / z)), 1.5, z);
    }
    checks.push(IdentityCheck::new(
        "half_integer_closed_form",
        closed.value,
        CLOSED_FORM_TOL,
        Bound::AtMost,
        closed.at,
    ));

    // positivity and monotonicity on the sorted grid
    let mut zs = grid.z_values.clone();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let mut violations = 0usize;
    let mut first_violation = None;
    for &nu in &grid.orders {
        let mut prev: Option<(f64, f64, f64)> = None;
        for &z in &zs {
            let (i, k) = (is(nu, z)?, ks(nu, z)?);
            let mut bad = !(i > 0.0 && k > 0.0);
            if let Some((pz, pi, pk)) = prev {
                // compare unscaled values via ratios of scaled ones
                let di = (i / pi) * (z - pz).exp();
                let dk = (k / pk) * (pz - z).exp();
                bad |= !(di > 1.0) || !(dk < 1.0);
            }
            if bad {
                violations += 1;
                first_violation.get_or_insert((nu, z));
            }
            prev = Some((z, i, k));
        }
    }
    checks.push(IdentityCheck::new(
        "positivity_monotonicity",
        violations as f64,
        0.0,
        Bound::AtMost,
        first_violation,
    ));

    // hypergeometric closed forms
    let mut hyp = Extreme::max();
    for &z in &[0.0, 0.1, 0.25, 0.5, 0.8, 0.9] {
        for &(a, b) in &[(0.5, 1.5), (1.0, 2.0), (2.5, 0.75)] {
            let v = hyp2f1(HypergeometricParams::new(a, b, a, z)?)?.value;
            hyp.push(rel(v, (1.0 - z).powf(-b)), a, z);
        }
        if z > 0.0 {
            let s = z.sqrt();
            let v = hyp2f1(HypergeometricParams::new(0.5, 1.0, 1.5, z)?)?.value;
            hyp.push(rel(v, s.atanh() / s), 0.5, z);
            let v = hyp2f1(HypergeometricParams::new(1.0, 1.0, 2.0, z)?)?.value;
            hyp.push(rel(v, -(-z).ln_1p() / z), 1.0, z);
        }
    }
    checks.push(IdentityCheck::new(
        "hypergeometric_closed_form",
        hyp.value,
        HYPERGEOMETRIC_TOL,
        Bound::AtMost,
        hyp.at,
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        evaluator: eval.name().to_string(),
        checks,
        passed,
    })
}
