//! Gamma, Pochhammer, modified Bessel and Gauss hypergeometric functions.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod gamma;
mod hyp2f1;
pub mod verify;

use serde::Serialize;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled, i_crossover, EXP_OVERFLOW};
pub(crate) use gamma::gamma_raw;
pub use gamma::{gamma_fn, pochhammer, regularized_lower_gamma};
pub use hyp2f1::{hyp2f1, HypergeometricParams};

use crate::error::{Error, Result};

/// Value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

impl EvalResult {
    pub fn new(value: f64, abs_error_estimate: f64) -> Self {
        Self {
            value,
            abs_error_estimate: abs_error_estimate.abs(),
        }
    }
}

/// Nonnegative real order of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::domain("BesselOrder", format!("order {nu} is not finite")));
        }
        if nu < 0.0 {
            return Err(Error::domain("BesselOrder", format!("order {nu} is negative")));
        }
        Ok(Self(nu))
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    pub fn plus_one(self) -> Self {
        Self(self.0 + 1.0)
    }
}

/// Source of scaled modified Bessel values, `e^{-z} I_ν(z)` and `e^{z} K_ν(z)`.
///
/// The verification suite runs against any implementation, which lets faulty
/// evaluators be swapped in to prove the suite actually detects errors.
pub trait BesselEvaluator: Send + Sync {
    fn name(&self) -> &str;
    fn i_scaled(&self, order: BesselOrder, z: f64) -> Result<f64>;
    fn k_scaled(&self, order: BesselOrder, z: f64) -> Result<f64>;
}

/// The evaluators implemented in this module.
#[derive(Debug, Default, Clone, Copy)]
pub struct StandardBessel;

impl BesselEvaluator for StandardBessel {
    fn name(&self) -> &str {
        "standard"
    }

    fn i_scaled(&self, order: BesselOrder, z: f64) -> Result<f64> {
        bessel_i_scaled(order, z).map(|r| r.value)
    }

    fn k_scaled(&self, order: BesselOrder, z: f64) -> Result<f64> {
        bessel_k_scaled(order, z).map(|r| r.value)
    }
}

/// Wraps another evaluator and multiplies every K value by `1 + relative`.
pub struct PerturbedK<E> {
    pub inner: E,
    pub relative: f64,
}

impl<E: BesselEvaluator> BesselEvaluator for PerturbedK<E> {
    fn name(&self) -> &str {
        "perturbed-k"
    }

    fn i_scaled(&self, order: BesselOrder, z: f64) -> Result<f64> {
        self.inner.i_scaled(order, z)
    }

    fn k_scaled(&self, order: BesselOrder, z: f64) -> Result<f64> {
        Ok(self.inner.k_scaled(order, z)? * (1.0 + self.relative))
    }
}

/// Names accepted by [`evaluator_by_name`].
pub const EVALUATOR_NAMES: &[&str] = &["standard", "perturbed-k"];

/// Looks up a Bessel evaluator by name. `perturbation` only affects `perturbed-k`.
pub fn evaluator_by_name(name: &str, perturbation: f64) -> Option<Box<dyn BesselEvaluator>> {
    match name {
        "standard" => Some(Box::new(StandardBessel)),
        "perturbed-k" => Some(Box::new(PerturbedK {
            inner: StandardBessel,
            relative: perturbation,
        })),
        _ => None,
    }
}
