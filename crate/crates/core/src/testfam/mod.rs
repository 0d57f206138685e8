//! Weights for the exterior of the unit ball: the harmonic function `U`, the
//! normalized Bessel pair `ψ₁, ψ₂`, the Dirichlet eigenfunctions `φ_λ` and the
//! λ-averaged linear waves `Φ_β`.

mod family;
mod shift;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::QuadOptions;
use crate::specfun::{bessel_i_scaled, bessel_k_scaled, gamma_raw, BesselOrder, EXP_OVERFLOW};

pub use family::{
    dt_relation_check, lower_bound_constant, phi_beta, phi_beta_lower_bound, phi_beta_upper_shape, shifted_phi,
    yz_closed_form, yz_integral,
};
pub use shift::{i_beta, select_t_shift, ShiftSelection, SHIFT_SEARCH_DOUBLINGS};

/// Space dimension, Bessel order and data radius of the exterior problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorGeometry {
    dim: u32,
    nu: f64,
    support_radius: f64,
    #[serde(skip)]
    order: BesselOrder,
    #[serde(skip)]
    norm: f64,
    #[serde(skip)]
    sphere_area: f64,
}

impl ExteriorGeometry {
    pub fn new(dim: u32, support_radius: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Config(format!("dimension {dim} must be at least 3")));
        }
        if !(support_radius > 1.0) || !support_radius.is_finite() {
            return Err(Error::Config(format!(
                "data radius {support_radius} must exceed the obstacle radius 1"
            )));
        }
        let nu = (dim as f64 - 2.0) / 2.0;
        let half_n = dim as f64 / 2.0;
        Ok(Self {
            dim,
            nu,
            support_radius,
            order: BesselOrder::new(nu)?,
            norm: 2f64.powf(nu) * gamma_raw(nu + 1.0),
            sphere_area: 2.0 * PI.powf(half_n) / gamma_raw(half_n),
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    /// Surface area of the unit sphere in dimension N.
    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    /// `2^ν Γ(ν+1)`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }
}

/// Parameters of the shifted family `Φ̃_β(r, t) = t_s^β Φ_β(r, t_s + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunctionParams {
    pub beta: f64,
    pub t_shift: f64,
    pub quad_tolerance: f64,
    pub quad_max_subdivisions: usize,
}

impl TestFunctionParams {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;
    pub const DEFAULT_SUBDIVISIONS: usize = 500;

    pub fn new(geom: &ExteriorGeometry, beta: f64, t_shift: f64) -> Result<Self> {
        let p = Self {
            beta,
            t_shift,
            quad_tolerance: Self::DEFAULT_TOLERANCE,
            quad_max_subdivisions: Self::DEFAULT_SUBDIVISIONS,
        };
        p.validate(geom)?;
        Ok(p)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.quad_tolerance = tol;
        self
    }

    pub fn validate(&self, geom: &ExteriorGeometry) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.t_shift > geom.support_radius()) || !self.t_shift.is_finite() {
            return Err(Error::Config(format!(
                "t_shift = {} must exceed the data radius {}",
                self.t_shift,
                geom.support_radius()
            )));
        }
        if !(self.quad_tolerance > 0.0) || self.quad_max_subdivisions == 0 {
            return Err(Error::Config("quadrature tolerance and budget must be positive".into()));
        }
        Ok(())
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: self.quad_tolerance,
            rel_tol: 1e-13,
            max_subdivisions: self.quad_max_subdivisions,
        }
    }
}

/// A point `(|x|, t)` of the exterior light cone `1 <= |x| < t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightConePoint {
    r: f64,
    t: f64,
}

impl LightConePoint {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        if !(r >= 1.0) || !(t > 0.0) || !(r < t) || !t.is_finite() {
            return Err(Error::domain(
                "LightConePoint",
                format!("(r, t) = ({r}, {t}) is not in 1 <= r < t"),
            ));
        }
        Ok(Self { r, t })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `U(r) = 1 - r^{2-N}`.
pub fn harmonic_u(geom: &ExteriorGeometry, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::domain("harmonic_u", format!("r = {r} lies inside the obstacle")));
    }
    Ok(1.0 - r.powi(2 - geom.dim as i32))
}

/// `e^{-z} ψ₁(z)`.
pub(crate) fn psi1_scaled(geom: &ExteriorGeometry, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    if !(z > 0.0) {
        return Err(Error::domain("psi1", format!("z = {z} is negative")));
    }
    let is = bessel_i_scaled(geom.order, z)?.value;
    Ok(geom.norm * z.powf(-geom.nu) * is)
}

/// `ψ₁(z) = 2^ν Γ(ν+1) z^{-ν} I_ν(z)`, continued by `ψ₁(0) = 1`.
pub fn psi1(geom: &ExteriorGeometry, z: f64) -> Result<f64> {
    let s = psi1_scaled(geom, z)?;
    if z > EXP_OVERFLOW {
        return Err(Error::Range {
            op: "psi1",
            msg: format!("e^{z} overflows"),
        });
    }
    Ok(s * z.exp())
}

/// `ψ₂(z) = 2^ν Γ(ν+1) z^{-ν} K_ν(z)`.
pub fn psi2(geom: &ExteriorGeometry, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("psi2", format!("z = {z} must be positive")));
    }
    let ks = bessel_k_scaled(geom.order, z)?.value;
    Ok(geom.norm * z.powf(-geom.nu) * ks * (-z).exp())
}

/// `e^{-λr} φ_λ(r)`, the form used inside the λ integrals.
pub(crate) fn phi_lambda_scaled(geom: &ExteriorGeometry, lambda: f64, r: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(
            "phi_lambda",
            format!("lambda = {lambda} must be positive"),
        ));
    }
    if !(r >= 1.0) {
        return Err(Error::domain("phi_lambda", format!("r = {r} lies inside the obstacle")));
    }
    let z = lambda * r;
    let i_z = bessel_i_scaled(geom.order, z)?.value;
    let i_1 = bessel_i_scaled(geom.order, lambda)?.value;
    let k_z = bessel_k_scaled(geom.order, z)?.value;
    let k_1 = bessel_k_scaled(geom.order, lambda)?.value;
    let reflected = i_1 * (k_z / k_1) * (-2.0 * lambda * (r - 1.0)).exp();
    Ok(geom.norm * z.powf(-geom.nu) * (i_z - reflected))
}

/// `φ_λ(r) = ψ₁(λr) - (I_ν(λ)/K_ν(λ)) ψ₂(λr)`, which vanishes at `r = 1`.
pub fn phi_lambda(geom: &ExteriorGeometry, lambda: f64, r: f64) -> Result<f64> {
    let s = phi_lambda_scaled(geom, lambda, r)?;
    let z = lambda * r;
    if z > EXP_OVERFLOW {
        return Err(Error::Range {
            op: "phi_lambda",
            msg: format!("e^{z} overflows"),
        });
    }
    Ok(s * z.exp())
}

/// Centered-difference residual of `λ²φ - φ'' - (N-1)/r φ'` at `r`.
pub fn verify_eigen_equation(geom: &ExteriorGeometry, lambda: f64, r: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !(r > 1.0 + 2.0 * h) {
        return Err(Error::domain(
            "verify_eigen_equation",
            format!("need h > 0 and r > 1 + 2h, got r = {r}, h = {h}"),
        ));
    }
    let fm = phi_lambda(geom, lambda, r - h)?;
    let f0 = phi_lambda(geom, lambda, r)?;
    let fp = phi_lambda(geom, lambda, r + h)?;
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let d1 = (fp - fm) / (2.0 * h);
    let n1 = geom.dim as f64 - 1.0;
    Ok((lambda * lambda * f0 - d2 - n1 / r * d1).abs())
}
