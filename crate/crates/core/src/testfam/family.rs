//! `Φ_β` and the Laplace-type integral of `ψ₁`.
//!
//! Both are integrals over λ. After substituting `μ = λt` the integrands are
//! `e^{-μ(1-r/t)}` times a bounded, slowly varying factor, so the μ axis is
//! split into doubling panels `[0, 1/8], [1/8, 1/4], …` before adaptive
//! refinement starts.

use super::{harmonic_u, phi_lambda_scaled, psi1_scaled, ExteriorGeometry, LightConePoint, TestFunctionParams};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::specfun::{gamma_raw, hyp2f1, regularized_lower_gamma, EvalResult, HypergeometricParams};

/// Decay exponent past which the dominating integrand is negligible.
const TAIL_EXPONENT: f64 = 40.0 * std::f64::consts::LN_10;

fn doubling_breaks(upper: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut x = 0.125;
    while x < upper {
        b.push(x);
        x *= 2.0;
    }
    b.push(upper);
    b
}

/// Bound on `∫_x^∞ s^{β-1} e^{-s} ds` valid for `x >= 2(β-1)`.
fn upper_gamma_tail(beta: f64, x: f64) -> f64 {
    let lead = x.powf(beta - 1.0) * (-x).exp();
    if beta > 1.0 {
        2.0 * lead
    } else {
        lead
    }
}

/// `∫_0^M μ^{β-1} h(μ) dμ`, regularizing the endpoint weight by `u = μ^β` when β < 1.
fn weighted_integral<F>(op: &'static str, beta: f64, upper: f64, mut h: F, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure: Option<Error> = None;
    let mut eval = |mu: f64| match h(mu) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let breaks = doubling_breaks(upper);
    let res = if beta < 1.0 {
        let ub: Vec<f64> = breaks.iter().map(|m| m.powf(beta)).collect();
        let inv = 1.0 / beta;
        integrate_with_breaks(|u| inv * eval(u.powf(inv)), &ub, opts)
    } else {
        integrate_with_breaks(|mu| mu.powf(beta - 1.0) * eval(mu), &breaks, opts)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    match res {
        Ok(r) => Ok((r.value, r.abs_error)),
        Err(Error::Accuracy { msg, partial, .. }) => Err(Error::Accuracy { op, msg, partial }),
        Err(e) => Err(e),
    }
}

/// Absolute tolerance on the μ-integral that yields `tol` on the final value.
fn integral_tolerance(opts: &QuadOptions, beta: f64, t: f64) -> QuadOptions {
    let scale = gamma_raw(beta) * t.powf(beta);
    QuadOptions {
        abs_tol: opts.abs_tol.min(opts.abs_tol * scale),
        ..*opts
    }
}

/// `Φ_β(r, t) = Γ(β)^{-1} ∫_0^1 e^{-λt} φ_λ(r) λ^{β-1} dλ`.
pub fn phi_beta(geom: &ExteriorGeometry, params: &TestFunctionParams, point: LightConePoint) -> Result<EvalResult> {
    phi_beta_order(geom, params.beta, point, &params.quad_options())
}

pub(crate) fn phi_beta_order(
    geom: &ExteriorGeometry,
    beta: f64,
    point: LightConePoint,
    opts: &QuadOptions,
) -> Result<EvalResult> {
    if !(beta > 0.0) {
        return Err(Error::domain("phi_beta", format!("beta = {beta} must be positive")));
    }
    let (r, t) = (point.r(), point.t());
    if r == 1.0 {
        return Ok(EvalResult::new(0.0, 0.0));
    }
    let gap = 1.0 - r / t;
    let cut = (beta + TAIL_EXPONENT) / gap;
    let (upper, tail) = if cut < t {
        (cut, gap.powf(-beta) * upper_gamma_tail(beta, cut * gap))
    } else {
        (t, 0.0)
    };
    let local = integral_tolerance(opts, beta, t);
    let (j, err) = weighted_integral(
        "phi_beta",
        beta,
        upper,
        |mu| Ok((-mu * gap).exp() * phi_lambda_scaled(geom, mu / t, r)?),
        &local,
    )?;
    let scale = t.powf(-beta) / gamma_raw(beta);
    Ok(EvalResult::new(j * scale, (err + tail) * scale))
}

/// `Γ(β)^{-1} ∫_0^∞ e^{-λt} ψ₁(λr) λ^{β-1} dλ` for `0 <= r < t`.
///
/// The λ range is cut at `Λ = max(1, (β + 40 ln 10)/(t - r))` and the
/// remainder bounded through `ψ₁(z) <= e^z`.
pub fn yz_integral(geom: &ExteriorGeometry, beta: f64, r: f64, t: f64, opts: &QuadOptions) -> Result<EvalResult> {
    if !(beta > 0.0) || !(r >= 0.0) || !(r < t) || !t.is_finite() {
        return Err(Error::domain(
            "yz_integral",
            format!("need beta > 0 and 0 <= r < t, got beta = {beta}, r = {r}, t = {t}"),
        ));
    }
    let lambda_max = ((beta + TAIL_EXPONENT) / (t - r)).max(1.0);
    let upper = lambda_max * t;
    let rho = r / t;
    let gap = 1.0 - rho;
    let tail = gap.powf(-beta) * upper_gamma_tail(beta, upper * gap);
    let local = integral_tolerance(opts, beta, t);
    let (j, err) = weighted_integral(
        "yz_integral",
        beta,
        upper,
        |mu| Ok((-mu * gap).exp() * psi1_scaled(geom, mu * rho)?),
        &local,
    )?;
    let scale = t.powf(-beta) / gamma_raw(beta);
    Ok(EvalResult::new(j * scale, (err + tail) * scale))
}

/// `t^{-β} F(β/2, (β+1)/2; N/2; r²/t²)`.
pub fn yz_closed_form(geom: &ExteriorGeometry, beta: f64, r: f64, t: f64) -> Result<EvalResult> {
    let z = (r / t) * (r / t);
    let f = hyp2f1(HypergeometricParams::new(
        beta / 2.0,
        (beta + 1.0) / 2.0,
        geom.dim() as f64 / 2.0,
        z,
    )?)?;
    let s = t.powf(-beta);
    Ok(EvalResult::new(f.value * s, f.abs_error_estimate * s))
}

/// `Γ(β)^{-1} ∫_0^1 e^{-μ} μ^{β-1} dμ`, the constant in `Φ_β >= c U t^{-β}`.
pub fn lower_bound_constant(beta: f64) -> Result<f64> {
    regularized_lower_gamma(beta, 1.0)
}

/// `c_β U(r) t^{-β}` with `c_β` from [`lower_bound_constant`].
pub fn phi_beta_lower_bound(geom: &ExteriorGeometry, beta: f64, point: LightConePoint) -> Result<f64> {
    Ok(lower_bound_constant(beta)? * harmonic_u(geom, point.r())? * point.t().powf(-beta))
}

/// `U(r) t^{-β} F(β/2, (β+1)/2; N/2; r²/t²)`, the shape of the upper bound.
pub fn phi_beta_upper_shape(geom: &ExteriorGeometry, beta: f64, point: LightConePoint) -> Result<f64> {
    let yz = yz_closed_form(geom, beta, point.r(), point.t())?;
    Ok(harmonic_u(geom, point.r())? * yz.value)
}

/// `Φ̃_β(r, t) = t_s^β Φ_β(r, t_s + t)`.
pub fn shifted_phi(geom: &ExteriorGeometry, params: &TestFunctionParams, r: f64, t: f64) -> Result<f64> {
    let ts = params.t_shift;
    let point = LightConePoint::new(r, ts + t)?;
    Ok(ts.powf(params.beta) * phi_beta(geom, params, point)?.value)
}

/// `|(Φ_β(t+h) - Φ_β(t-h))/(2h) + β Φ_{β+1}(t)|`.
pub fn dt_relation_check(
    geom: &ExteriorGeometry,
    params: &TestFunctionParams,
    point: LightConePoint,
    h: f64,
) -> Result<f64> {
    let (r, t) = (point.r(), point.t());
    if !(h > 0.0) || !(t - h > r) {
        return Err(Error::domain(
            "dt_relation_check",
            format!("step h = {h} leaves the light cone at (r, t) = ({r}, {t})"),
        ));
    }
    let opts = params.quad_options();
    let beta = params.beta;
    let plus = phi_beta_order(geom, beta, LightConePoint::new(r, t + h)?, &opts)?.value;
    let minus = phi_beta_order(geom, beta, LightConePoint::new(r, t - h)?, &opts)?.value;
    let next = phi_beta_order(geom, beta + 1.0, point, &opts)?.value;
    Ok(((plus - minus) / (2.0 * h) + beta * next).abs())
}
