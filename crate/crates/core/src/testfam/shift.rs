use rayon::prelude::*;
use serde::Serialize;

use super::family::phi_beta_order;
use super::{ExteriorGeometry, LightConePoint, TestFunctionParams};
use crate::error::{Error, Result};
use crate::profile::{weighted_integral, RadialProfile};
use crate::quad::composite_gauss_legendre;

/// Number of doublings of `2 r₀` tried before giving up.
pub const SHIFT_SEARCH_DOUBLINGS: u32 = 15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftSelection {
    pub t_shift: f64,
    pub i_beta: f64,
    pub half_gu: f64,
    /// Every `(t_shift, I_β)` pair evaluated, in search order.
    pub trials: Vec<(f64, f64)>,
}

fn support_union(f: &dyn RadialProfile, g: &dyn RadialProfile) -> Option<(f64, f64)> {
    match (f.support(), g.support()) {
        (None, s) | (s, None) => s,
        (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
    }
}

/// `I_β(t_s) = ∫ g Φ̃_β(·, 0) dx + (β/t_s) ∫ f Φ̃_{β+1}(·, 0) dx` for a given shift.
pub fn i_beta(
    geom: &ExteriorGeometry,
    params: &TestFunctionParams,
    f: &dyn RadialProfile,
    g: &dyn RadialProfile,
) -> Result<f64> {
    let Some((a, b)) = support_union(f, g) else {
        return Ok(0.0);
    };
    let ts = params.t_shift;
    let beta = params.beta;
    let opts = params.quad_options();
    let n = geom.dim() as i32;
    let nodes = composite_gauss_legendre(a, b, 8, 12);
    let parts: Vec<f64> = nodes
        .par_iter()
        .map(|&(r, w)| -> Result<f64> {
            let point = LightConePoint::new(r, ts)?;
            let gv = g.value(r);
            let fv = f.value(r);
            let mut acc = 0.0;
            if gv != 0.0 {
                acc += gv * phi_beta_order(geom, beta, point, &opts)?.value;
            }
            if fv != 0.0 {
                acc += beta * fv * phi_beta_order(geom, beta + 1.0, point, &opts)?.value;
            }
            Ok(w * acc * r.powi(n - 1))
        })
        .collect::<Result<_>>()?;
    Ok(geom.sphere_area() * ts.powf(beta) * parts.iter().sum::<f64>())
}

/// Smallest shift in `{2r₀, 4r₀, 8r₀, …}` with `I_β >= ½ ∫ g U dx`.
pub fn select_t_shift(
    geom: &ExteriorGeometry,
    params: &TestFunctionParams,
    f: &dyn RadialProfile,
    g: &dyn RadialProfile,
) -> Result<ShiftSelection> {
    let half_gu = 0.5 * weighted_integral(g, geom)?;
    if !(half_gu > 0.0) {
        return Err(Error::Config(
            "velocity profile must have positive U-weighted integral".into(),
        ));
    }
    let mut trials = Vec::new();
    let mut ts = 2.0 * geom.support_radius();
    for _ in 0..=SHIFT_SEARCH_DOUBLINGS {
        let trial = TestFunctionParams { t_shift: ts, ..*params };
        let value = i_beta(geom, &trial, f, g)?;
        trials.push((ts, value));
        if value >= half_gu {
            return Ok(ShiftSelection {
                t_shift: ts,
                i_beta: value,
                half_gu,
                trials,
            });
        }
        ts *= 2.0;
    }
    Err(Error::SearchExhausted(format!(
        "no shift up to {:e} gives I_beta >= {half_gu:e}; data is ill-conditioned",
        ts / 2.0
    )))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::profile::{make_bump, Scaled, Zero};

    #[test]
    fn bump_velocity_terminates_and_is_linear() {
        let geom = ExteriorGeometry::new(3, 3.0).unwrap();
        let params = TestFunctionParams::new(&geom, 2.0, 6.0).unwrap();
        let g = make_bump(1.5, 2.5, 1.0).unwrap();
        let sel = select_t_shift(&geom, &params, &Zero, &g).unwrap();
        assert!(sel.i_beta >= sel.half_gu);
        assert!(sel.t_shift >= 6.0);

        let g2 = Scaled {
            inner: Arc::new(g),
            factor: 2.0,
        };
        let trial = TestFunctionParams {
            t_shift: sel.t_shift,
            ..params
        };
        let doubled = i_beta(&geom, &trial, &Zero, &g2).unwrap();
        assert!((doubled - 2.0 * sel.i_beta).abs() < 1e-12 * sel.i_beta);
    }

    #[test]
    fn non_positive_velocity_is_rejected() {
        let geom = ExteriorGeometry::new(3, 3.0).unwrap();
        let params = TestFunctionParams::new(&geom, 2.0, 6.0).unwrap();
        let err = select_t_shift(&geom, &params, &Zero, &Zero);
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
