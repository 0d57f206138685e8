//! Exponents of the subcritical lifespan law, ε-sweeps of the solver and the
//! log-log fit of lifespan against ε.

mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

pub use sweep::{sweep, SweepSpec, RECORD_AGREEMENT};

/// `γ(N, p) = 2 + (N+1)p - (N-1)p²`.
pub fn gamma_np(n: u32, p: f64) -> f64 {
    let n = n as f64;
    2.0 + (n + 1.0) * p - (n - 1.0) * p * p
}

/// Positive root of `(N-1)p² - (N+1)p - 2 = 0`.
pub fn strauss_exponent(n: u32) -> f64 {
    let n = n as f64;
    ((n + 1.0) + ((n + 1.0).powi(2) + 8.0 * (n - 1.0)).sqrt()) / (2.0 * (n - 1.0))
}

/// `β_p = (N-1)/2 - 1/p`, checked against the equivalent `N - (N-1)p/2`
/// which only holds at the critical power.
pub fn beta_critical(n: u32, p: f64) -> Result<f64> {
    let nf = n as f64;
    let a = (nf - 1.0) / 2.0 - 1.0 / p;
    let b = nf - (nf - 1.0) * p / 2.0;
    if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
        return Err(Error::domain(
            "beta_critical",
            format!("p = {p} is not the critical power for N = {n} ({a} vs {b})"),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::domain("beta_critical", format!("beta = {a} is not positive")));
    }
    Ok(a)
}

/// `2p(p-1)/γ(N,p)` for `1 < p < p_S(N)`.
pub fn predicted_exponent(n: u32, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain("predicted_exponent", format!("p = {p} must exceed 1")));
    }
    let g = gamma_np(n, p);
    if !(g > 0.0) || p >= strauss_exponent(n) {
        return Err(Error::domain(
            "predicted_exponent",
            format!("p = {p} is not below the critical power {}", strauss_exponent(n)),
        ));
    }
    Ok(2.0 * p * (p - 1.0) / g)
}

/// One ε of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub epsilon: f64,
    /// First threshold crossing on the base grid; `None` for a horizon exit.
    pub t_num: Option<f64>,
    pub dr: f64,
    pub dt: f64,
    pub threshold: f64,
    /// Base and half-spacing lifespans agree within [`RECORD_AGREEMENT`].
    pub converged: bool,
    #[serde(default)]
    pub t_num_refined: Option<f64>,
    #[serde(default)]
    pub horizon: f64,
    /// First crossing of each watched threshold on the base grid.
    #[serde(default)]
    pub crossings: Vec<(f64, Option<f64>)>,
    /// The same on the `dr/2` grid.
    #[serde(default)]
    pub crossings_refined: Vec<(f64, Option<f64>)>,
    /// Whether `∫ ∂_t u U dx` stayed nondecreasing on the base run.
    #[serde(default)]
    pub g_monotone: Option<bool>,
    #[serde(default)]
    pub error: Option<String>,
}

impl LifespanRecord {
    /// The record re-expressed with a different (watched) threshold.
    pub fn at_threshold(&self, threshold: f64) -> Option<Self> {
        let find = |c: &[(f64, Option<f64>)]| c.iter().find(|(th, _)| *th == threshold).map(|(_, t)| *t);
        let t = find(&self.crossings)?;
        let (t_num_refined, converged) = if self.crossings_refined.is_empty() {
            // no refinement was run
            (None, self.converged && t.is_some())
        } else {
            let tf = find(&self.crossings_refined).flatten();
            let ok = matches!((t, tf), (Some(a), Some(b)) if (a - b).abs() <= RECORD_AGREEMENT * b);
            (tf, ok)
        };
        Some(Self {
            t_num: t,
            t_num_refined,
            converged,
            threshold,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub predicted_slope: f64,
    pub n_points: usize,
}

/// Least-squares line through `(ln ε, ln T)` over finite, converged records.
pub fn fit_subcritical(records: &[LifespanRecord], n: u32, p: f64) -> Result<ScalingFit> {
    let predicted_slope = -predicted_exponent(n, p)?;
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.converged && r.epsilon > 0.0)
        .filter_map(|r| r.t_num.filter(|t| *t > 0.0).map(|t| (r.epsilon.ln(), t.ln())))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable records; the fit needs at least 3",
            pts.len()
        )));
    }
    // order-independent summation
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let f = least_squares(&x, &y)?;
    Ok(ScalingFit {
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
        predicted_slope,
        n_points: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn synthetic(eps: f64, t: f64) -> LifespanRecord {
        LifespanRecord {
            epsilon: eps,
            t_num: Some(t),
            dr: 0.1,
            dt: 0.045,
            threshold: 1e6,
            converged: true,
            t_num_refined: Some(t),
            horizon: 1e4,
            crossings: vec![],
            crossings_refined: vec![],
            g_monotone: None,
            error: None,
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_np(3, 2.0), 2.0);
        assert_eq!(gamma_np(4, 2.0), 0.0);
        assert!(gamma_np(3, 1.0 + 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn strauss_examples() {
        assert!((strauss_exponent(3) - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(strauss_exponent(4), 2.0);
        let p5 = (6.0 + (36.0f64 + 32.0).sqrt()) / 8.0;
        assert!((strauss_exponent(5) - p5).abs() < 1e-15);
        for n in 3..=10 {
            assert!(gamma_np(n, strauss_exponent(n)).abs() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn beta_critical_examples() {
        assert!((beta_critical(4, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let b = beta_critical(3, strauss_exponent(3)).unwrap();
        assert!((b - (1.0 - 1.0 / (1.0 + 2f64.sqrt()))).abs() < 1e-12);
        assert!(beta_critical(3, 2.0).is_err());
    }

    #[test]
    fn predicted_exponent_examples() {
        assert_eq!(predicted_exponent(3, 2.0).unwrap(), 2.0);
        assert!((predicted_exponent(4, 1.5).unwrap() - 1.5 / 2.75).abs() < 1e-15);
        assert!(predicted_exponent(4, 2.0).is_err());
        assert!(predicted_exponent(3, 2.5).is_err());
        let near = predicted_exponent(3, strauss_exponent(3) - 1e-6).unwrap();
        assert!(near > 1e5);
    }

    #[test]
    fn exact_power_law_fit() {
        let recs: Vec<_> = [0.4, 0.3, 0.2, 0.1]
            .iter()
            .map(|&e| synthetic(e, 7.0 * e.powf(-2.0)))
            .collect();
        let f = fit_subcritical(&recs, 3, 2.0).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
        assert_eq!(f.predicted_slope, -2.0);
    }

    #[test]
    fn fit_ignores_order_and_time_units() {
        let eps = [0.4, 0.3, 0.2, 0.15, 0.1];
        let noise = [1.03, 0.97, 1.01, 0.99, 1.02];
        let recs: Vec<_> = eps
            .iter()
            .zip(noise)
            .map(|(&e, n)| synthetic(e, n * e.powf(-2.0)))
            .collect();
        let a = fit_subcritical(&recs, 3, 2.0).unwrap();
        let mut rev = recs.clone();
        rev.reverse();
        let b = fit_subcritical(&rev, 3, 2.0).unwrap();
        assert_eq!(a, b);
        let scaled: Vec<_> = recs
            .iter()
            .map(|r| LifespanRecord {
                t_num: r.t_num.map(|t| 60.0 * t),
                ..r.clone()
            })
            .collect();
        let c = fit_subcritical(&scaled, 3, 2.0).unwrap();
        assert!((c.slope - a.slope).abs() < 1e-12);
        assert!((c.intercept - a.intercept - 60f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn watched_threshold_view() {
        let mut r = synthetic(0.2, 100.0);
        r.crossings = vec![(1e3, Some(99.0)), (1e6, Some(100.0))];
        r.crossings_refined = vec![(1e3, Some(99.5)), (1e6, Some(100.4))];
        let v = r.at_threshold(1e3).unwrap();
        assert_eq!(v.t_num, Some(99.0));
        assert_eq!(v.threshold, 1e3);
        assert!(v.converged);
        r.crossings_refined[0].1 = Some(120.0);
        assert!(!r.at_threshold(1e3).unwrap().converged);
        assert!(r.at_threshold(1e4).is_none());
    }

    #[test]
    fn fit_needs_three_converged_records() {
        let mut recs: Vec<_> = [0.4, 0.3, 0.2].iter().map(|&e| synthetic(e, e.powf(-2.0))).collect();
        recs[1].converged = false;
        assert!(matches!(
            fit_subcritical(&recs, 3, 2.0),
            Err(Error::InsufficientData(_))
        ));
        recs[1].converged = true;
        recs[2].t_num = None;
        assert!(matches!(
            fit_subcritical(&recs, 3, 2.0),
            Err(Error::InsufficientData(_))
        ));
    }
}
