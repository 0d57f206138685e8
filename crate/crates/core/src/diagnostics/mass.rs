//! Space-time masses `∫∫ |u|^p η_R^{2p'} W dx dt` over stored histories and
//! the pure-geometry volume factor.

use serde::Serialize;

use super::cutoff::CutoffSpec;
use super::weights::SpaceTimeWeight;
use crate::error::{Error, Result};
use crate::fit::loglog;
use crate::quad::composite_gauss_legendre;
use crate::testfam::{harmonic_u, ExteriorGeometry};
use crate::wavesim::History;

/// Fewer time samples inside a window than this is a resolution error.
pub const MIN_WINDOW_SAMPLES: usize = 8;

/// Conjugate exponent `p' = p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `(t, |S^{N-1}| Σ_j |u_j|^p W(r_j, t) r_j^{N-1} dr)` for every stored level,
/// including the initial one.
pub fn spatial_samples(
    history: &History,
    geom: &ExteriorGeometry,
    weight: &dyn SpaceTimeWeight,
    p: f64,
) -> Vec<(f64, f64)> {
    let grid = history.grid;
    let dr = grid.dr();
    let n1 = geom.dim() as i32 - 1;
    let area = geom.sphere_area();
    let integrate = |u: &[f64], t: f64| -> f64 {
        let mut acc = 0.0;
        for (j, &v) in u.iter().enumerate() {
            if v != 0.0 {
                let r = grid.r(j);
                acc += v.abs().powf(p) * weight.value(r, t) * r.powi(n1);
            }
        }
        area * acc * dr
    };
    let mut out = Vec::with_capacity(history.snapshots.len() + 1);
    if let Some(first) = history.snapshots.first() {
        if first.step == 1 {
            out.push((0.0, integrate(&first.u_prev, 0.0)));
        }
    }
    for s in &history.snapshots {
        let v = integrate(&s.u, s.t);
        if !v.is_finite() {
            break;
        }
        out.push((s.t, v));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassResult {
    pub value: f64,
    /// The history ended before the cutoff vanished.
    pub truncated: bool,
    pub samples: usize,
}

/// Trapezoidal time integral of `samples` against `η_R^q`.
fn cutoff_integral(samples: &[(f64, f64)], cutoff: &CutoffSpec, q: f64) -> (f64, usize) {
    let mut acc = 0.0;
    let mut used = 0;
    for w in samples.windows(2) {
        let (t0, a) = w[0];
        let (t1, b) = w[1];
        if t0 >= cutoff.scale_r {
            break;
        }
        let fa = a * cutoff.power(t0, q).0;
        let fb = b * cutoff.power(t1, q).0;
        acc += 0.5 * (t1 - t0) * (fa + fb);
        if fa != 0.0 || fb != 0.0 {
            used += 1;
        }
    }
    (acc, used)
}

/// `∫_0^T ∫ |u|^p η_R^{2p'} W dx dt` over the stored history.
pub fn weighted_mass(
    history: &History,
    geom: &ExteriorGeometry,
    weight: &dyn SpaceTimeWeight,
    cutoff: &CutoffSpec,
    p: f64,
) -> Result<MassResult> {
    let samples = spatial_samples(history, geom, weight, p);
    mass_from_samples(&samples, cutoff, p)
}

pub fn mass_from_samples(samples: &[(f64, f64)], cutoff: &CutoffSpec, p: f64) -> Result<MassResult> {
    let window_start = if cutoff.starred { 0.5 * cutoff.scale_r } else { 0.0 };
    let inside = samples
        .iter()
        .filter(|(t, _)| *t >= window_start && *t <= cutoff.scale_r)
        .count();
    let last = samples.last().map_or(0.0, |s| s.0);
    let truncated = last < cutoff.scale_r;
    if inside < MIN_WINDOW_SAMPLES && !truncated {
        return Err(Error::Resolution(format!(
            "{inside} stored levels inside the cutoff window of R = {}",
            cutoff.scale_r
        )));
    }
    let (value, _) = cutoff_integral(samples, cutoff, 2.0 * conjugate(p));
    Ok(MassResult {
        value,
        truncated,
        samples: inside,
    })
}

/// `Y(R) = ∫_0^R M*(ρ) ρ^{-1} dρ` with `M*(ρ)` the starred-cutoff mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YTable {
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    /// `M*(R)` at each tabulated R.
    pub inner: Vec<f64>,
}

/// Resolution of the ρ grid used by [`y_aggregate`].
pub const Y_RHO_NODES: usize = 400;

pub fn y_aggregate(
    history: &History,
    geom: &ExteriorGeometry,
    weight: &dyn SpaceTimeWeight,
    p: f64,
    r_grid: &[f64],
) -> Result<YTable> {
    let samples = spatial_samples(history, geom, weight, p);
    y_from_samples(&samples, p, r_grid)
}

pub fn y_from_samples(samples: &[(f64, f64)], p: f64, r_grid: &[f64]) -> Result<YTable> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 1.0)) {
        return Err(Error::Config("Y needs R values above 1".into()));
    }
    let q = 2.0 * conjugate(p);
    let r_top = r_grid.iter().cloned().fold(0.0, f64::max);
    let inner = |rho: f64| -> f64 {
        if rho <= 1.0 {
            return 0.0;
        }
        let c = CutoffSpec {
            scale_r: rho,
            starred: true,
        };
        cutoff_integral(samples, &c, q).0
    };
    // ρ < 1 contributes nothing since η*_ρ only sees t in (ρ/2, ρ) and the
    // cutoff is defined for ρ > 1
    let mut rho: Vec<f64> = (0..=Y_RHO_NODES)
        .map(|k| 1.0 + (r_top - 1.0) * k as f64 / Y_RHO_NODES as f64)
        .chain(r_grid.iter().cloned())
        .collect();
    rho.sort_by(f64::total_cmp);
    rho.dedup();
    let m: Vec<f64> = rho.iter().map(|&x| inner(x)).collect();
    let mut cum = vec![0.0; rho.len()];
    for k in 1..rho.len() {
        let h = rho[k] - rho[k - 1];
        cum[k] = cum[k - 1] + 0.5 * h * (m[k - 1] / rho[k - 1] + m[k] / rho[k]);
    }
    let mut y = Vec::with_capacity(r_grid.len());
    let mut inner_at = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let k = rho.iter().position(|&x| x == r).expect("R is on the ρ grid");
        y.push(cum[k]);
        inner_at.push(m[k]);
    }
    Ok(YTable {
        r: r_grid.to_vec(),
        y,
        inner: inner_at,
    })
}

/// `∫_0^R ∫_1^{r₀+t} |S^{N-1}| w(r) r^{N-1} dr dt`.
pub fn volume_mass(geom: &ExteriorGeometry, big_r: f64, w: &dyn Fn(f64) -> f64) -> f64 {
    let n1 = geom.dim() as i32 - 1;
    let r0 = geom.support_radius();
    let mut acc = 0.0;
    for (t, wt) in composite_gauss_legendre(0.0, big_r, 4, 16) {
        let inner: f64 = composite_gauss_legendre(1.0, r0 + t, 4, 16)
            .into_iter()
            .map(|(r, wr)| wr * w(r) * r.powi(n1))
            .sum();
        acc += wt * inner;
    }
    geom.sphere_area() * acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeProbe {
    pub r_grid: Vec<f64>,
    /// `R^{-2p'} ∫_0^R ∫_{Ω(t)} U dx dt` at each R.
    pub masses: Vec<f64>,
    pub slope: f64,
    pub expected_slope: f64,
}

/// Log-log slope of the cone volume factor, expected to be `N + 1 - 2p'`.
pub fn volume_scaling_probe(geom: &ExteriorGeometry, p: f64, r_grid: &[f64]) -> Result<VolumeProbe> {
    if r_grid.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} R values; the probe needs at least 3",
            r_grid.len()
        )));
    }
    if !(p > 1.0) {
        return Err(Error::domain("volume_scaling_probe", format!("p = {p} must exceed 1")));
    }
    let q = 2.0 * conjugate(p);
    let u = |r: f64| harmonic_u(geom, r).unwrap_or(0.0);
    let masses: Vec<f64> = r_grid.iter().map(|&r| r.powf(-q) * volume_mass(geom, r, &u)).collect();
    let fit = loglog(r_grid, &masses)?;
    Ok(VolumeProbe {
        r_grid: r_grid.to_vec(),
        masses,
        slope: fit.slope,
        expected_slope: geom.dim() as f64 + 1.0 - q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_mass_matches_closed_form() {
        let geom = ExteriorGeometry::new(3, 3.0).unwrap();
        let n = 3.0;
        let big_r = 50.0;
        let u = |r: f64| harmonic_u(&geom, r).unwrap();
        let got = volume_mass(&geom, big_r, &u);
        // ∫_0^R |S| [(ρ^N - 1)/N - (ρ² - 1)/2] dt with ρ = r₀ + t
        let prim = |rho: f64| rho.powf(n + 1.0) / (n * (n + 1.0)) - rho / n - rho.powi(3) / 6.0 + rho / 2.0;
        let exact = geom.sphere_area() * (prim(3.0 + big_r) - prim(3.0));
        assert!(((got - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn volume_probe_slopes() {
        let grid: Vec<f64> = (0..5).map(|k| 1e3 * 10f64.powf(k as f64 * 0.5)).collect();
        let g3 = ExteriorGeometry::new(3, 3.0).unwrap();
        let v = volume_scaling_probe(&g3, 2.0, &grid).unwrap();
        assert!((v.slope - v.expected_slope).abs() < 0.1);
        assert_eq!(v.expected_slope, 0.0);
        let g4 = ExteriorGeometry::new(4, 3.0).unwrap();
        let v = volume_scaling_probe(&g4, 1.5, &grid).unwrap();
        assert!((v.expected_slope + 1.0).abs() < 1e-12);
        assert!((v.slope - v.expected_slope).abs() < 0.1);
        assert!(volume_scaling_probe(&g4, 1.5, &grid[..2]).is_err());
    }

    #[test]
    fn y_of_constant_inner_mass() {
        // a single unit sample density: M*(ρ) is then the cutoff integral of 1
        let samples: Vec<(f64, f64)> = (0..=4000).map(|k| (k as f64 * 0.01, 1.0)).collect();
        let t = y_from_samples(&samples, 2.0, &[5.0, 10.0, 20.0]).unwrap();
        assert!(t.y.windows(2).all(|w| w[1] >= w[0]));
        assert!(t.inner.iter().all(|&m| m > 0.0));
    }
}
