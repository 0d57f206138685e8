//! The functional `G(t) = ∫ ∂_t u U dx` and its source `∫ |u|^p U dx`.
//!
//! The spatial sum uses weights `m_j` that annihilate the discrete
//! Laplacian, `Σ_j m_j (L_h u)_j = 0` for every grid function vanishing at
//! the obstacle and in the last two cells. With them the leapfrog update gives exactly
//! `G^{n+1/2} - G^{n-1/2} = dt Σ_j m_j |u^n_j|^p`, so the discrete `G` is
//! monotone whenever the continuous one is. The weights agree with
//! `|S^{N-1}| U(r) r^{N-1} dr` up to `O(dr)`.

use serde::Serialize;

use super::FunctionalTrace;
use crate::error::Result;
use crate::testfam::{harmonic_u, ExteriorGeometry};
use crate::wavesim::{History, RadialGrid, Solver, StepObserver, WaveState};

/// Discrete harmonic quadrature weights for one grid.
#[derive(Debug, Clone)]
pub struct CompatibleWeights {
    m: Vec<f64>,
}

impl CompatibleWeights {
    pub fn new(geom: &ExteriorGeometry, grid: &RadialGrid) -> Result<Self> {
        let n = grid.n_points();
        let dr = grid.dr();
        let n1 = geom.dim() as f64 - 1.0;
        let inv2 = 1.0 / (dr * dr);
        let plus = |j: usize| inv2 + n1 / (2.0 * grid.r(j) * dr);
        let minus = |j: usize| inv2 - n1 / (2.0 * grid.r(j) * dr);
        let mut m = vec![0.0; n];
        m[1] = 1.0;
        for k in 1..n - 1 {
            m[k + 1] = (2.0 * inv2 * m[k] - plus(k - 1) * m[k - 1]) / minus(k + 1);
        }
        // normalize against the continuous weight at the far end
        let j = n - 1;
        let r = grid.r(j);
        let target = geom.sphere_area() * harmonic_u(geom, r)? * r.powi(geom.dim() as i32 - 1) * dr;
        let scale = target / m[j];
        for v in &mut m {
            *v *= scale;
        }
        Ok(Self { m })
    }

    pub fn weights(&self) -> &[f64] {
        &self.m
    }

    pub fn pair(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.m).map(|(a, b)| a * b).sum()
    }

    pub fn pair_power(&self, u: &[f64], p: f64) -> f64 {
        u.iter().zip(&self.m).map(|(a, b)| a.abs().powf(p) * b).sum()
    }

    /// `Σ m_j (u_j - v_j) / dt` over the common prefix, treating missing entries as 0.
    pub fn pair_difference(&self, u: &[f64], v: &[f64], dt: f64) -> f64 {
        let n = u.len().max(v.len());
        (0..n)
            .map(|j| {
                let a = u.get(j).copied().unwrap_or(0.0);
                let b = v.get(j).copied().unwrap_or(0.0);
                self.m[j] * (a - b)
            })
            .sum::<f64>()
            / dt
    }
}

/// `G` at half steps (time `t - dt/2` of each snapshot) and the source
/// `Σ m |u|^p` at snapshot times.
#[derive(Debug, Clone, Serialize)]
pub struct GTraces {
    pub g: FunctionalTrace,
    pub source: FunctionalTrace,
}

pub fn functional_g(history: &History, geom: &ExteriorGeometry, p: f64) -> Result<GTraces> {
    let w = CompatibleWeights::new(geom, &history.grid)?;
    let dt = history.dt;
    let mut g = FunctionalTrace::default();
    let mut source = FunctionalTrace::default();
    for s in &history.snapshots {
        let gv = w.pair_difference(&s.u, &s.u_prev, dt);
        if gv.is_finite() {
            g.push(s.t - 0.5 * dt, gv);
        }
        let sv = w.pair_power(&s.u, p);
        if sv.is_finite() {
            source.push(s.t, sv);
        }
    }
    Ok(GTraces { g, source })
}

/// Largest decrease of a trace relative to `max(1, |G|)`; 0 for a monotone one.
pub fn worst_relative_drop(trace: &FunctionalTrace) -> f64 {
    trace
        .values
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[0].abs().max(w[1].abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Tracks `G` step by step during a run without storing the solution.
#[derive(Debug, Clone)]
pub struct GMonitor {
    weights: CompatibleWeights,
    last: Option<f64>,
    pub worst_drop: f64,
    pub samples: usize,
}

/// Slack allowed on decreases of `G`, relative to `max(1, |G|)`.
pub const G_MONOTONE_SLACK: f64 = 1e-8;

impl GMonitor {
    pub fn new(geom: &ExteriorGeometry, grid: &RadialGrid) -> Result<Self> {
        Ok(Self {
            weights: CompatibleWeights::new(geom, grid)?,
            last: None,
            worst_drop: 0.0,
            samples: 0,
        })
    }

    pub fn monotone(&self) -> bool {
        self.worst_drop <= G_MONOTONE_SLACK
    }
}

impl StepObserver for GMonitor {
    fn observe(&mut self, state: &WaveState, solver: &Solver) -> Result<()> {
        let n = state.active_len();
        let g = self
            .weights
            .pair_difference(&state.u_curr[..n], &state.u_prev[..n], solver.dt());
        // the state that crosses the threshold may already be non-finite
        if !g.is_finite() {
            return Ok(());
        }
        if let Some(prev) = self.last {
            let drop = (prev - g) / prev.abs().max(g.abs()).max(1.0);
            self.worst_drop = self.worst_drop.max(drop);
        }
        self.last = Some(g);
        self.samples += 1;
        Ok(())
    }
}
