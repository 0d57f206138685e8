//! Leapfrog evolution of the radial semilinear wave equation
//! `u_tt = u_rr + (N-1)/r u_r + |u|^p` on `1 < r < R_max` with `u(1, t) = 0`.

mod observe;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{weighted_integral, RadialProfile};
use crate::testfam::ExteriorGeometry;

pub use observe::{History, Snapshot, SnapshotRecorder, StepObserver};

/// Cells kept beyond `r₀ + t_horizon` by [`RadialGrid::for_horizon`], on top
/// of the allowance for the dispersive precursor.
pub const OUTER_MARGIN_CELLS: usize = 16;

/// The leapfrog front spreads like `dr (t/dr)^{1/3}`; this many of those
/// widths are added to the outer margin.
pub const PRECURSOR_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    dr: f64,
    n_points: usize,
}

impl RadialGrid {
    pub fn new(dr: f64, n_points: usize) -> Result<Self> {
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(Error::Config(format!("grid spacing dr = {dr} must be positive")));
        }
        if n_points < 3 {
            return Err(Error::Config("grid needs at least three points".into()));
        }
        Ok(Self { dr, n_points })
    }

    /// Smallest grid whose outer edge stays causally disconnected from data
    /// supported in `r <= support_radius` up to `t_horizon`.
    pub fn for_horizon(dr: f64, support_radius: f64, t_horizon: f64) -> Result<Self> {
        if !(t_horizon > 0.0) || !t_horizon.is_finite() {
            return Err(Error::Config(format!("horizon {t_horizon} must be positive")));
        }
        let span = support_radius + t_horizon - 1.0;
        let precursor = (PRECURSOR_WIDTHS * (t_horizon / dr).cbrt()).ceil() as usize;
        let n = (span / dr).ceil() as usize + OUTER_MARGIN_CELLS + precursor + 1;
        Self::new(dr, n)
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn r(&self, j: usize) -> f64 {
        1.0 + j as f64 * self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.n_points - 1)
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.r(j))
    }
}

/// Data `(εf, εg)` built from two radial profiles.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub f: Arc<dyn RadialProfile>,
    pub g: Arc<dyn RadialProfile>,
    pub epsilon: f64,
}

impl InitialData {
    pub fn new(f: Arc<dyn RadialProfile>, g: Arc<dyn RadialProfile>, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon = {epsilon} must be nonnegative")));
        }
        Ok(Self { f, g, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.f.clone(), self.g.clone(), epsilon)
    }

    /// Outer end of the joint support, or 1 when both profiles vanish.
    pub fn support_end(&self) -> f64 {
        [self.f.support(), self.g.support()]
            .into_iter()
            .flatten()
            .map(|(_, b)| b)
            .fold(1.0, f64::max)
    }
}

/// `|S^{N-1}| ∫ g U r^{N-1} dr`; its sign decides whether the blowup theorem applies.
pub fn check_positivity(data: &InitialData, geom: &ExteriorGeometry) -> Result<f64> {
    weighted_integral(data.g.as_ref(), geom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub p_exponent: f64,
    pub cfl_factor: f64,
    pub blowup_threshold: f64,
    pub t_horizon: f64,
    /// Drop `|u|^p` to run the linear wave equation.
    pub nonlinear: bool,
    /// Extra thresholds (below `blowup_threshold`) whose first crossing is recorded.
    pub watch_thresholds: Vec<f64>,
}

impl SolverConfig {
    pub const DEFAULT_CFL: f64 = 0.45;
    pub const DEFAULT_THRESHOLD: f64 = 1e6;

    pub fn new(p_exponent: f64, t_horizon: f64) -> Self {
        Self {
            p_exponent,
            cfl_factor: Self::DEFAULT_CFL,
            blowup_threshold: Self::DEFAULT_THRESHOLD,
            t_horizon,
            nonlinear: true,
            watch_thresholds: Vec::new(),
        }
    }

    pub fn linear(t_horizon: f64) -> Self {
        Self {
            nonlinear: false,
            ..Self::new(2.0, t_horizon)
        }
    }

    pub fn validate(&self, geom: &ExteriorGeometry) -> Result<()> {
        let n = geom.dim() as f64;
        let p_max = n / (n - 2.0);
        if !(self.p_exponent > 1.0 && self.p_exponent <= p_max) {
            return Err(Error::Config(format!(
                "p = {} outside the admissible range (1, {p_max}]",
                self.p_exponent
            )));
        }
        if !(self.cfl_factor > 0.0 && self.cfl_factor < 1.0) {
            return Err(Error::Config(format!(
                "CFL factor {} must lie in (0, 1)",
                self.cfl_factor
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config("blowup threshold must be positive".into()));
        }
        if !(self.t_horizon > 0.0) || !self.t_horizon.is_finite() {
            return Err(Error::Config("horizon must be positive and finite".into()));
        }
        if self
            .watch_thresholds
            .iter()
            .any(|&w| !(w > 0.0 && w <= self.blowup_threshold))
        {
            return Err(Error::Config(
                "watch thresholds must lie in (0, blowup_threshold]".into(),
            ));
        }
        Ok(())
    }
}

/// Two consecutive time levels; `t` is the time of `u_curr`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub t: f64,
    pub step_index: usize,
    /// One past the last index where either level may be nonzero.
    active: usize,
}

impl WaveState {
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for v in &self.u_curr[..self.active] {
            if v.is_nan() {
                return f64::NAN;
            }
            m = m.max(v.abs());
        }
        m
    }

    pub fn active_len(&self) -> usize {
        self.active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepStatus {
    Running,
    /// `max |u|` reached the threshold or became non-finite at time `t`.
    Blowup {
        t: f64,
        max_abs: f64,
    },
}

/// First crossing of one watched threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub threshold: f64,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    /// First time `max |u| >= blowup_threshold`; `None` when the horizon came first.
    pub t_num: Option<f64>,
    pub t_end: f64,
    pub steps: usize,
    pub dr: f64,
    pub dt: f64,
    pub threshold: f64,
    pub max_abs: f64,
    pub crossings: Vec<Crossing>,
}

impl RunOutcome {
    pub fn crossing(&self, threshold: f64) -> Option<f64> {
        self.crossings
            .iter()
            .find(|c| c.threshold == threshold)
            .and_then(|c| c.t)
    }
}

/// Stencil coefficients and configuration for one grid.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: RadialGrid,
    config: SolverConfig,
    dt: f64,
    /// `(N-1)/r_j`
    drift: Vec<f64>,
}

impl Solver {
    pub fn new(geom: &ExteriorGeometry, grid: RadialGrid, config: SolverConfig) -> Result<Self> {
        config.validate(geom)?;
        let need = geom.support_radius() + config.t_horizon + 2.0 * grid.dr();
        if grid.r_max() < need {
            return Err(Error::Config(format!(
                "grid ends at {} but the horizon needs r_max >= {need}",
                grid.r_max()
            )));
        }
        let n1 = geom.dim() as f64 - 1.0;
        let drift = grid.radii().map(|r| n1 / r).collect();
        Ok(Self {
            dt: config.cfl_factor * grid.dr(),
            grid,
            config,
            drift,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    fn spatial(&self, u: &[f64], j: usize) -> f64 {
        let dr = self.grid.dr();
        let lap = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dr * dr);
        let adv = self.drift[j] * (u[j + 1] - u[j - 1]) / (2.0 * dr);
        let src = if self.config.nonlinear {
            u[j].abs().powf(self.config.p_exponent)
        } else {
            0.0
        };
        lap + adv + src
    }

    /// Level 0 from `εf`, level 1 from the second-order Taylor start.
    pub fn init(&self, data: &InitialData) -> WaveState {
        let n = self.grid.n_points();
        let eps = data.epsilon;
        let mut u0 = vec![0.0; n];
        let mut v0 = vec![0.0; n];
        for j in 1..n - 1 {
            let r = self.grid.r(j);
            u0[j] = eps * data.f.value(r);
            v0[j] = eps * data.g.value(r);
        }
        let dt = self.dt;
        let mut u1 = vec![0.0; n];
        for j in 1..n - 1 {
            let accel = self.spatial(&u0, j);
            u1[j] = u0[j] + dt * v0[j] + 0.5 * dt * dt * accel;
        }
        flush_subnormals(&mut u1);
        let active = last_nonzero(&u0).max(last_nonzero(&u1));
        WaveState {
            u_prev: u0,
            u_curr: u1,
            t: dt,
            step_index: 1,
            active,
        }
    }

    /// One leapfrog step in place. Only cells that can be nonzero are updated;
    /// all others remain exactly zero.
    pub fn step(&self, state: &mut WaveState) -> StepStatus {
        let n = self.grid.n_points();
        let hi = (state.active + 1).min(n - 1);
        let dt2 = self.dt * self.dt;
        for j in 1..hi {
            let next = 2.0 * state.u_curr[j] - state.u_prev[j] + dt2 * self.spatial(&state.u_curr, j);
            state.u_prev[j] = if next.abs() < f64::MIN_POSITIVE { 0.0 } else { next };
        }
        std::mem::swap(&mut state.u_prev, &mut state.u_curr);
        state.step_index += 1;
        state.t = state.step_index as f64 * self.dt;
        // the new front is at most one cell further out
        let mut active = hi;
        while active > 0 && state.u_curr[active - 1] == 0.0 && state.u_prev[active - 1] == 0.0 {
            active -= 1;
        }
        state.active = active;
        let m = state.max_abs();
        if !m.is_finite() || m >= self.config.blowup_threshold {
            StepStatus::Blowup { t: state.t, max_abs: m }
        } else {
            StepStatus::Running
        }
    }

    /// Steps from the initial data until blowup or the horizon, reporting
    /// every state (including the initial one) to `observers`.
    pub fn run(&self, data: &InitialData, observers: &mut [&mut dyn StepObserver]) -> Result<RunOutcome> {
        let mut state = self.init(data);
        let mut watch: Vec<Crossing> = self
            .config
            .watch_thresholds
            .iter()
            .map(|&threshold| Crossing { threshold, t: None })
            .collect();
        let mut max_seen = 0.0f64;
        let record = |state: &WaveState, watch: &mut Vec<Crossing>| -> f64 {
            let m = state.max_abs();
            for c in watch.iter_mut() {
                if c.t.is_none() && !(m < c.threshold) {
                    c.t = Some(state.t);
                }
            }
            m
        };
        let mut status = {
            let m = record(&state, &mut watch);
            max_seen = max_seen.max(m);
            if !m.is_finite() || m >= self.config.blowup_threshold {
                StepStatus::Blowup { t: state.t, max_abs: m }
            } else {
                StepStatus::Running
            }
        };
        for obs in observers.iter_mut() {
            obs.observe(&state, self)?;
        }
        while status == StepStatus::Running && state.t < self.config.t_horizon {
            status = self.step(&mut state);
            let m = record(&state, &mut watch);
            if m.is_finite() {
                max_seen = max_seen.max(m);
            }
            for obs in observers.iter_mut() {
                obs.observe(&state, self)?;
            }
        }
        let t_num = match status {
            StepStatus::Blowup { t, .. } => Some(t),
            StepStatus::Running => None,
        };
        let mut crossings = watch;
        crossings.push(Crossing {
            threshold: self.config.blowup_threshold,
            t: t_num,
        });
        Ok(RunOutcome {
            t_num,
            t_end: state.t,
            steps: state.step_index,
            dr: self.grid.dr(),
            dt: self.dt,
            threshold: self.config.blowup_threshold,
            max_abs: max_seen,
            crossings,
        })
    }
}

fn flush_subnormals(u: &mut [f64]) {
    for v in u.iter_mut() {
        if v.abs() < f64::MIN_POSITIVE {
            *v = 0.0;
        }
    }
}

fn last_nonzero(u: &[f64]) -> usize {
    u.iter().rposition(|&v| v != 0.0).map_or(0, |j| j + 1)
}

/// Free-function form of [`Solver::init`].
pub fn init_state(
    geom: &ExteriorGeometry,
    grid: RadialGrid,
    data: &InitialData,
    config: &SolverConfig,
) -> Result<WaveState> {
    Ok(Solver::new(geom, grid, config.clone())?.init(data))
}

/// Runs without observers.
pub fn run_until_blowup(
    geom: &ExteriorGeometry,
    grid: RadialGrid,
    data: &InitialData,
    config: &SolverConfig,
) -> Result<RunOutcome> {
    Solver::new(geom, grid, config.clone())?.run(data, &mut [])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_bump, Zero};

    fn geom() -> ExteriorGeometry {
        ExteriorGeometry::new(3, 3.0).unwrap()
    }

    fn bump_data(eps: f64) -> InitialData {
        InitialData::new(Arc::new(Zero), Arc::new(make_bump(1.5, 2.5, 1.0).unwrap()), eps).unwrap()
    }

    #[test]
    fn config_validation() {
        let g = geom();
        let grid = RadialGrid::for_horizon(0.1, 3.0, 10.0).unwrap();
        let mut c = SolverConfig::new(2.0, 10.0);
        assert!(Solver::new(&g, grid, c.clone()).is_ok());
        c.cfl_factor = 1.0;
        assert!(matches!(Solver::new(&g, grid, c.clone()), Err(Error::Config(_))));
        let c = SolverConfig::new(3.5, 10.0);
        assert!(Solver::new(&g, grid, c).is_err());
        let c = SolverConfig::new(2.0, 50.0);
        assert!(Solver::new(&g, grid, c).is_err(), "grid too short for horizon");
    }

    #[test]
    fn zero_velocity_start_is_exact() {
        let g = geom();
        let grid = RadialGrid::for_horizon(0.05, 3.0, 5.0).unwrap();
        let s = Solver::new(&g, grid, SolverConfig::new(2.0, 5.0)).unwrap();
        let data = bump_data(0.3);
        let st = s.init(&data);
        for j in 0..grid.n_points() {
            assert_eq!(st.u_prev[j], 0.0);
            let r = grid.r(j);
            let expect = if j == 0 || j == grid.n_points() - 1 {
                0.0
            } else {
                s.dt() * (0.3 * data.g.value(r))
            };
            assert_eq!(st.u_curr[j], expect);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = geom();
        let grid = RadialGrid::for_horizon(0.1, 3.0, 5.0).unwrap();
        let out = run_until_blowup(&g, grid, &bump_data(0.0), &SolverConfig::new(2.0, 5.0)).unwrap();
        assert_eq!(out.t_num, None);
        assert_eq!(out.max_abs, 0.0);
    }

    #[test]
    fn single_impulse_matches_stencil() {
        let g = geom();
        let grid = RadialGrid::new(0.1, 40).unwrap();
        let mut cfg = SolverConfig::new(2.0, 0.5);
        cfg.blowup_threshold = 1e9;
        let s = Solver::new(&g, grid, cfg).unwrap();
        let n = grid.n_points();
        let mut u_curr = vec![0.0; n];
        u_curr[10] = 1.0;
        let mut st = WaveState {
            u_prev: vec![0.0; n],
            u_curr,
            t: 0.0,
            step_index: 0,
            active: 11,
        };
        s.step(&mut st);
        let dr = 0.1;
        let dt = s.dt();
        let dt2 = dt * dt;
        let c = 2.0 / grid.r(9);
        let lap_left = (0.0 - 2.0 * 0.0 + 1.0) / (dr * dr);
        let left = 2.0 * 0.0 - 0.0 + dt2 * (lap_left + c * (1.0 - 0.0) / (2.0 * dr) + 0.0);
        assert_eq!(st.u_curr[9], left);
        let mid = 2.0 - 0.0 + dt2 * ((0.0 - 2.0 + 0.0) / (dr * dr) + 0.0 + 1.0);
        assert_eq!(st.u_curr[10], mid);
        assert_eq!(st.u_curr[12], 0.0);
        assert_eq!(st.u_prev[10], 1.0);
    }

    #[test]
    fn large_data_blows_up() {
        let g = geom();
        let grid = RadialGrid::for_horizon(0.05, 3.0, 30.0).unwrap();
        let out = run_until_blowup(&g, grid, &bump_data(2.0), &SolverConfig::new(2.0, 30.0)).unwrap();
        let t = out.t_num.expect("blowup expected");
        assert!(t > 0.0 && t < 30.0);
    }
}
