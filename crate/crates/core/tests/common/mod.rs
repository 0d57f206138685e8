#![allow(dead_code)]

use std::sync::Arc;

use blowuplab_core::profile::{make_bump, PulseDisplacement, PulseVelocity, Zero};
use blowuplab_core::testfam::ExteriorGeometry;
use blowuplab_core::wavesim::{InitialData, RadialGrid, Solver, SolverConfig, WaveState};

pub fn geom(n: u32) -> ExteriorGeometry {
    ExteriorGeometry::new(n, 3.0).unwrap()
}

pub fn bump_data(eps: f64) -> InitialData {
    InitialData::new(Arc::new(Zero), Arc::new(make_bump(1.5, 2.5, 2.0).unwrap()), eps).unwrap()
}

pub fn advance_to_step(solver: &Solver, data: &InitialData, steps: usize) -> WaveState {
    let mut s = solver.init(data);
    while s.step_index < steps {
        solver.step(&mut s);
    }
    s
}

/// Max error on the coarse points at `t = 4.5` for each spacing, against `dr_ref`.
pub fn linear_errors(spacings: &[f64], dr_ref: f64) -> Vec<f64> {
    let g = geom(3);
    let t_end = 4.5;
    let data = InitialData::new(
        Arc::new(make_bump(1.5, 5.5, 1.0).unwrap()),
        Arc::new(make_bump(2.0, 6.0, 1.0).unwrap()),
        1.0,
    )
    .unwrap();
    let solve = |dr: f64| -> (RadialGrid, Vec<f64>) {
        let grid = RadialGrid::for_horizon(dr, 6.0, t_end).unwrap();
        let solver = Solver::new(&g, grid, SolverConfig::linear(t_end)).unwrap();
        let steps = (t_end / solver.dt()).round() as usize;
        (grid, advance_to_step(&solver, &data, steps).u_curr)
    };
    let (rg, reference) = solve(dr_ref);
    spacings
        .iter()
        .map(|&dr| {
            let (grid, u) = solve(dr);
            let ratio = (dr / dr_ref).round() as usize;
            (0..grid.n_points())
                .filter(|&j| j * ratio < rg.n_points())
                .map(|j| (u[j] - reference[j * ratio]).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn centroid(v: &[f64], grid: &RadialGrid) -> f64 {
    let (mut m0, mut m1) = (0.0, 0.0);
    for (j, x) in v.iter().enumerate() {
        let r = grid.r(j);
        let w = r * x;
        m0 += w;
        m1 += r * w;
    }
    m1 / m0
}

pub struct LightCone {
    /// Largest `|u|` at `r >= r₀ + t + 5 dr`.
    pub leak: f64,
    /// Time at which the leak first exceeded 1e-14.
    pub first_above: Option<f64>,
    /// `u = 0` at `r = 1` on every level.
    pub dirichlet: bool,
    /// Nothing nonzero beyond the stencil's domain of dependence.
    pub window: bool,
}

pub fn light_cone(dr: f64, t_end: f64, cfg: SolverConfig, eps: f64) -> LightCone {
    let g = geom(3);
    let data = bump_data(eps);
    let grid = RadialGrid::for_horizon(dr, 3.0, t_end).unwrap();
    let solver = Solver::new(&g, grid, cfg).unwrap();
    let mut s = solver.init(&data);
    let first = s.active_len();
    let mut out = LightCone {
        leak: 0.0,
        first_above: None,
        dirichlet: true,
        window: true,
    };
    loop {
        out.dirichlet &= s.u_curr[0] == 0.0 && s.u_prev[0] == 0.0;
        // the stencil reaches one cell further per step and no more
        out.window &= s.active_len() <= first + s.step_index;
        out.window &= s.u_curr[s.active_len()..].iter().all(|&v| v == 0.0);
        let front = 3.0 + s.t + 5.0 * dr;
        for j in 0..grid.n_points() {
            if grid.r(j) >= front {
                out.leak = out.leak.max(s.u_curr[j].abs());
            }
        }
        if out.leak > 1e-14 && out.first_above.is_none() {
            out.first_above = Some(s.t);
        }
        if s.t >= t_end || s.max_abs() >= solver.config().blowup_threshold {
            break;
        }
        solver.step(&mut s);
    }
    out
}

/// Centroid speed of an outgoing `r u` pulse over `[0, t_end]` at spacing `dr`.
pub fn pulse_speed(dr: f64, t_end: f64) -> f64 {
    let g = geom(3);
    let f = make_bump(1.5, 3.0, 1.0).unwrap();
    let data = InitialData::new(Arc::new(PulseDisplacement(f)), Arc::new(PulseVelocity(f)), 1.0).unwrap();
    let grid = RadialGrid::for_horizon(dr, 3.0, t_end).unwrap();
    let solver = Solver::new(&g, grid, SolverConfig::linear(t_end)).unwrap();
    let c0 = centroid(&solver.init(&data).u_prev, &grid);
    let steps = (t_end / solver.dt()).round() as usize;
    let s = advance_to_step(&solver, &data, steps);
    (centroid(&s.u_curr, &grid) - c0) / s.t
}
