//! Time-integrated balance of the pairing against `Ψ = η_R(t)^{2p'} U(x)`.
//!
//! Since `ΔU = 0` and the cutoff vanishes with its derivative at `t = R`, the
//! balance reads
//! `ε ∫ g U dx + ∫∫ |u|^p Ψ dx dt - ∫∫ u ∂_t²Ψ dx dt = 0`.

use serde::Serialize;

use super::cutoff::CutoffSpec;
use super::mass::conjugate;
use crate::error::{Error, Result};
use crate::profile::weighted_integral;
use crate::testfam::{harmonic_u, ExteriorGeometry};
use crate::wavesim::{InitialData, RadialGrid, Solver, SolverConfig, StepObserver, WaveState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfmBalance {
    pub dr: f64,
    /// `ε ∫ g U dx`
    pub initial: f64,
    /// `∫∫ |u|^p Ψ`
    pub source: f64,
    /// `∫∫ u ∂_t²Ψ`
    pub cutoff_term: f64,
    /// `|initial + source - cutoff_term| / initial`
    pub residual: f64,
}

struct Accumulator {
    cutoff: CutoffSpec,
    q: f64,
    p: f64,
    weights: Vec<f64>,
    source: f64,
    cutoff_term: f64,
}

impl Accumulator {
    fn add(&mut self, u: &[f64], t: f64, dt_weight: f64) {
        let (psi, _, psi2) = self.cutoff.power(t, self.q);
        if psi == 0.0 && psi2 == 0.0 {
            return;
        }
        let mut s = 0.0;
        let mut c = 0.0;
        for (v, w) in u.iter().zip(&self.weights) {
            s += w * v.abs().powf(self.p);
            c += w * v;
        }
        self.source += dt_weight * psi * s;
        self.cutoff_term += dt_weight * psi2 * c;
    }
}

impl StepObserver for Accumulator {
    fn observe(&mut self, state: &WaveState, solver: &Solver) -> Result<()> {
        let dt = solver.dt();
        let n = state.active_len();
        if state.step_index == 1 {
            // level 0 with the half trapezoid weight
            let u0 = state.u_prev[..n].to_vec();
            self.add(&u0, 0.0, 0.5 * dt);
        }
        let u = state.u_curr[..n].to_vec();
        // the cutoff has vanished well before the final level, so every
        // stored level takes the full weight
        self.add(&u, state.t, dt);
        Ok(())
    }
}

/// Runs the solver to `t = R` on spacing `dr` and evaluates the balance.
pub fn tfm_residual(
    geom: &ExteriorGeometry,
    data: &InitialData,
    config: &SolverConfig,
    dr: f64,
    cutoff: &CutoffSpec,
) -> Result<TfmBalance> {
    if cutoff.starred {
        return Err(Error::Config("the balance needs the smooth cutoff".into()));
    }
    let horizon = cutoff.scale_r * 1.05;
    let cfg = SolverConfig {
        t_horizon: horizon,
        ..config.clone()
    };
    let grid = RadialGrid::for_horizon(dr, geom.support_radius(), horizon)?;
    let solver = Solver::new(geom, grid, cfg)?;
    let n1 = geom.dim() as i32 - 1;
    let area = geom.sphere_area();
    let weights = grid
        .radii()
        .map(|r| harmonic_u(geom, r).map(|u| area * u * r.powi(n1) * dr))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Accumulator {
        cutoff: *cutoff,
        q: 2.0 * conjugate(config.p_exponent),
        p: config.p_exponent,
        weights,
        source: 0.0,
        cutoff_term: 0.0,
    };
    let outcome = solver.run(data, &mut [&mut acc])?;
    if let Some(t) = outcome.t_num {
        return Err(Error::Config(format!(
            "solution crossed the blowup threshold at t = {t} inside the window R = {}",
            cutoff.scale_r
        )));
    }
    if !config.nonlinear {
        acc.source = 0.0;
    }
    let initial = data.epsilon * weighted_integral(data.g.as_ref(), geom)?;
    let residual = (initial + acc.source - acc.cutoff_term).abs() / initial.abs();
    Ok(TfmBalance {
        dr,
        initial,
        source: acc.source,
        cutoff_term: acc.cutoff_term,
        residual,
    })
}
