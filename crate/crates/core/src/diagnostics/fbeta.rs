use super::cutoff::CutoffSpec;
use super::mass::conjugate;
use super::weights::SpaceTimeWeight;
use super::FunctionalTrace;
use crate::error::Result;
use crate::testfam::{i_beta, ExteriorGeometry, TestFunctionParams};
use crate::wavesim::{History, InitialData};

/// Shifted weights of orders β and β+1 with their parameters.
pub struct FBetaWeights<'a> {
    pub params: TestFunctionParams,
    pub phi: &'a dyn SpaceTimeWeight,
    pub phi_next: &'a dyn SpaceTimeWeight,
}

/// Trace of `∫ [∂_t u η_R^q Φ̃_β + (β/t_s) u η_R^q Φ̃_{β+1} - q u η_R^{q-1} η_R' Φ̃_β] dx`
/// with `q = 2p'`.
///
/// The first entry, at t = 0, is `ε I_β` evaluated from the data; later
/// entries sit at half steps `t - dt/2` of each stored level, where both the
/// time difference and the average of the two levels are centered.
pub fn functional_f_beta(
    history: &History,
    data: &InitialData,
    geom: &ExteriorGeometry,
    weights: &FBetaWeights,
    cutoff: &CutoffSpec,
    p: f64,
) -> Result<FunctionalTrace> {
    let params = &weights.params;
    let q = 2.0 * conjugate(p);
    let beta = params.beta;
    let ts = params.t_shift;
    let grid = history.grid;
    let dr = grid.dr();
    let dt = history.dt;
    let n1 = geom.dim() as i32 - 1;
    let mut trace = FunctionalTrace::default();
    let initial = if data.epsilon == 0.0 {
        0.0
    } else {
        data.epsilon * i_beta(geom, params, data.f.as_ref(), data.g.as_ref())?
    };
    trace.push(0.0, initial);
    for s in &history.snapshots {
        let t = s.t - 0.5 * dt;
        let (e, e1, _) = cutoff.eval(t);
        let eq = if e == 0.0 { 0.0 } else { e.powf(q) };
        let eq1 = if e == 0.0 { 0.0 } else { e.powf(q - 1.0) };
        let n = s.u.len().max(s.u_prev.len());
        let mut acc = 0.0;
        for j in 0..n {
            let (a, b) = (s.u_at(j), s.u_prev_at(j));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let r = grid.r(j);
            let u = 0.5 * (a + b);
            let ut = (a - b) / dt;
            let phi = weights.phi.value(r, t);
            let phi1 = weights.phi_next.value(r, t);
            acc += (ut * eq * phi + beta / ts * u * eq * phi1 - q * u * eq1 * e1 * phi) * r.powi(n1);
        }
        let v = geom.sphere_area() * acc * dr;
        if !v.is_finite() {
            break;
        }
        trace.push(t, v);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::diagnostics::ShiftedPhiTable;
    use crate::profile::{make_bump, weighted_integral, Zero};
    use crate::testfam::select_t_shift;
    use crate::wavesim::{RadialGrid, Solver, SolverConfig};

    #[test]
    fn starts_at_epsilon_i_beta_and_is_continuous() {
        let geom = ExteriorGeometry::new(3, 3.0).unwrap();
        let g = Arc::new(make_bump(1.5, 2.5, 2.0).unwrap());
        let seed = TestFunctionParams::new(&geom, 2.0, 6.0).unwrap();
        let sel = select_t_shift(&geom, &seed, &Zero, g.as_ref()).unwrap();
        let params = TestFunctionParams {
            t_shift: sel.t_shift,
            ..seed
        };
        let data = InitialData::new(Arc::new(Zero), g.clone(), 0.2).unwrap();
        let grid = RadialGrid::for_horizon(0.05, 3.0, 20.0).unwrap();
        let solver = Solver::new(&geom, grid, SolverConfig::new(2.0, 20.0)).unwrap();
        let h = History::record(&solver, &data, 1).unwrap();
        let phi = ShiftedPhiTable::build(&geom, &params, grid.r_max(), 20.0, 0.25).unwrap();
        let next = TestFunctionParams { beta: 3.0, ..params };
        let phi1 = ShiftedPhiTable::build(&geom, &next, grid.r_max(), 20.0, 0.25).unwrap();
        let w = FBetaWeights {
            params,
            phi: &phi,
            phi_next: &phi1,
        };
        let cutoff = CutoffSpec::new(15.0, false).unwrap();
        let tr = functional_f_beta(&h, &data, &geom, &w, &cutoff, 2.0).unwrap();
        let f0 = tr.values[0];
        let half_gu = 0.5 * weighted_integral(g.as_ref(), &geom).unwrap();
        assert!(f0 >= 0.2 * half_gu);
        assert!(((tr.values[1] - f0) / f0).abs() < 1e-2, "{} vs {f0}", tr.values[1]);

        let zero = data.with_epsilon(0.0).unwrap();
        let h0 = History::record(&solver, &zero, 10).unwrap();
        let tr0 = functional_f_beta(&h0, &zero, &geom, &w, &cutoff, 2.0).unwrap();
        assert!(tr0.values.iter().all(|&v| v == 0.0));
    }
}
