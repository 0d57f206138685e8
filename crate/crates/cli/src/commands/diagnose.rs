use blowuplab_core::diagnostics::{
    functional_f_beta, functional_g, mass_from_samples, spatial_samples, tfm_residual, volume_scaling_probe,
    worst_relative_drop, y_from_samples, CutoffSpec, FBetaWeights, WeightRegistry, WeightRequest, G_MONOTONE_SLACK,
};
use blowuplab_core::testfam::{select_t_shift, TestFunctionParams};
use blowuplab_core::wavesim::{History, RadialGrid, Solver};
use serde_json::{json, Value};

use super::{require_positive_gu, Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::RunDir;

pub struct Diagnose;

impl Command for Diagnose {
    fn name(&self) -> &'static str {
        "diagnose"
    }

    fn about(&self) -> &'static str {
        "evaluate weighted functionals and scaling probes on one run"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        if config.solver.linear {
            return Err(CliError::config("diagnostics are defined for the nonlinear equation"));
        }
        require_positive_gu(config)?;
        let d = &config.diagnose;
        let geom = config.geometry()?;
        let p = config.solver.p;
        let eps = config.data.epsilon;
        let data = config.initial_data(eps)?;
        let horizon = d.horizon.min(config.solver.horizon);
        let grid = RadialGrid::for_horizon(config.solver.dr, geom.support_radius(), horizon)?;
        let solver = Solver::new(&geom, grid, config.solver_config(horizon))?;
        let history = History::record(&solver, &data, config.stride)?;
        let t_last = history.snapshots.last().map_or(0.0, |s| s.t);

        let g = functional_g(&history, &geom, p)?;
        out.write_trace("g_trace.csv", &g.g.times, &g.g.values)?;
        out.write_trace("g_source_trace.csv", &g.source.times, &g.source.values)?;
        let g_drop = worst_relative_drop(&g.g);

        let tf = &config.testfam;
        let base =
            TestFunctionParams::new(&geom, tf.beta, 2.0 * geom.support_radius())?.with_tolerance(tf.quad_tolerance);
        let (params, shift) = match tf.t_shift {
            Some(ts) => (TestFunctionParams { t_shift: ts, ..base }, None),
            None => {
                let sel = select_t_shift(&geom, &base, data.f.as_ref(), data.g.as_ref())?;
                (
                    TestFunctionParams {
                        t_shift: sel.t_shift,
                        ..base
                    },
                    Some(sel),
                )
            }
        };
        let next = TestFunctionParams {
            beta: params.beta + 1.0,
            ..params
        };
        let registry = WeightRegistry::default();
        let request = |pr| WeightRequest {
            geom: &geom,
            params: pr,
            r_max: grid.r_max(),
            t_max: t_last.max(horizon),
        };
        let phi = registry.build("phi_tilde", &request(&params))?;
        let phi_next = registry.build("phi_tilde", &request(&next))?;
        let window = CutoffSpec::new(horizon.max(1.0 + 1e-9), false)?;
        let fb = functional_f_beta(
            &history,
            &data,
            &geom,
            &FBetaWeights {
                params,
                phi: phi.as_ref(),
                phi_next: phi_next.as_ref(),
            },
            &window,
            p,
        )?;
        out.write_trace("f_beta_trace.csv", &fb.times, &fb.values)?;

        let mut masses = Vec::new();
        for name in &d.weights {
            let w = registry.build(name, &request(&params))?;
            let samples = spatial_samples(&history, &geom, w.as_ref(), p);
            for &r in &d.cutoff_radii {
                for starred in [false, true] {
                    let c = CutoffSpec::new(r, starred)?;
                    let m = mass_from_samples(&samples, &c, p)?;
                    masses.push(json!({
                        "weight": name,
                        "R": r,
                        "starred": starred,
                        "mass": m.value,
                        "truncated": m.truncated,
                    }));
                }
            }
        }
        let y = if d.y_radii.is_empty() {
            Value::Null
        } else {
            let samples = spatial_samples(&history, &geom, phi.as_ref(), p);
            json!(y_from_samples(&samples, p, &d.y_radii)?)
        };

        let mut problems = Vec::new();
        let volume = if d.volume_radii.is_empty() {
            Value::Null
        } else {
            match volume_scaling_probe(&geom, p, &d.volume_radii) {
                Ok(v) => {
                    if !((v.slope - v.expected_slope).abs() <= d.volume_tolerance) {
                        problems.push(format!(
                            "volume slope {:.4} differs from {:.4} by more than {}",
                            v.slope, v.expected_slope, d.volume_tolerance
                        ));
                    }
                    json!(v)
                }
                Err(e) => json!({"error": e.to_string()}),
            }
        };
        let tfm = match d.tfm_radius {
            Some(r) => {
                let cutoff = CutoffSpec::new(r, false)?;
                let cfg = config.solver_config(r);
                let dr = config.solver.dr;
                let a = tfm_residual(&geom, &data, &cfg, dr, &cutoff)?;
                let b = tfm_residual(&geom, &data, &cfg, 0.5 * dr, &cutoff)?;
                json!({"R": r, "coarse": a, "fine": b, "observed_order": (a.residual / b.residual).log2()})
            }
            None => Value::Null,
        };
        if g_drop > G_MONOTONE_SLACK {
            problems.push(format!("G decreased by {g_drop:e} relative"));
        }

        let probes = json!({
            "epsilon": eps,
            "horizon": horizon,
            "t_num": history.outcome.t_num,
            "beta": params.beta,
            "t_shift": params.t_shift,
            "shift_search": shift.map(|s| json!({"i_beta": s.i_beta, "half_gu": s.half_gu, "trials": s.trials})),
            "g_worst_drop": g_drop,
            "f_beta_initial": fb.values.first(),
            "masses": masses,
            "y": y,
            "volume": volume,
            "tfm": tfm,
        });
        out.write_json("probes.json", &probes)?;
        let failure = (!problems.is_empty()).then(|| CliError {
            kind: ErrorKind::Tolerance,
            message: problems.join("; "),
        });
        Ok(Outcome {
            summary: json!({"t_num": history.outcome.t_num, "g_worst_drop": g_drop, "t_shift": params.t_shift}),
            failure,
        })
    }
}
