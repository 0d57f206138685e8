use blowuplab_core::diagnostics::GMonitor;
use blowuplab_core::wavesim::{History, RadialGrid, Solver};
use serde_json::json;

use super::{require_positive_gu, Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::{fmt_real, RunDir};

pub struct Simulate;

impl Command for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn about(&self) -> &'static str {
        "run one solution and store decimated snapshots"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        let nonlinear = !config.solver.linear;
        if nonlinear {
            require_positive_gu(config)?;
        }
        let geom = config.geometry()?;
        let eps = config.data.epsilon;
        let data = config.initial_data(eps)?;
        let horizon = config.solver.horizon;
        let grid = RadialGrid::for_horizon(config.solver.dr, geom.support_radius(), horizon)?;
        let solver = Solver::new(&geom, grid, config.solver_config(horizon))?;
        let mut monitor = GMonitor::new(&geom, &grid)?;
        let history = History::record_with(&solver, &data, config.stride, &mut [&mut monitor])?;

        let mut rows = Vec::new();
        for s in &history.snapshots {
            let t = fmt_real(s.t);
            for (j, u) in s.u.iter().enumerate() {
                rows.push(vec![t.clone(), fmt_real(grid.r(j)), fmt_real(*u)]);
            }
        }
        out.write_csv("snapshots.csv", &["t", "r", "u"], &rows)?;
        let o = &history.outcome;
        let meta = json!({
            "epsilon": eps,
            "dim": geom.dim(),
            "support_radius": geom.support_radius(),
            "p": config.solver.p,
            "nonlinear": nonlinear,
            "dr": o.dr,
            "dt": o.dt,
            "n_points": grid.n_points(),
            "r_max": grid.r_max(),
            "horizon": horizon,
            "stride": history.stride,
            "snapshots": history.snapshots.len(),
            "steps": o.steps,
            "t_end": o.t_end,
            "t_num": o.t_num,
            "threshold": o.threshold,
            "max_abs": o.max_abs,
            "crossings": o.crossings,
            "g_monotone": monitor.monotone(),
            "g_worst_drop": monitor.worst_drop,
        });
        out.write_json("run.json", &meta)?;

        let mut failure = None;
        if nonlinear && !monitor.monotone() {
            failure = Some(CliError {
                kind: ErrorKind::Tolerance,
                message: format!("G decreased by {:e} relative", monitor.worst_drop),
            });
        } else if nonlinear && o.t_num.is_none() {
            failure = Some(CliError::resource(format!(
                "no blowup within the horizon t = {horizon}"
            )));
        }
        Ok(Outcome {
            summary: json!({"t_num": o.t_num, "steps": o.steps, "g_monotone": monitor.monotone()}),
            failure,
        })
    }
}
