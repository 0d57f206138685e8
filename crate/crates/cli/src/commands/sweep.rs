use blowuplab_core::lifespan::{sweep, SweepSpec};
use serde_json::json;

use super::fit::{fit_groups, sweep_rows, SWEEP_HEADER};
use super::{require_positive_gu, Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::RunDir;

pub struct Sweep;

impl Command for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn about(&self) -> &'static str {
        "estimate lifespans over the epsilon list and fit the scaling law"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        if config.solver.linear {
            return Err(CliError::config("a lifespan sweep needs the nonlinear equation"));
        }
        require_positive_gu(config)?;
        let geom = config.geometry()?;
        let mut spec = SweepSpec::new(
            geom,
            config.initial_data(1.0)?,
            config.solver_config(config.sweep.bootstrap_horizon),
            config.solver.dr,
        );
        let s = &config.sweep;
        spec.bootstrap_horizon = s.bootstrap_horizon;
        spec.horizon_factor = s.horizon_factor;
        spec.max_horizon = s.max_horizon;
        spec.refine = s.refine;
        spec.jobs = config.jobs;

        let records = sweep(&config.data.epsilons, &spec)?;
        out.write_json("records.json", &records)?;
        out.write_csv("sweep.csv", &SWEEP_HEADER, &sweep_rows(&records))?;

        let mut groups = vec![(config.solver.threshold, records.clone())];
        let mut watched: Vec<f64> = config.solver.watch_thresholds.clone();
        watched.retain(|&w| w != config.solver.threshold);
        watched.sort_by(|a, b| b.total_cmp(a));
        watched.dedup();
        for w in watched {
            let view: Vec<_> = records.iter().filter_map(|r| r.at_threshold(w)).collect();
            out.write_csv(&format!("sweep_threshold_{w:e}.csv"), &SWEEP_HEADER, &sweep_rows(&view))?;
            groups.push((w, view));
        }

        let dim = geom.dim();
        let mut problems = Vec::new();
        let fit_summary = match blowuplab_core::lifespan::predicted_exponent(dim, config.solver.p) {
            Ok(_) => {
                let (v, p) = fit_groups(&groups, dim, config.solver.p, config.fit.slope_tolerance)?;
                problems.extend(p);
                v
            }
            // critical powers: lifespans are reported without a fit
            Err(e) => json!({"dim": dim, "p": config.solver.p, "fits": [], "note": e.to_string()}),
        };
        out.write_json("fit.json", &fit_summary)?;

        let non_monotone: Vec<f64> = records
            .iter()
            .filter(|r| r.g_monotone == Some(false))
            .map(|r| r.epsilon)
            .collect();
        let exits: Vec<f64> = records
            .iter()
            .filter(|r| r.t_num.is_none() || r.error.is_some())
            .map(|r| r.epsilon)
            .collect();
        let summary = json!({
            "records": records.len(),
            "converged": records.iter().filter(|r| r.converged).count(),
            "horizon_exits_or_errors": exits,
            "g_non_monotone": non_monotone,
            "fit": fit_summary,
        });
        let failure = if !non_monotone.is_empty() {
            Some(CliError {
                kind: ErrorKind::Tolerance,
                message: format!("G decreased on runs with epsilon {non_monotone:?}"),
            })
        } else if !exits.is_empty() {
            Some(CliError::resource(format!(
                "no blowup within the horizon (or run error) for epsilon {exits:?}"
            )))
        } else if !problems.is_empty() {
            Some(CliError {
                kind: ErrorKind::Tolerance,
                message: problems.join("; "),
            })
        } else {
            None
        };
        Ok(Outcome { summary, failure })
    }
}
