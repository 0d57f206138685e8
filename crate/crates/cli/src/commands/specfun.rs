use blowuplab_core::specfun::evaluator_by_name;
use blowuplab_core::specfun::verify::run_suite;
use serde_json::json;

use super::{Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::RunDir;

pub struct SpecfunVerify;

impl Command for SpecfunVerify {
    fn name(&self) -> &'static str {
        "specfun-verify"
    }

    fn about(&self) -> &'static str {
        "check Bessel and hypergeometric identities on a grid"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        let spec = &config.specfun;
        let eval = evaluator_by_name(&spec.evaluator, spec.perturbation)
            .ok_or_else(|| CliError::config(format!("unknown evaluator '{}'", spec.evaluator)))?;
        let report = run_suite(eval.as_ref(), &spec.grid())?;
        out.write_json("specfun_report.json", &report)?;
        let failing: Vec<_> = report
            .failing()
            .map(|c| json!({"name": c.name, "observed": c.observed, "threshold": c.threshold, "worst_input": c.worst_input}))
            .collect();
        let summary = json!({
            "evaluator": report.evaluator,
            "passed": report.passed,
            "failing": failing,
        });
        let failure = (!report.passed).then(|| {
            let names: Vec<String> = report
                .failing()
                .map(|c| match c.worst_input {
                    Some((nu, z)) => format!("{} (observed {:e} at nu = {nu}, z = {z})", c.name, c.observed),
                    None => format!("{} (observed {:e})", c.name, c.observed),
                })
                .collect();
            CliError {
                kind: ErrorKind::Tolerance,
                message: format!("identities outside tolerance: {}", names.join("; ")),
            }
        });
        Ok(Outcome { summary, failure })
    }
}
