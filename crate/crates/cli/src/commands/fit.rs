use std::path::Path;

use blowuplab_core::lifespan::{fit_subcritical, predicted_exponent, LifespanRecord, ScalingFit};
use serde_json::{json, Value};

use super::{Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::{fmt_real, RunDir};

pub const SWEEP_HEADER: [&str; 5] = ["epsilon", "t_num", "dr", "threshold", "converged"];

pub fn sweep_rows(records: &[LifespanRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                fmt_real(r.epsilon),
                r.t_num.map_or_else(|| "horizon".to_string(), fmt_real),
                fmt_real(r.dr),
                fmt_real(r.threshold),
                r.converged.to_string(),
            ]
        })
        .collect()
}

/// Reads the five sweep columns back into records.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<LifespanRecord>, CliError> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| CliError::config(format!("cannot read sweep file {}: {e}", path.display())))?;
    let header = rd
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().collect::<Vec<_>>() != SWEEP_HEADER {
        return Err(CliError::config(format!(
            "{}: expected columns {}",
            path.display(),
            SWEEP_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let bad = |what: &str| CliError::config(format!("{} row {}: bad {what}", path.display(), i + 1));
        let num = |k: usize, what: &str| rec[k].parse::<f64>().map_err(|_| bad(what));
        let t_num = match &rec[1] {
            "horizon" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("t_num"))?),
        };
        out.push(LifespanRecord {
            epsilon: num(0, "epsilon")?,
            t_num,
            dr: num(2, "dr")?,
            dt: f64::NAN,
            threshold: num(3, "threshold")?,
            converged: rec[4].parse::<bool>().map_err(|_| bad("converged"))?,
            t_num_refined: None,
            horizon: f64::NAN,
            crossings: Vec::new(),
            crossings_refined: Vec::new(),
            g_monotone: None,
            error: None,
        });
    }
    Ok(out)
}

pub fn fit_json(fit: &ScalingFit, threshold: f64) -> Value {
    json!({
        "threshold": threshold,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "predicted_slope": fit.predicted_slope,
        "n_points": fit.n_points,
        "relative_slope_error": (fit.slope - fit.predicted_slope).abs() / fit.predicted_slope.abs(),
    })
}

/// Fits each threshold group; returns the JSON summary and whether every
/// fit lies within `tolerance` of the predicted slope.
pub fn fit_groups(
    groups: &[(f64, Vec<LifespanRecord>)],
    dim: u32,
    p: f64,
    tolerance: f64,
) -> Result<(Value, Vec<String>), CliError> {
    let mut fits = Vec::new();
    let mut slopes = Vec::new();
    let mut problems = Vec::new();
    for (thr, recs) in groups {
        match fit_subcritical(recs, dim, p) {
            Ok(f) => {
                let rel = (f.slope - f.predicted_slope).abs() / f.predicted_slope.abs();
                if !(rel <= tolerance) {
                    problems.push(format!(
                        "slope {:.4} at threshold {thr:e} is {:.1}% from the predicted {:.4}",
                        f.slope,
                        100.0 * rel,
                        f.predicted_slope
                    ));
                }
                slopes.push(f.slope);
                fits.push(fit_json(&f, *thr));
            }
            Err(e) => {
                problems.push(format!("threshold {thr:e}: {e}"));
                fits.push(json!({"threshold": thr, "error": e.to_string()}));
            }
        }
    }
    let spread = if slopes.len() >= 2 {
        let hi = slopes.iter().cloned().fold(f64::MIN, f64::max);
        let lo = slopes.iter().cloned().fold(f64::MAX, f64::min);
        Some((hi - lo).abs() / lo.abs().max(hi.abs()))
    } else {
        None
    };
    let predicted = predicted_exponent(dim, p).ok().map(|e| -e);
    Ok((
        json!({
            "dim": dim,
            "p": p,
            "predicted_slope": predicted,
            "slope_tolerance": tolerance,
            "fits": fits,
            "threshold_slope_spread": spread,
        }),
        problems,
    ))
}

/// Splits records by threshold, largest threshold first.
pub fn group_by_threshold(records: Vec<LifespanRecord>) -> Vec<(f64, Vec<LifespanRecord>)> {
    let mut groups: Vec<(f64, Vec<LifespanRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(t, _)| *t == r.threshold) {
            Some((_, v)) => v.push(r),
            None => groups.push((r.threshold, vec![r])),
        }
    }
    groups.sort_by(|a, b| b.0.total_cmp(&a.0));
    groups
}

pub struct Fit;

impl Command for Fit {
    fn name(&self) -> &'static str {
        "fit"
    }

    fn about(&self) -> &'static str {
        "fit the lifespan scaling law to stored sweep CSVs"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        if config.fit.inputs.is_empty() {
            return Err(CliError::config("fit.inputs lists no sweep CSV files"));
        }
        // a critical or supercritical power has no slope to compare with
        predicted_exponent(config.geometry.dim, config.solver.p)?;
        let mut records = Vec::new();
        for path in &config.fit.inputs {
            records.extend(read_sweep_csv(path)?);
        }
        let groups = group_by_threshold(records);
        let (summary, problems) = fit_groups(
            &groups,
            config.geometry.dim,
            config.solver.p,
            config.fit.slope_tolerance,
        )?;
        let mut summary = summary;
        summary["inputs"] = json!(config.fit.inputs);
        out.write_json("fit.json", &summary)?;
        let failure = (!problems.is_empty()).then(|| CliError {
            kind: ErrorKind::Tolerance,
            message: problems.join("; "),
        });
        Ok(Outcome { summary, failure })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(eps: f64, t: Option<f64>, thr: f64) -> LifespanRecord {
        LifespanRecord {
            epsilon: eps,
            t_num: t,
            dr: 0.1,
            dt: 0.045,
            threshold: thr,
            converged: t.is_some(),
            t_num_refined: None,
            horizon: 1e3,
            crossings: vec![],
            crossings_refined: vec![],
            g_monotone: None,
            error: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![rec(0.4, Some(81.25), 1e6), rec(0.1, None, 1e6)];
        let dir = tempfile::tempdir().unwrap();
        let mut run = RunDir::create(dir.path()).unwrap();
        let path = run.write_csv("s.csv", &SWEEP_HEADER, &sweep_rows(&recs)).unwrap();
        let back = read_sweep_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].t_num, Some(81.25));
        assert_eq!(back[0].epsilon, 0.4);
        assert!(back[0].converged);
        assert_eq!(back[1].t_num, None);
        assert!(!back[1].converged);
    }

    #[test]
    fn groups_and_fits() {
        let mut recs = Vec::new();
        for e in [0.4, 0.3, 0.2] {
            recs.push(rec(e, Some(5.0 * e.powf(-2.0)), 1e6));
            recs.push(rec(e, Some(4.9 * e.powf(-2.0)), 1e3));
        }
        let groups = group_by_threshold(recs);
        assert_eq!(groups[0].0, 1e6);
        let (v, problems) = fit_groups(&groups, 3, 2.0, 0.2).unwrap();
        assert!(problems.is_empty(), "{problems:?}");
        assert!(v["threshold_slope_spread"].as_f64().unwrap() < 1e-12);
    }
}
