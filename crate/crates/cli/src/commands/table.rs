use blowuplab_core::testfam::{
    phi_beta, phi_beta_lower_bound, phi_beta_upper_shape, yz_closed_form, yz_integral, ExteriorGeometry,
    LightConePoint, TestFunctionParams,
};
use rayon::prelude::*;
use serde_json::json;

use super::{Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::output::{fmt_real, RunDir};

/// Allowed relative gap between the truncated integral and the closed form.
const IDENTITY_TOL: f64 = 1e-6;

pub struct TestfamTable;

struct Row {
    dim: u32,
    beta: f64,
    r: f64,
    t: f64,
    phi: f64,
    lower: f64,
    upper_shape: f64,
    residual: f64,
    flag: String,
}

fn evaluate(dim: u32, beta: f64, r: f64, t: f64, tol: f64) -> Row {
    let mut row = Row {
        dim,
        beta,
        r,
        t,
        phi: f64::NAN,
        lower: f64::NAN,
        upper_shape: f64::NAN,
        residual: f64::NAN,
        flag: "ok".into(),
    };
    let res = (|| -> blowuplab_core::Result<()> {
        // the support radius plays no role in Φ_β itself
        let geom = ExteriorGeometry::new(dim, r.max(1.0) + 1.0)?;
        let params = TestFunctionParams::new(&geom, beta, t.max(geom.support_radius() + 1.0))?.with_tolerance(tol);
        let point = LightConePoint::new(r, t)?;
        row.phi = phi_beta(&geom, &params, point)?.value;
        row.lower = phi_beta_lower_bound(&geom, beta, point)?;
        row.upper_shape = phi_beta_upper_shape(&geom, beta, point)?;
        let num = yz_integral(&geom, beta, r, t, &params.quad_options())?.value;
        let exact = yz_closed_form(&geom, beta, r, t)?.value;
        row.residual = ((num - exact) / exact).abs();
        Ok(())
    })();
    if let Err(e) = res {
        row.flag = format!("error: {e}");
    } else if row.phi < row.lower - 1e-12 * row.lower.abs() {
        row.flag = "lower_bound_violated".into();
    } else if !(row.upper_shape > 0.0 && (row.phi / row.upper_shape).is_finite()) && row.phi != 0.0 {
        row.flag = "upper_shape_degenerate".into();
    } else if !(row.residual <= IDENTITY_TOL) {
        row.flag = "identity_residual".into();
    }
    row
}

impl Command for TestfamTable {
    fn name(&self) -> &'static str {
        "testfam-table"
    }

    fn about(&self) -> &'static str {
        "tabulate the slowly decaying solutions and their bounds"
    }

    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError> {
        let t = &config.table;
        let mut points = Vec::new();
        for &dim in &t.dims {
            for &beta in &t.betas {
                for &time in &t.times {
                    for &r in &t.radii {
                        if r < time {
                            points.push((dim, beta, r, time));
                        }
                    }
                }
            }
        }
        if points.is_empty() {
            return Err(CliError::config("the table grid has no points with 1 <= r < t"));
        }
        let tol = config.testfam.quad_tolerance;
        let rows: Vec<Row> = points
            .par_iter()
            .map(|&(n, b, r, time)| evaluate(n, b, r, time, tol))
            .collect();
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|w| {
                vec![
                    w.dim.to_string(),
                    fmt_real(w.beta),
                    fmt_real(w.r),
                    fmt_real(w.t),
                    fmt_real(w.phi),
                    fmt_real(w.lower),
                    fmt_real(w.upper_shape),
                    fmt_real(w.residual),
                    w.flag.clone(),
                ]
            })
            .collect();
        out.write_csv(
            "testfam_table.csv",
            &[
                "dim",
                "beta",
                "r",
                "t",
                "phi_beta",
                "lower_bound",
                "upper_shape",
                "identity_residual",
                "flag",
            ],
            &cells,
        )?;
        let bad: Vec<_> = rows.iter().filter(|w| w.flag != "ok").collect();
        let max_residual = rows.iter().map(|w| w.residual).fold(0.0, f64::max);
        let summary = json!({
            "rows": rows.len(),
            "flagged": bad.len(),
            "max_identity_residual": max_residual,
        });
        let failure = (!bad.is_empty()).then(|| CliError {
            kind: ErrorKind::Tolerance,
            message: format!(
                "{} flagged rows, first at (N, beta, r, t) = ({}, {}, {}, {}): {}",
                bad.len(),
                bad[0].dim,
                bad[0].beta,
                bad[0].r,
                bad[0].t,
                bad[0].flag
            ),
        });
        Ok(Outcome { summary, failure })
    }
}
