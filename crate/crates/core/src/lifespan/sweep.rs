use rayon::prelude::*;
use serde::Serialize;

use super::{predicted_exponent, LifespanRecord};
use crate::diagnostics::GMonitor;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::testfam::ExteriorGeometry;
use crate::wavesim::{InitialData, RadialGrid, Solver, SolverConfig};

/// Relative gap allowed between the `dr` and `dr/2` lifespans.
pub const RECORD_AGREEMENT: f64 = 0.05;

/// Everything a sweep needs besides the list of ε.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    #[serde(skip)]
    pub geom: ExteriorGeometry,
    /// Profiles of the data; its ε is ignored.
    #[serde(skip)]
    pub data: InitialData,
    /// Solver settings; its horizon is replaced per run.
    pub config: SolverConfig,
    pub dr: f64,
    /// Horizon of the two largest ε, before any fit is available.
    pub bootstrap_horizon: f64,
    /// Multiple of the provisional prediction used as horizon.
    pub horizon_factor: f64,
    pub max_horizon: f64,
    /// Repeat every run at `dr/2` to decide convergence.
    pub refine: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl SweepSpec {
    pub fn new(geom: ExteriorGeometry, data: InitialData, config: SolverConfig, dr: f64) -> Self {
        Self {
            geom,
            data,
            config,
            dr,
            bootstrap_horizon: 1000.0,
            horizon_factor: 3.0,
            max_horizon: 1e5,
            refine: true,
            jobs: None,
        }
    }
}

struct Provisional {
    slope: f64,
    intercept: f64,
}

impl Provisional {
    /// Line through the finite records; with a single one the predicted
    /// slope is used.
    fn from_records(records: &[&LifespanRecord], predicted_slope: Option<f64>) -> Option<Self> {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter_map(|r| r.t_num.map(|t| (r.epsilon.ln(), t.ln())))
            .collect();
        match pts.len() {
            0 => None,
            1 => predicted_slope.map(|s| Self {
                slope: s,
                intercept: pts[0].1 - s * pts[0].0,
            }),
            _ => {
                let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                // two equal ε give no usable line
                let f = least_squares(&x, &y).ok()?;
                (f.slope.is_finite() && f.slope != 0.0).then_some(Self {
                    slope: f.slope,
                    intercept: f.intercept,
                })
            }
        }
    }

    fn predict(&self, epsilon: f64) -> f64 {
        (self.intercept + self.slope * epsilon.ln()).exp()
    }
}

/// Runs one ε on `dr` (and `dr/2` when refining).
fn run_one(spec: &SweepSpec, epsilon: f64, horizon: f64) -> LifespanRecord {
    let dt = spec.config.cfl_factor * spec.dr;
    let mut rec = LifespanRecord {
        epsilon,
        t_num: None,
        dr: spec.dr,
        dt,
        threshold: spec.config.blowup_threshold,
        converged: false,
        t_num_refined: None,
        horizon,
        crossings: Vec::new(),
        crossings_refined: Vec::new(),
        g_monotone: None,
        error: None,
    };
    if let Err(e) = run_into(spec, &mut rec) {
        rec.error = Some(e.to_string());
        rec.converged = false;
    }
    rec
}

fn run_into(spec: &SweepSpec, rec: &mut LifespanRecord) -> Result<()> {
    if !(rec.epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon = {} must be positive", rec.epsilon)));
    }
    let data = spec.data.with_epsilon(rec.epsilon)?;
    let r0 = spec.geom.support_radius();
    let cfg = SolverConfig {
        t_horizon: rec.horizon,
        ..spec.config.clone()
    };
    let grid = RadialGrid::for_horizon(spec.dr, r0, rec.horizon)?;
    let solver = Solver::new(&spec.geom, grid, cfg.clone())?;
    let mut monitor = GMonitor::new(&spec.geom, &grid)?;
    let out = solver.run(&data, &mut [&mut monitor])?;
    rec.dt = out.dt;
    rec.t_num = out.t_num;
    rec.crossings = out.crossings.iter().map(|c| (c.threshold, c.t)).collect();
    rec.g_monotone = Some(monitor.monotone());
    let Some(t_base) = out.t_num else {
        return Ok(());
    };
    if !spec.refine {
        rec.converged = true;
        return Ok(());
    }
    // a refined lifespan past this point would fail the agreement test anyway
    let h_fine = (t_base * (1.0 + 2.0 * RECORD_AGREEMENT)).min(rec.horizon);
    let fine_cfg = SolverConfig {
        t_horizon: h_fine,
        ..cfg
    };
    let dr_fine = 0.5 * spec.dr;
    let fine = Solver::new(&spec.geom, RadialGrid::for_horizon(dr_fine, r0, h_fine)?, fine_cfg)?.run(&data, &mut [])?;
    rec.t_num_refined = fine.t_num;
    rec.crossings_refined = fine.crossings.iter().map(|c| (c.threshold, c.t)).collect();
    rec.converged = fine
        .t_num
        .is_some_and(|tf| (t_base - tf).abs() <= RECORD_AGREEMENT * tf);
    Ok(())
}

/// One record per ε, in input order. The two largest ε run with the
/// bootstrap horizon; the rest use `horizon_factor` times the lifespan
/// predicted by a line through the bootstrap results.
pub fn sweep(epsilons: &[f64], spec: &SweepSpec) -> Result<Vec<LifespanRecord>> {
    spec.config.validate(&spec.geom)?;
    if !(spec.dr > 0.0) || !(spec.bootstrap_horizon > 0.0) || !(spec.horizon_factor >= 1.0) {
        return Err(Error::Config(
            "sweep needs dr > 0, a positive bootstrap horizon and horizon_factor >= 1".into(),
        ));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = spec.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&a, &b| epsilons[b].total_cmp(&epsilons[a]).then(a.cmp(&b)));
    let n_boot = order.len().min(2);
    let (boot, rest) = order.split_at(n_boot);

    let mut out: Vec<Option<LifespanRecord>> = vec![None; epsilons.len()];
    let boot_recs: Vec<LifespanRecord> = pool.install(|| {
        boot.par_iter()
            .map(|&i| run_one(spec, epsilons[i], spec.bootstrap_horizon))
            .collect()
    });
    let predicted_slope = predicted_exponent(spec.geom.dim(), spec.config.p_exponent)
        .ok()
        .map(|e| -e);
    let prov = Provisional::from_records(&boot_recs.iter().collect::<Vec<_>>(), predicted_slope);
    for (&i, r) in boot.iter().zip(boot_recs) {
        out[i] = Some(r);
    }

    let horizon_for = |eps: f64| -> f64 {
        let h = prov
            .as_ref()
            .map(|p| spec.horizon_factor * p.predict(eps))
            .filter(|h| h.is_finite())
            .unwrap_or(spec.bootstrap_horizon);
        h.max(spec.bootstrap_horizon.min(spec.max_horizon))
            .min(spec.max_horizon)
    };
    let rest_recs: Vec<LifespanRecord> = pool.install(|| {
        rest.par_iter()
            .map(|&i| run_one(spec, epsilons[i], horizon_for(epsilons[i])))
            .collect()
    });
    for (&i, r) in rest.iter().zip(rest_recs) {
        out[i] = Some(r);
    }
    Ok(out.into_iter().map(|r| r.expect("every index is run")).collect())
}
