use std::path::{Path, PathBuf};
use std::sync::Arc;

use blowuplab_core::profile::{ProfileRegistry, ProfileSpec, RadialProfile};
use blowuplab_core::specfun::verify::VerifyGrid;
use blowuplab_core::testfam::ExteriorGeometry;
use blowuplab_core::wavesim::{InitialData, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Displacement and velocity profiles of the data.
pub type ProfilePair = (Arc<dyn RadialProfile>, Arc<dyn RadialProfile>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub data: DataSpec,
    pub solver: SolverSpec,
    pub sweep: SweepSection,
    pub testfam: TestfamSpec,
    pub specfun: SpecfunSpec,
    pub table: TableSpec,
    pub diagnose: DiagnoseSpec,
    pub fit: FitSpec,
    pub output_dir: Option<PathBuf>,
    /// Keep every k-th time level in stored histories.
    pub stride: usize,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::default(),
            data: DataSpec::default(),
            solver: SolverSpec::default(),
            sweep: SweepSection::default(),
            testfam: TestfamSpec::default(),
            specfun: SpecfunSpec::default(),
            table: TableSpec::default(),
            diagnose: DiagnoseSpec::default(),
            fit: FitSpec::default(),
            output_dir: None,
            stride: 10,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySpec {
    pub dim: u32,
    /// Radius `r₀` containing the data supports.
    pub support_radius: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self {
            dim: 3,
            support_radius: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSpec {
    pub f: ProfileSpec,
    pub g: ProfileSpec,
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            f: ProfileSpec::zero(),
            g: ProfileSpec::shaped("bump", 1.5, 2.5, 2.0),
            epsilon: 0.4,
            epsilons: vec![0.4, 0.3, 0.2, 0.15, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub p: f64,
    pub dr: f64,
    pub cfl_factor: f64,
    pub threshold: f64,
    pub horizon: f64,
    pub watch_thresholds: Vec<f64>,
    /// Drop the nonlinearity.
    pub linear: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            p: 2.0,
            dr: 0.1,
            cfl_factor: SolverConfig::DEFAULT_CFL,
            threshold: SolverConfig::DEFAULT_THRESHOLD,
            horizon: 1000.0,
            watch_thresholds: vec![1e3],
            linear: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub bootstrap_horizon: f64,
    pub horizon_factor: f64,
    pub max_horizon: f64,
    pub refine: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            bootstrap_horizon: 1000.0,
            horizon_factor: 3.0,
            max_horizon: 1e5,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestfamSpec {
    pub beta: f64,
    pub quad_tolerance: f64,
    /// Fixed shift; searched for when absent.
    pub t_shift: Option<f64>,
}

impl Default for TestfamSpec {
    fn default() -> Self {
        Self {
            beta: 2.0,
            quad_tolerance: 1e-10,
            t_shift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecfunSpec {
    pub orders: Option<Vec<f64>>,
    pub z_values: Option<Vec<f64>>,
    pub derivative_z: Option<Vec<f64>>,
    pub evaluator: String,
    /// Relative error injected by the `perturbed-k` evaluator.
    pub perturbation: f64,
}

impl Default for SpecfunSpec {
    fn default() -> Self {
        Self {
            orders: None,
            z_values: None,
            derivative_z: None,
            evaluator: "standard".into(),
            perturbation: 0.01,
        }
    }
}

impl SpecfunSpec {
    pub fn grid(&self) -> VerifyGrid {
        let d = VerifyGrid::default();
        VerifyGrid {
            orders: self.orders.clone().unwrap_or(d.orders),
            z_values: self.z_values.clone().unwrap_or(d.z_values),
            derivative_z: self.derivative_z.clone().unwrap_or(d.derivative_z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableSpec {
    pub dims: Vec<u32>,
    pub betas: Vec<f64>,
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self {
            dims: vec![3],
            betas: vec![1.0, 2.0],
            radii: vec![1.0, 1.5, 2.0, 4.0, 8.0],
            times: vec![2.0, 5.0, 10.0, 20.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseSpec {
    /// Horizon of the diagnosed run (capped by the solver horizon).
    pub horizon: f64,
    pub cutoff_radii: Vec<f64>,
    pub weights: Vec<String>,
    pub y_radii: Vec<f64>,
    pub volume_radii: Vec<f64>,
    /// Window of the balance check; skipped when absent.
    pub tfm_radius: Option<f64>,
    pub volume_tolerance: f64,
}

impl Default for DiagnoseSpec {
    fn default() -> Self {
        Self {
            horizon: 40.0,
            cutoff_radii: vec![10.0, 20.0, 30.0],
            weights: vec!["U".into(), "phi_tilde".into()],
            y_radii: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            volume_radii: vec![1e3, 3e3, 1e4, 3e4, 1e5],
            tfm_radius: Some(20.0),
            volume_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSpec {
    /// Sweep CSV files to fit.
    pub inputs: Vec<PathBuf>,
    /// Allowed relative gap between fitted and predicted slope.
    pub slope_tolerance: f64,
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            slope_tolerance: 0.2,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::config(msg)
}

fn all_positive(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(bad(format!("{name} must contain positive finite values")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn geometry(&self) -> Result<ExteriorGeometry, CliError> {
        Ok(ExteriorGeometry::new(self.geometry.dim, self.geometry.support_radius)?)
    }

    pub fn profiles(&self) -> Result<ProfilePair, CliError> {
        let geom = self.geometry()?;
        let reg = ProfileRegistry::default();
        Ok((reg.build(&self.data.f, &geom)?, reg.build(&self.data.g, &geom)?))
    }

    pub fn initial_data(&self, epsilon: f64) -> Result<InitialData, CliError> {
        let (f, g) = self.profiles()?;
        Ok(InitialData::new(f, g, epsilon)?)
    }

    pub fn solver_config(&self, horizon: f64) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            p_exponent: s.p,
            cfl_factor: s.cfl_factor,
            blowup_threshold: s.threshold,
            t_horizon: horizon,
            nonlinear: !s.linear,
            watch_thresholds: s.watch_thresholds.clone(),
        }
    }

    /// Checks every section, so commands can assume a consistent config.
    pub fn validate(&self) -> Result<(), CliError> {
        let geom = self.geometry()?;
        self.profiles()?;
        self.solver_config(self.solver.horizon).validate(&geom)?;
        if !(self.solver.dr > 0.0 && self.solver.dr.is_finite()) {
            return Err(bad("solver.dr must be positive"));
        }
        if !(self.data.epsilon >= 0.0 && self.data.epsilon.is_finite()) {
            return Err(bad("data.epsilon must be nonnegative"));
        }
        all_positive("data.epsilons", &self.data.epsilons)?;
        let sw = &self.sweep;
        if !(sw.bootstrap_horizon > 0.0 && sw.horizon_factor >= 1.0 && sw.max_horizon >= sw.bootstrap_horizon) {
            return Err(bad(
                "sweep needs bootstrap_horizon > 0, horizon_factor >= 1 and max_horizon >= bootstrap_horizon",
            ));
        }
        let tf = &self.testfam;
        if !(tf.beta > 0.0 && tf.beta.is_finite()) {
            return Err(bad("testfam.beta must be positive"));
        }
        if !(tf.quad_tolerance > 0.0 && tf.quad_tolerance < 1.0) {
            return Err(bad("testfam.quad_tolerance must lie in (0, 1)"));
        }
        if let Some(ts) = tf.t_shift {
            if !(ts > geom.support_radius()) {
                return Err(bad(format!(
                    "testfam.t_shift = {ts} must exceed the data radius {}",
                    geom.support_radius()
                )));
            }
        }
        if blowuplab_core::specfun::evaluator_by_name(&self.specfun.evaluator, self.specfun.perturbation).is_none() {
            return Err(bad(format!(
                "unknown Bessel evaluator '{}' (known: {})",
                self.specfun.evaluator,
                blowuplab_core::specfun::EVALUATOR_NAMES.join(", ")
            )));
        }
        let t = &self.table;
        if t.dims.iter().any(|&n| n < 3) {
            return Err(bad("table.dims must be at least 3"));
        }
        all_positive("table.betas", &t.betas)?;
        if t.radii.iter().any(|&r| !(r >= 1.0 && r.is_finite())) {
            return Err(bad("table.radii must be at least 1"));
        }
        all_positive("table.times", &t.times)?;
        let d = &self.diagnose;
        all_positive("diagnose.horizon", &[d.horizon])?;
        if d.cutoff_radii
            .iter()
            .chain(&d.y_radii)
            .any(|&r| !(r > 1.0 && r.is_finite()))
        {
            return Err(bad("diagnose cutoff radii must exceed 1"));
        }
        all_positive("diagnose.volume_radii", &d.volume_radii)?;
        if let Some(r) = d.tfm_radius {
            if !(r > 1.0 && r.is_finite()) {
                return Err(bad("diagnose.tfm_radius must exceed 1"));
            }
        }
        if !(self.fit.slope_tolerance > 0.0) {
            return Err(bad("fit.slope_tolerance must be positive"));
        }
        if self.stride == 0 {
            return Err(bad("stride must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(bad("jobs must be at least 1"));
        }
        Ok(())
    }
}
