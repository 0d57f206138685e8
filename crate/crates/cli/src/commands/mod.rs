mod diagnose;
mod fit;
mod simulate;
mod specfun;
mod sweep;
mod table;

use std::collections::BTreeMap;

use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::RunDir;

/// What a finished command reports. `failure` is set when outputs were
/// written but a check or the horizon failed.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub failure: Option<CliError>,
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn execute(&self, config: &RunConfig, out: &mut RunDir) -> Result<Outcome, CliError>;
}

#[derive(Default)]
pub struct CommandRegistry {
    commands: BTreeMap<&'static str, Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn register(&mut self, cmd: Box<dyn Command>) {
        self.commands.insert(cmd.name(), cmd);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.get(name).map(|c| c.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.commands.values().map(|c| c.as_ref())
    }

    pub fn standard() -> Self {
        let mut reg = Self::default();
        reg.register(Box::new(specfun::SpecfunVerify));
        reg.register(Box::new(table::TestfamTable));
        reg.register(Box::new(simulate::Simulate));
        reg.register(Box::new(sweep::Sweep));
        reg.register(Box::new(fit::Fit));
        reg.register(Box::new(diagnose::Diagnose));
        reg
    }
}

/// Refuses data outside the blowup theorem's positivity assumption.
pub(crate) fn require_positive_gu(config: &RunConfig) -> Result<f64, CliError> {
    let geom = config.geometry()?;
    let data = config.initial_data(1.0)?;
    let gu = blowuplab_core::wavesim::check_positivity(&data, &geom)?;
    if !(gu > 0.0) {
        return Err(CliError::config(format!(
            "refusing to run: the blowup result assumes ∫ g U dx > 0, but the configured velocity profile gives {gu:e}"
        )));
    }
    Ok(gu)
}
