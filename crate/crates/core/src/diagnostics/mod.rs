//! Functionals of discrete solutions: the monotone quantity `G`, cutoff
//! masses against `U` and `Φ̃_β`, the boundary functional `F_β`, the
//! aggregate `Y(R)` and the balance residual of the weighted identity.

mod cutoff;
mod fbeta;
mod gfunc;
mod mass;
mod tfm;
mod weights;

use serde::Serialize;

pub use cutoff::{eta, CutoffSpec};
pub use fbeta::{functional_f_beta, FBetaWeights};
pub use gfunc::{functional_g, worst_relative_drop, CompatibleWeights, GMonitor, GTraces, G_MONOTONE_SLACK};
pub use mass::{
    conjugate, mass_from_samples, spatial_samples, volume_mass, volume_scaling_probe, weighted_mass, y_aggregate,
    y_from_samples, MassResult, VolumeProbe, YTable, MIN_WINDOW_SAMPLES, Y_RHO_NODES,
};
pub use tfm::{tfm_residual, TfmBalance};
pub use weights::{HarmonicWeight, ShiftedPhiTable, SpaceTimeWeight, WeightRegistry, WeightRequest, PHI_TABLE_SPACING};

/// Paired time and value sequences.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FunctionalTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FunctionalTrace {
    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
