use serde::Serialize;

use super::{InitialData, RadialGrid, RunOutcome, Solver, WaveState};
use crate::error::{Error, Result};

/// Callback invoked on the initial state and after every step.
pub trait StepObserver {
    fn observe(&mut self, state: &WaveState, solver: &Solver) -> Result<()>;
}

/// Both time levels at one recorded step, trimmed to the nonzero window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: usize,
    /// Time of `u`; `u_prev` is one step earlier.
    pub t: f64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
}

impl Snapshot {
    pub fn u_at(&self, j: usize) -> f64 {
        self.u.get(j).copied().unwrap_or(0.0)
    }

    pub fn u_prev_at(&self, j: usize) -> f64 {
        self.u_prev.get(j).copied().unwrap_or(0.0)
    }
}

/// Keeps every `stride`-th state.
#[derive(Debug, Clone)]
pub struct SnapshotRecorder {
    stride: usize,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotRecorder {
    pub fn new(stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Config("snapshot stride must be at least 1".into()));
        }
        Ok(Self {
            stride,
            snapshots: Vec::new(),
        })
    }
}

impl StepObserver for SnapshotRecorder {
    fn observe(&mut self, state: &WaveState, _solver: &Solver) -> Result<()> {
        if (state.step_index - 1).is_multiple_of(self.stride) {
            let n = state.active_len();
            self.snapshots.push(Snapshot {
                step: state.step_index,
                t: state.t,
                u: state.u_curr[..n].to_vec(),
                u_prev: state.u_prev[..n].to_vec(),
            });
        }
        Ok(())
    }
}

/// A completed run with its decimated states.
#[derive(Debug, Clone, Serialize)]
pub struct History {
    pub grid: RadialGrid,
    pub dt: f64,
    pub stride: usize,
    pub snapshots: Vec<Snapshot>,
    pub outcome: RunOutcome,
}

impl History {
    /// Runs `solver` recording every `stride`-th state.
    pub fn record(solver: &Solver, data: &InitialData, stride: usize) -> Result<Self> {
        Self::record_with(solver, data, stride, &mut [])
    }

    pub fn record_with(
        solver: &Solver,
        data: &InitialData,
        stride: usize,
        extra: &mut [&mut dyn StepObserver],
    ) -> Result<Self> {
        let mut rec = SnapshotRecorder::new(stride)?;
        let outcome = {
            let mut obs: Vec<&mut dyn StepObserver> = Vec::with_capacity(extra.len() + 1);
            obs.push(&mut rec);
            for e in extra.iter_mut() {
                obs.push(&mut **e);
            }
            solver.run(data, &mut obs)?
        };
        Ok(Self {
            grid: *solver.grid(),
            dt: solver.dt(),
            stride,
            snapshots: rec.snapshots,
            outcome,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}
