//! Space-time weights paired against `|u|^p`, selectable by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::testfam::{harmonic_u, shifted_phi, ExteriorGeometry, TestFunctionParams};

/// A weight `W(r, t)` on the exterior light cone.
pub trait SpaceTimeWeight: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, r: f64, t: f64) -> f64;
}

/// `U(r)`, constant in time.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicWeight {
    geom: ExteriorGeometry,
}

impl HarmonicWeight {
    pub fn new(geom: ExteriorGeometry) -> Self {
        Self { geom }
    }
}

impl SpaceTimeWeight for HarmonicWeight {
    fn name(&self) -> &str {
        "U"
    }

    fn value(&self, r: f64, _t: f64) -> f64 {
        harmonic_u(&self.geom, r).unwrap_or(0.0)
    }
}

/// `Φ̃_β(r, t)` tabulated on a tensor grid over `[1, r_max] × [0, t_max]`.
///
/// The table holds `Φ̃_β / U`, which is smooth up to the obstacle, and
/// interpolates it bilinearly; `U` is multiplied back exactly. Nodes farther
/// out than `r₀ + t + 2·spacing` lie outside the support of any solution and
/// are stored as 0.
#[derive(Debug, Clone)]
pub struct ShiftedPhiTable {
    geom: ExteriorGeometry,
    r_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
    /// Row-major in t: `values[it * r_nodes.len() + ir]`.
    values: Vec<f64>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn locate(nodes: &[f64], x: f64) -> (usize, f64) {
    let n = nodes.len();
    let h = (nodes[n - 1] - nodes[0]) / (n - 1) as f64;
    let pos = ((x - nodes[0]) / h).clamp(0.0, (n - 1) as f64);
    let i = (pos.floor() as usize).min(n - 2);
    (i, pos - i as f64)
}

impl ShiftedPhiTable {
    /// Tabulates with node spacing at most `spacing` in both directions.
    pub fn build(
        geom: &ExteriorGeometry,
        params: &TestFunctionParams,
        r_max: f64,
        t_max: f64,
        spacing: f64,
    ) -> Result<Self> {
        params.validate(geom)?;
        if !(r_max > 1.0) || !(t_max > 0.0) || !(spacing > 0.0) {
            return Err(Error::Config(format!(
                "bad table extent r_max = {r_max}, t_max = {t_max}, spacing = {spacing}"
            )));
        }
        let lead = geom.support_radius() + 2.0 * spacing;
        if lead >= params.t_shift {
            return Err(Error::Config(format!(
                "t_shift = {} too small for table spacing {spacing}",
                params.t_shift
            )));
        }
        let nr = ((r_max - 1.0) / spacing).ceil() as usize + 1;
        let nt = (t_max / spacing).ceil() as usize + 1;
        let r_nodes = linspace(1.0, r_max, nr.max(2));
        let t_nodes = linspace(0.0, t_max, nt.max(2));
        let cells: Vec<(f64, f64)> = t_nodes
            .iter()
            .flat_map(|&t| r_nodes.iter().map(move |&r| (r, t)))
            .collect();
        let values = cells
            .par_iter()
            .map(|&(r, t)| {
                if r > 1.0 && r <= lead + t {
                    Ok(shifted_phi(geom, params, r, t)? / harmonic_u(geom, r)?)
                } else {
                    Ok(0.0)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut values = values;
        let nr = r_nodes.len();
        if nr >= 4 {
            // quotient at r = 1 by quadratic extrapolation
            for row in values.chunks_mut(nr) {
                row[0] = 3.0 * row[1] - 3.0 * row[2] + row[3];
            }
        }
        Ok(Self {
            geom: *geom,
            r_nodes,
            t_nodes,
            values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }
}

impl SpaceTimeWeight for ShiftedPhiTable {
    fn name(&self) -> &str {
        "phi_tilde"
    }

    fn value(&self, r: f64, t: f64) -> f64 {
        let (ir, fr) = locate(&self.r_nodes, r);
        let (it, ft) = locate(&self.t_nodes, t);
        let nr = self.r_nodes.len();
        let v = |i: usize, j: usize| self.values[j * nr + i];
        let lo = v(ir, it) * (1.0 - fr) + v(ir + 1, it) * fr;
        let hi = v(ir, it + 1) * (1.0 - fr) + v(ir + 1, it + 1) * fr;
        let u = harmonic_u(&self.geom, r).unwrap_or(0.0);
        u * (lo * (1.0 - ft) + hi * ft)
    }
}

/// Extent of the region a weight must cover.
#[derive(Debug, Clone, Copy)]
pub struct WeightRequest<'a> {
    pub geom: &'a ExteriorGeometry,
    pub params: &'a TestFunctionParams,
    pub r_max: f64,
    pub t_max: f64,
}

type WeightBuilder = Box<dyn Fn(&WeightRequest) -> Result<Arc<dyn SpaceTimeWeight>> + Send + Sync>;

/// Name → constructor table for [`SpaceTimeWeight`]s.
pub struct WeightRegistry {
    builders: BTreeMap<String, WeightBuilder>,
}

impl WeightRegistry {
    pub fn register<F>(&mut self, name: &str, build: F)
    where
        F: Fn(&WeightRequest) -> Result<Arc<dyn SpaceTimeWeight>> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Box::new(build));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, req: &WeightRequest) -> Result<Arc<dyn SpaceTimeWeight>> {
        let b = self.builders.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown weight '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        b(req)
    }
}

/// Table spacing used by the default `phi_tilde` builder.
pub const PHI_TABLE_SPACING: f64 = 0.5;

impl Default for WeightRegistry {
    fn default() -> Self {
        let mut reg = Self {
            builders: BTreeMap::new(),
        };
        reg.register("U", |req| Ok(Arc::new(HarmonicWeight::new(*req.geom))));
        reg.register("phi_tilde", |req| {
            Ok(Arc::new(ShiftedPhiTable::build(
                req.geom,
                req.params,
                req.r_max,
                req.t_max,
                PHI_TABLE_SPACING,
            )?))
        });
        reg
    }
}
