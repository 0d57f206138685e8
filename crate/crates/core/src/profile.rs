//! Radial initial-data profiles and the name-keyed registry that builds them
//! from configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::composite_gauss_legendre;
use crate::testfam::{harmonic_u, ExteriorGeometry};

/// A radial function `s ↦ f(s)` on `s >= 1` with compact support.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn value(&self, r: f64) -> f64;
    /// Interval outside of which the profile vanishes, `None` if it is identically zero.
    fn support(&self) -> Option<(f64, f64)>;
}

/// Smooth bump `amplitude · exp(-1/(1-ξ²))`, `ξ = (2s-a-b)/(b-a)`, supported on `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    a: f64,
    b: f64,
    amplitude: f64,
}

pub fn make_bump(a: f64, b: f64, amplitude: f64) -> Result<Bump> {
    if !(a > 1.0) {
        return Err(Error::domain(
            "make_bump",
            format!("support start a = {a} must lie strictly outside the unit ball"),
        ));
    }
    if !(b > a) || !b.is_finite() {
        return Err(Error::domain("make_bump", format!("need a < b, got ({a}, {b})")));
    }
    if !amplitude.is_finite() {
        return Err(Error::domain("make_bump", "amplitude must be finite"));
    }
    Ok(Bump { a, b, amplitude })
}

impl Bump {
    fn xi(&self, s: f64) -> f64 {
        (2.0 * s - self.a - self.b) / (self.b - self.a)
    }

    /// d/ds of the bump.
    pub fn derivative(&self, s: f64) -> f64 {
        let xi = self.xi(s);
        if xi.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - xi * xi;
        // d/dξ exp(-1/q) = exp(-1/q) · (-2ξ/q²), dξ/ds = 2/(b-a)
        self.amplitude * (-1.0 / q).exp() * (-2.0 * xi / (q * q)) * 2.0 / (self.b - self.a)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}

impl RadialProfile for Bump {
    fn name(&self) -> &str {
        "bump"
    }

    fn value(&self, s: f64) -> f64 {
        let xi = self.xi(s);
        if xi.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - xi * xi)).exp()
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.a, self.b))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl RadialProfile for Zero {
    fn name(&self) -> &str {
        "zero"
    }
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Positive bump on the inner half of `(a, b)` minus a weighted bump on the
/// outer half, balanced so that `∫ g U r^{N-1} dr = 0`.
#[derive(Debug, Clone, Copy)]
pub struct Dipole {
    inner: Bump,
    outer: Bump,
    outer_weight: f64,
}

impl Dipole {
    pub fn balanced(geom: &ExteriorGeometry, a: f64, b: f64, amplitude: f64) -> Result<Self> {
        let m = 0.5 * (a + b);
        let inner = make_bump(a, m, amplitude)?;
        let outer = make_bump(m, b, amplitude)?;
        let wi = weighted_integral(&inner, geom)?;
        let wo = weighted_integral(&outer, geom)?;
        Ok(Self {
            inner,
            outer,
            outer_weight: wi / wo,
        })
    }
}

impl RadialProfile for Dipole {
    fn name(&self) -> &str {
        "dipole"
    }
    fn value(&self, r: f64) -> f64 {
        self.inner.value(r) - self.outer_weight * self.outer.value(r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.inner.a, self.outer.b))
    }
}

/// `F(s)/s` for a bump `F`: with the matching [`PulseVelocity`] and N = 3 this
/// launches a purely outgoing wave `r u = F(r - t)`.
#[derive(Debug, Clone, Copy)]
pub struct PulseDisplacement(pub Bump);

/// `-F'(s)/s`, companion of [`PulseDisplacement`].
#[derive(Debug, Clone, Copy)]
pub struct PulseVelocity(pub Bump);

impl RadialProfile for PulseDisplacement {
    fn name(&self) -> &str {
        "pulse_displacement"
    }
    fn value(&self, r: f64) -> f64 {
        self.0.value(r) / r
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.0.support()
    }
}

impl RadialProfile for PulseVelocity {
    fn name(&self) -> &str {
        "pulse_velocity"
    }
    fn value(&self, r: f64) -> f64 {
        -self.0.derivative(r) / r
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.0.support()
    }
}

/// `factor · inner`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub inner: Arc<dyn RadialProfile>,
    pub factor: f64,
}

impl RadialProfile for Scaled {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn value(&self, r: f64) -> f64 {
        self.factor * self.inner.value(r)
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support()
    }
}

/// `|S^{N-1}| ∫ p(r) U(r) r^{N-1} dr` over the support of `p`.
pub fn weighted_integral(p: &dyn RadialProfile, geom: &ExteriorGeometry) -> Result<f64> {
    let Some((a, b)) = p.support() else {
        return Ok(0.0);
    };
    let n = geom.dim() as i32;
    let mut acc = 0.0;
    for (r, w) in composite_gauss_legendre(a, b, 16, 20) {
        acc += w * p.value(r) * harmonic_u(geom, r)? * r.powi(n - 1);
    }
    Ok(geom.sphere_area() * acc)
}

/// Configuration record for a profile: registry name plus shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
}

impl ProfileSpec {
    pub fn zero() -> Self {
        Self {
            kind: "zero".into(),
            a: None,
            b: None,
            amplitude: None,
        }
    }

    pub fn shaped(kind: &str, a: f64, b: f64, amplitude: f64) -> Self {
        Self {
            kind: kind.into(),
            a: Some(a),
            b: Some(b),
            amplitude: Some(amplitude),
        }
    }

    fn interval(&self) -> Result<(f64, f64, f64)> {
        match (self.a, self.b) {
            (Some(a), Some(b)) => Ok((a, b, self.amplitude.unwrap_or(1.0))),
            _ => Err(Error::Config(format!(
                "profile '{}' needs support bounds a and b",
                self.kind
            ))),
        }
    }
}

type Builder = Box<dyn Fn(&ProfileSpec, &ExteriorGeometry) -> Result<Arc<dyn RadialProfile>> + Send + Sync>;

/// Name → constructor table for [`RadialProfile`] implementations.
pub struct ProfileRegistry {
    builders: BTreeMap<String, Builder>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, build: F)
    where
        F: Fn(&ProfileSpec, &ExteriorGeometry) -> Result<Arc<dyn RadialProfile>> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Box::new(build));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &ProfileSpec, geom: &ExteriorGeometry) -> Result<Arc<dyn RadialProfile>> {
        let build = self.builders.get(&spec.kind).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::Config(format!(
                "unknown profile kind '{}' (known: {})",
                spec.kind,
                known.join(", ")
            ))
        })?;
        let profile = build(spec, geom)?;
        if let Some((_, b)) = profile.support() {
            if b > geom.support_radius() {
                return Err(Error::Config(format!(
                    "profile support ends at {b}, beyond the data radius {}",
                    geom.support_radius()
                )));
            }
        }
        Ok(profile)
    }
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("zero", |_, _| Ok(Arc::new(Zero)));
        reg.register("bump", |s, _| {
            let (a, b, amp) = s.interval()?;
            Ok(Arc::new(make_bump(a, b, amp)?))
        });
        reg.register("dipole", |s, g| {
            let (a, b, amp) = s.interval()?;
            Ok(Arc::new(Dipole::balanced(g, a, b, amp)?))
        });
        reg.register("pulse_displacement", |s, _| {
            let (a, b, amp) = s.interval()?;
            Ok(Arc::new(PulseDisplacement(make_bump(a, b, amp)?)))
        });
        reg.register("pulse_velocity", |s, _| {
            let (a, b, amp) = s.interval()?;
            Ok(Arc::new(PulseVelocity(make_bump(a, b, amp)?)))
        });
        reg
    }
}
