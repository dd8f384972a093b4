//! One-dimensional radial profiles `ψ : [0, ∞) → [0, ∞)` from which the
//! built-in G-function families are assembled as `φ(x) = Σ_B ψ_B(|x_B|)`.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Absolute tolerance for quadrature-defined profiles.
pub const PROFILE_QUAD_TOL: f64 = 1e-10;

/// A convex, increasing profile with `ψ(0) = 0`.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    fn value(&self, s: f64) -> f64;
    /// `ψ'(s)`, nondecreasing, with `ψ'(0) = 0` for N-function profiles.
    fn derivative(&self, s: f64) -> f64;
    fn second_derivative(&self, s: f64) -> f64 {
        let h = 1e-6 * s.abs().max(1e-6);
        let lo = (s - h).max(0.0);
        (self.derivative(s + h) - self.derivative(lo)) / (s + h - lo)
    }
    /// Closed-form conjugate profile, if the family has one.
    fn analytic_conjugate(&self) -> Option<Arc<dyn RadialProfile>> {
        None
    }
    fn label(&self) -> String;
}

/// `s^p / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    pub p: f64,
}

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::ExponentTooSmall(p));
        }
        Ok(Self { p })
    }

    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

impl RadialProfile for Power {
    fn value(&self, s: f64) -> f64 {
        s.powf(self.p) / self.p
    }
    fn derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            s.powf(self.p - 1.0)
        }
    }
    fn second_derivative(&self, s: f64) -> f64 {
        (self.p - 1.0) * s.powf(self.p - 2.0)
    }
    fn analytic_conjugate(&self) -> Option<Arc<dyn RadialProfile>> {
        Some(Arc::new(Power { p: self.conjugate_exponent() }))
    }
    fn label(&self) -> String {
        format!("power({})", self.p)
    }
}

/// `∫₀^s r^{p-1} / log(r² + e) dr`.
///
/// Values come from a cumulative table built once per exponent.
#[derive(Debug, Clone)]
pub struct LogTempered {
    pub p: f64,
    table: std::sync::Arc<quad::CumulativeTable>,
}

impl PartialEq for LogTempered {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl LogTempered {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::ExponentTooSmall(p));
        }
        let table = quad::CumulativeTable::new(
            |r: f64| r.powf(p - 1.0) / (r * r + E).ln(),
            PROFILE_QUAD_TOL * 1e-4,
        );
        let profile = Self { p, table: std::sync::Arc::new(table) };
        if let Some(s) = last_concave_point(&profile) {
            return Err(Error::InvalidFamily(format!(
                "log_tempered({p}) is not convex near s = {s:e}"
            )));
        }
        Ok(profile)
    }
}

impl RadialProfile for LogTempered {
    fn value(&self, s: f64) -> f64 {
        let p = self.p;
        self.table.integral(|r: f64| r.powf(p - 1.0) / (r * r + E).ln(), s, PROFILE_QUAD_TOL)
    }
    fn derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        s.powf(self.p - 1.0) / (s * s + E).ln()
    }
    fn second_derivative(&self, s: f64) -> f64 {
        let l = (s * s + E).ln();
        (self.p - 1.0) * s.powf(self.p - 2.0) / l
            - 2.0 * s.powf(self.p) / ((s * s + E) * l * l)
    }
    fn label(&self) -> String {
        format!("log_tempered({})", self.p)
    }
}

/// `s^p / (q [log(s² + e)]^q)` with `q = p/(p-1)`, replaced by a matched
/// quadratic `a s²` below `x0` whenever the raw formula is concave there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDampedCompanion {
    pub p: f64,
    q: f64,
    x0: f64,
    a: f64,
    shift: f64,
}

impl LogDampedCompanion {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::ExponentTooSmall(p));
        }
        let q = p / (p - 1.0);
        let raw = Self { p, q, x0: 0.0, a: 0.0, shift: 0.0 };
        let Some(x0) = last_concave_point(&raw) else {
            return Ok(raw);
        };
        let a = raw.raw_derivative(x0) / (2.0 * x0);
        let shift = a * x0 * x0 - raw.raw_value(x0);
        Ok(Self { p, q, x0, a, shift })
    }

    /// Radius below which the quadratic extension is active (0 if none).
    pub fn regularization_radius(&self) -> f64 {
        self.x0
    }

    fn raw_value(&self, s: f64) -> f64 {
        s.powf(self.p) / (self.q * (s * s + E).ln().powf(self.q))
    }

    fn raw_derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let l = (s * s + E).ln();
        (self.p - 1.0) * s.powf(self.p - 1.0) / l.powf(self.q)
            - 2.0 * s.powf(self.p + 1.0) / ((s * s + E) * l.powf(self.q + 1.0))
    }
}

impl RadialProfile for LogDampedCompanion {
    fn value(&self, s: f64) -> f64 {
        if s < self.x0 {
            self.a * s * s
        } else {
            self.raw_value(s) + self.shift
        }
    }
    fn derivative(&self, s: f64) -> f64 {
        if s < self.x0 {
            2.0 * self.a * s
        } else {
            self.raw_derivative(s)
        }
    }
    fn label(&self) -> String {
        format!("log_damped_companion({})", self.p)
    }
}

/// `c·ψ(s)` for a positive constant `c`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub factor: f64,
    pub inner: Arc<dyn RadialProfile>,
}

impl RadialProfile for Scaled {
    fn value(&self, s: f64) -> f64 {
        self.factor * self.inner.value(s)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.factor * self.inner.derivative(s)
    }
    fn second_derivative(&self, s: f64) -> f64 {
        self.factor * self.inner.second_derivative(s)
    }
    fn analytic_conjugate(&self) -> Option<Arc<dyn RadialProfile>> {
        // (cψ)*(r) = c ψ*(r/c)
        let inner = self.inner.analytic_conjugate()?;
        Some(Arc::new(ArgScaled { outer: self.factor, arg: 1.0 / self.factor, inner }))
    }
    fn label(&self) -> String {
        format!("{}*{}", self.factor, self.inner.label())
    }
}

/// `c·ψ(k s)`.
#[derive(Debug, Clone)]
struct ArgScaled {
    outer: f64,
    arg: f64,
    inner: Arc<dyn RadialProfile>,
}

impl RadialProfile for ArgScaled {
    fn value(&self, s: f64) -> f64 {
        self.outer * self.inner.value(self.arg * s)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.outer * self.arg * self.inner.derivative(self.arg * s)
    }
    fn second_derivative(&self, s: f64) -> f64 {
        self.outer * self.arg * self.arg * self.inner.second_derivative(self.arg * s)
    }
    fn label(&self) -> String {
        format!("{}*({})[{}·s]", self.outer, self.inner.label(), self.arg)
    }
}

/// Outcome of maximizing `r s − ψ(s)` over `s ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSup {
    pub value: f64,
    pub argmax: f64,
}

/// Largest abscissa at which the profile is allowed to be searched.
const SUP_SEARCH_LIMIT: f64 = 1e150;

/// `sup_{s ≥ 0} r s − ψ(s)` for `r ≥ 0`; `value = ∞` when the supremum
/// diverges within the searchable range.
///
/// The maximizer solves `ψ'(s) = r`; it is bracketed by doubling, narrowed by
/// bisection on the sign of `r − ψ'(s)` and polished with Newton steps.
pub fn radial_sup(profile: &dyn RadialProfile, r: f64) -> RadialSup {
    let r = r.abs();
    if r == 0.0 {
        return RadialSup { value: 0.0, argmax: 0.0 };
    }
    let mut hi = 1.0;
    while profile.derivative(hi) < r {
        hi *= 2.0;
        if hi > SUP_SEARCH_LIMIT {
            return RadialSup { value: f64::INFINITY, argmax: f64::INFINITY };
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.derivative(mid) < r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let curv = profile.second_derivative(s);
        if !(curv > 0.0) || !curv.is_finite() {
            break;
        }
        let next = s - (profile.derivative(s) - r) / curv;
        if next < lo || next > hi {
            break;
        }
        s = next;
    }
    RadialSup { value: (r * s - profile.value(s)).max(0.0), argmax: s }
}

/// Numeric conjugate `ψ*(r) = sup_s r s − ψ(s)`.
#[derive(Debug, Clone)]
pub struct NumericConjugate {
    pub inner: Arc<dyn RadialProfile>,
}

impl RadialProfile for NumericConjugate {
    fn value(&self, s: f64) -> f64 {
        radial_sup(self.inner.as_ref(), s).value
    }
    fn derivative(&self, s: f64) -> f64 {
        radial_sup(self.inner.as_ref(), s).argmax
    }
    fn second_derivative(&self, s: f64) -> f64 {
        let x = radial_sup(self.inner.as_ref(), s).argmax;
        1.0 / self.inner.second_derivative(x)
    }
    fn label(&self) -> String {
        format!("conj[{}]", self.inner.label())
    }
}

/// Scans `ψ''` on a log grid and returns the largest grid point just above
/// any point where it is negative.
fn last_concave_point(profile: &dyn RadialProfile) -> Option<f64> {
    let grid = crate::sampling::log_space(1e-8, 1e8, 801);
    let mut last = None;
    for (i, &s) in grid.iter().enumerate() {
        if profile.second_derivative(s) < -1e-12 * profile.derivative(s).abs().max(1e-300) / s {
            last = Some(grid[(i + 1).min(grid.len() - 1)]);
        }
    }
    last
}
