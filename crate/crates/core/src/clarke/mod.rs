//! Time-dependent potentials `F(t, x) = Σ_j a_j(t) f_j(x)` with exact Clarke
//! subdifferential oracles, and falsification probes for the existence
//! hypotheses.

mod probes;
mod subdiff;
mod time_expr;

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunc::{make_family, FamilySpec, GFunction};
use crate::vecops::{dot, norm};

pub use probes::{
    probe_h1, probe_h2, probe_h3, probe_h4, probe_h5, probe_h6, probe_h7, probe_h8, probe_h9,
    probe_pasca, run_probes, default_trend_radii, BoundSampling, H3Options, HypothesisReport, PascaOptions, PascaOutcome,
    ProbeOptions, ProbeOutcome, ProbeStatus, TheoremVerdict, TrendRow, Witness,
};
pub use subdiff::{BlockBall, Projection, SubdiffSet, PROJECTION_MAX_ITER, PROJECTION_TOL};
pub use time_expr::TimeExpr;

/// Gradients within this distance of the maximum count as active in a
/// max-type term.
pub const ACTIVITY_TOL: f64 = 1e-9;

/// Number of time samples used to check nonnegativity of nonsmooth
/// coefficients at construction.
const COEFFICIENT_CHECKS: usize = 1001;

/// Serializable description of a smooth spatial piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothSpec {
    /// `⟨w, x⟩ + offset`.
    Affine { weights: Vec<f64>, offset: f64 },
    /// `φ(x_B)` with `B = start..start + φ.dim()`.
    Phi { phi: FamilySpec, start: usize },
    /// `x_i x_j`.
    Bilinear { i: usize, j: usize },
    Constant { value: f64 },
}

/// Serializable description of a term's spatial part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialSpec {
    Smooth { f: SmoothSpec },
    /// `|x_B|` for `B = start..start + len`.
    AbsNorm { start: usize, len: usize },
    /// `max_k f_k(x)`.
    MaxOf { pieces: Vec<SmoothSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coefficient: TimeExpr,
    pub spatial: SpatialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub dim: usize,
    pub terms: Vec<TermSpec>,
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A C¹ function of `x` with its gradient.
#[derive(Clone)]
pub enum SmoothFn {
    Affine { weights: Vec<f64>, offset: f64 },
    Phi { phi: GFunction, start: usize },
    Bilinear { i: usize, j: usize },
    Constant(f64),
    Custom { label: String, eval: Arc<ScalarFn>, grad: Arc<VectorFn> },
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl SmoothFn {
    pub fn custom<E, G>(label: impl Into<String>, eval: E, grad: G) -> Self
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        SmoothFn::Custom { label: label.into(), eval: Arc::new(eval), grad: Arc::new(grad) }
    }

    fn from_spec(spec: &SmoothSpec) -> Result<Self> {
        Ok(match spec {
            SmoothSpec::Affine { weights, offset } => {
                SmoothFn::Affine { weights: weights.clone(), offset: *offset }
            }
            SmoothSpec::Phi { phi, start } => SmoothFn::Phi { phi: make_family(phi)?, start: *start },
            SmoothSpec::Bilinear { i, j } => SmoothFn::Bilinear { i: *i, j: *j },
            SmoothSpec::Constant { value } => SmoothFn::Constant(*value),
        })
    }

    pub fn label(&self) -> String {
        match self {
            SmoothFn::Affine { weights, offset } => format!("affine({weights:?}, {offset})"),
            SmoothFn::Phi { phi, start } => format!("{}@{start}", phi.label()),
            SmoothFn::Bilinear { i, j } => format!("x{i}*x{j}"),
            SmoothFn::Constant(c) => format!("{c}"),
            SmoothFn::Custom { label, .. } => label.clone(),
        }
    }

    /// Highest coordinate index touched plus one (0 for constants).
    fn extent(&self) -> usize {
        match self {
            SmoothFn::Affine { weights, .. } => weights.len(),
            SmoothFn::Phi { phi, start } => start + phi.dim(),
            SmoothFn::Bilinear { i, j } => i.max(j) + 1,
            SmoothFn::Constant(_) | SmoothFn::Custom { .. } => 0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SmoothFn::Affine { weights, offset } => dot(weights, &x[..weights.len()]) + offset,
            SmoothFn::Phi { phi, start } => phi.evaluate(&x[*start..start + phi.dim()]),
            SmoothFn::Bilinear { i, j } => x[*i] * x[*j],
            SmoothFn::Constant(c) => *c,
            SmoothFn::Custom { eval, .. } => eval(x),
        }
    }

    /// Adds `scale · ∇f(x)` into `out`.
    pub fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            SmoothFn::Affine { weights, .. } => {
                for (o, w) in out.iter_mut().zip(weights) {
                    *o += scale * w;
                }
            }
            SmoothFn::Phi { phi, start } => {
                let b = *start..start + phi.dim();
                let g = phi.gradient(&x[b.clone()]);
                for (o, gi) in out[b].iter_mut().zip(&g) {
                    *o += scale * gi;
                }
            }
            SmoothFn::Bilinear { i, j } => {
                out[*i] += scale * x[*j];
                out[*j] += scale * x[*i];
            }
            SmoothFn::Constant(_) => {}
            SmoothFn::Custom { grad, .. } => {
                for (o, gi) in out.iter_mut().zip(grad(x)) {
                    *o += scale * gi;
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_gradient(x, 1.0, &mut g);
        g
    }
}

#[derive(Debug, Clone)]
pub enum Spatial {
    Smooth(SmoothFn),
    AbsNorm(Range<usize>),
    MaxOf(Vec<SmoothFn>),
}

impl Spatial {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Spatial::Smooth(_))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Spatial::Smooth(f) => f.value(x),
            Spatial::AbsNorm(b) => norm(&x[b.clone()]),
            Spatial::MaxOf(fs) => fs.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub coefficient: TimeExpr,
    pub spatial: Spatial,
    spec: Option<TermSpec>,
}

impl Term {
    pub fn new(coefficient: TimeExpr, spatial: Spatial) -> Self {
        Self { coefficient, spatial, spec: None }
    }

    pub fn from_spec(spec: &TermSpec) -> Result<Self> {
        let spatial = match &spec.spatial {
            SpatialSpec::Smooth { f } => Spatial::Smooth(SmoothFn::from_spec(f)?),
            SpatialSpec::AbsNorm { start, len } => {
                if *len == 0 {
                    return Err(Error::Precondition("abs_norm block must be nonempty".into()));
                }
                Spatial::AbsNorm(*start..start + len)
            }
            SpatialSpec::MaxOf { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::Precondition("max_of needs at least one piece".into()));
                }
                Spatial::MaxOf(pieces.iter().map(SmoothFn::from_spec).collect::<Result<_>>()?)
            }
        };
        Ok(Self { coefficient: spec.coefficient.clone(), spatial, spec: Some(spec.clone()) })
    }

    pub fn spec(&self) -> Option<&TermSpec> {
        self.spec.as_ref()
    }

    fn extent(&self) -> usize {
        match &self.spatial {
            Spatial::Smooth(f) => f.extent(),
            Spatial::AbsNorm(b) => b.end,
            Spatial::MaxOf(fs) => fs.iter().map(SmoothFn::extent).max().unwrap_or(0),
        }
    }
}

/// `F(t, x) = Σ_j a_j(t) f_j(x)` on `[0, T] × R^n`.
///
/// Nonsmooth terms (norms, maxima) are convex, and their coefficients are
/// checked to be nonnegative, so every `F(t, ·)` is regular and the sum rule
/// for Clarke gradients holds with equality.
#[derive(Debug, Clone)]
pub struct Potential {
    dim: usize,
    terms: Vec<Term>,
    horizon: f64,
}

impl Potential {
    pub fn new(dim: usize, terms: Vec<Term>, horizon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("potential dimension must be positive".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidPeriod(horizon));
        }
        for term in &terms {
            let extent = term.extent();
            if extent > dim {
                return Err(Error::DimensionMismatch { expected: dim, got: extent });
            }
        }
        for (j, term) in terms.iter().enumerate() {
            if term.spatial.is_smooth() {
                continue;
            }
            for k in 0..COEFFICIENT_CHECKS {
                let t = horizon * k as f64 / (COEFFICIENT_CHECKS - 1) as f64;
                let a = term.coefficient.eval(t);
                // non-finite values at isolated points are H3's business
                if a < 0.0 {
                    return Err(Error::NegativeNonsmoothCoefficient { term: j, t, value: a });
                }
            }
        }
        Ok(Self { dim, terms, horizon })
    }

    pub fn from_spec(spec: &PotentialSpec, horizon: f64) -> Result<Self> {
        let terms = spec.terms.iter().map(Term::from_spec).collect::<Result<Vec<_>>>()?;
        Self::new(spec.dim, terms, horizon)
    }

    /// `F ≡ 0`.
    pub fn zero(dim: usize, horizon: f64) -> Result<Self> {
        Self::new(dim, Vec::new(), horizon)
    }

    /// The descriptor this potential was built from, when every term has one.
    pub fn spec(&self) -> Option<PotentialSpec> {
        let terms = self.terms.iter().map(|t| t.spec().cloned()).collect::<Option<Vec<_>>>()?;
        Some(PotentialSpec { dim: self.dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Always true for potentials built here; see the type documentation.
    pub fn is_regular(&self) -> bool {
        true
    }

    pub fn is_smooth(&self) -> bool {
        self.terms.iter().all(|t| t.spatial.is_smooth())
    }

    pub fn is_autonomous(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_constant())
    }

    /// Time coefficients `a_j(t)` in term order.
    pub fn coefficients(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.coefficient.eval(t)).collect()
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.value_with(&self.coefficients(t), x)
    }

    /// `F(t, x)` from precomputed coefficients.
    pub fn value_with(&self, coefs: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .zip(coefs)
            .map(|(term, &a)| if a == 0.0 { 0.0 } else { a * term.spatial.value(x) })
            .sum()
    }

    /// The Clarke gradient `∂F(t, ·)(x)` as a structured set.
    pub fn subdiff(&self, t: f64, x: &[f64]) -> SubdiffSet {
        self.subdiff_with(&self.coefficients(t), x)
    }

    pub fn subdiff_with(&self, coefs: &[f64], x: &[f64]) -> SubdiffSet {
        debug_assert_eq!(x.len(), self.dim);
        let mut set = SubdiffSet::singleton(vec![0.0; self.dim]);
        for (term, &a) in self.terms.iter().zip(coefs) {
            if a == 0.0 {
                continue;
            }
            match &term.spatial {
                Spatial::Smooth(f) => f.add_gradient(x, a, &mut set.base),
                Spatial::AbsNorm(b) => {
                    let n = norm(&x[b.clone()]);
                    if n > 0.0 {
                        for i in b.clone() {
                            set.base[i] += a * x[i] / n;
                        }
                    } else {
                        set.balls.push(BlockBall { block: b.clone(), radius: a });
                    }
                }
                Spatial::MaxOf(fs) => {
                    let vals: Vec<f64> = fs.iter().map(|f| f.value(x)).collect();
                    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut verts: Vec<Vec<f64>> = Vec::new();
                    for (f, v) in fs.iter().zip(&vals) {
                        if *v >= top - ACTIVITY_TOL {
                            let g = crate::vecops::scaled(&f.gradient(x), a);
                            if !verts.contains(&g) {
                                verts.push(g);
                            }
                        }
                    }
                    if verts.len() == 1 {
                        for (s, g) in set.base.iter_mut().zip(&verts[0]) {
                            *s += g;
                        }
                    } else {
                        set.hulls.push(verts);
                    }
                }
            }
        }
        set
    }

    /// `F⁰(t, x; v)`, the support function of `∂F(t, x)` at `v`.
    pub fn dirderiv(&self, t: f64, x: &[f64], v: &[f64]) -> f64 {
        self.subdiff(t, x).support(v)
    }

    /// Value of the smoothed potential, with its gradient added into `grad`:
    /// norms become Huber functions with parameter `mu > 0` and maxima become
    /// `mu·log Σ exp(f_k/mu)`.
    pub fn smoothed(&self, t: f64, x: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        self.smoothed_with(&self.coefficients(t), x, mu, false, grad)
    }

    /// [`Potential::smoothed`] from precomputed coefficients, scaling the
    /// gradient contribution by `scale`. With `skip_norms` the norm terms are
    /// left out entirely (they are then handled by a proximal step).
    pub fn smoothed_with(
        &self,
        coefs: &[f64],
        x: &[f64],
        mu: f64,
        skip_norms: bool,
        grad: &mut [f64],
    ) -> f64 {
        self.smoothed_scaled(coefs, x, mu, skip_norms, 1.0, grad)
    }

    pub(crate) fn smoothed_scaled(
        &self,
        coefs: &[f64],
        x: &[f64],
        mu: f64,
        skip_norms: bool,
        scale: f64,
        grad: &mut [f64],
    ) -> f64 {
        let mut value = 0.0;
        for (term, &a) in self.terms.iter().zip(coefs) {
            if a == 0.0 {
                continue;
            }
            let sa = scale * a;
            match &term.spatial {
                Spatial::Smooth(f) => {
                    value += a * f.value(x);
                    f.add_gradient(x, sa, grad);
                }
                Spatial::AbsNorm(_) if skip_norms => {}
                Spatial::AbsNorm(b) => {
                    let n = norm(&x[b.clone()]);
                    if n >= mu {
                        value += a * (n - 0.5 * mu);
                        for i in b.clone() {
                            grad[i] += sa * x[i] / n;
                        }
                    } else {
                        value += a * n * n / (2.0 * mu);
                        for i in b.clone() {
                            grad[i] += sa * x[i] / mu;
                        }
                    }
                }
                Spatial::MaxOf(fs) => {
                    let vals: Vec<f64> = fs.iter().map(|f| f.value(x)).collect();
                    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if fs.len() == 1 {
                        value += a * top;
                        fs[0].add_gradient(x, sa, grad);
                        continue;
                    }
                    let weights: Vec<f64> = vals.iter().map(|v| ((v - top) / mu).exp()).collect();
                    let total: f64 = weights.iter().sum();
                    value += a * (top + mu * total.ln());
                    for (f, w) in fs.iter().zip(&weights) {
                        f.add_gradient(x, sa * w / total, grad);
                    }
                }
            }
        }
        value
    }

    /// Norm terms at time `t` as `(coefficient, block)` pairs.
    pub fn split_norm_terms(&self, t: f64) -> Vec<(f64, Range<usize>)> {
        self.terms
            .iter()
            .filter_map(|term| match &term.spatial {
                Spatial::AbsNorm(b) => Some((term.coefficient.eval(t), b.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn has_max_terms(&self) -> bool {
        self.terms.iter().any(|t| matches!(t.spatial, Spatial::MaxOf(_)))
    }

    /// `∫₀^T F(t, x) dt` by adaptive quadrature. Autonomous potentials are
    /// integrated exactly.
    pub fn time_integral(&self, x: &[f64], tol: f64) -> f64 {
        let mut total = 0.0;
        for term in &self.terms {
            let s = term.spatial.value(x);
            if s == 0.0 {
                continue;
            }
            let integral = if term.coefficient.is_constant() {
                term.coefficient.eval(0.0) * self.horizon
            } else {
                crate::quad::integrate(|t| term.coefficient.eval(t), 0.0, self.horizon, tol)
            };
            total += s * integral;
        }
        total
    }
}

/// `F⁰(t, x; v)` computed exactly from the set representation.
pub fn clarke_dirderiv(f: &Potential, t: f64, x: &[f64], v: &[f64]) -> f64 {
    f.dirderiv(t, x, v)
}

pub fn subdiff(f: &Potential, t: f64, x: &[f64]) -> SubdiffSet {
    f.subdiff(t, x)
}

/// Distance from `r` to `∂F(t, x)`.
pub fn subdiff_distance(f: &Potential, t: f64, x: &[f64], r: &[f64]) -> Result<f64> {
    f.subdiff(t, x).distance(r)
}
