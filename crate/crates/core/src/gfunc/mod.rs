//! G-function families: evaluation, gradients, Fenchel conjugation and the
//! growth/index probes built on top of them.

mod growth;
mod indices;
pub mod profile;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;
use crate::vecops::{dot, norm};

pub use growth::{delta2_report, order_llcurly, Delta2Constant, GrowthReport, OrderReport};
pub use indices::{
    lemma52_growth_probe, matuszewska_indices, GrowthTrend, IndexEstimate, MIN_TREND_STEPS,
};
pub use profile::RadialProfile;

use profile::{radial_sup, NumericConjugate};

/// Descriptor of a built-in family. This is what configuration files name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `|x|^p / p` on `R^dim`.
    Power { p: f64, dim: usize },
    /// `Σ_k |x_{B_k}|^{p_k} / p_k` over consecutive coordinate blocks.
    Block { exponents: Vec<f64>, dims: Vec<usize> },
    /// `∫₀^{|x|} s^{p-1}/log(s²+e) ds`.
    LogTempered { p: f64, dim: usize },
    /// `|x|^p / (q [log(|x|²+e)]^q)`, `q = p/(p-1)`, made convex near 0.
    LogDampedCompanion { p: f64, dim: usize },
    /// `factor · inner`.
    Scaled { factor: f64, inner: Box<FamilySpec> },
}

impl FamilySpec {
    pub fn dim(&self) -> usize {
        match self {
            FamilySpec::Power { dim, .. }
            | FamilySpec::LogTempered { dim, .. }
            | FamilySpec::LogDampedCompanion { dim, .. } => *dim,
            FamilySpec::Block { dims, .. } => dims.iter().sum(),
            FamilySpec::Scaled { inner, .. } => inner.dim(),
        }
    }
}

/// Coarse shape of a G-function, used to pick the conjugation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Radial,
    Block,
    General,
}

#[derive(Clone)]
struct Block {
    start: usize,
    len: usize,
    profile: Arc<dyn RadialProfile>,
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Structure {
    Blocks(Vec<Block>),
    General { eval: Arc<EvalFn>, grad: Arc<GradFn> },
}

/// A finite, even, convex integrand `φ : R^n → [0, ∞)` with `φ(0) = 0`.
#[derive(Clone)]
pub struct GFunction {
    dim: usize,
    structure: Structure,
    strictly_convex: bool,
    n_function: bool,
    analytic_conjugate: bool,
    label: String,
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("structure", &self.structure_kind())
            .finish()
    }
}

/// Builds a G-function from a family descriptor.
pub fn make_family(spec: &FamilySpec) -> Result<GFunction> {
    let (blocks, label) = blocks_for(spec)?;
    let dim = spec.dim();
    if dim == 0 {
        return Err(Error::InvalidFamily("dimension must be positive".into()));
    }
    let analytic = blocks.iter().all(|b| b.profile.analytic_conjugate().is_some());
    Ok(GFunction {
        dim,
        structure: Structure::Blocks(blocks),
        strictly_convex: true,
        n_function: true,
        analytic_conjugate: analytic,
        label,
    })
}

fn blocks_for(spec: &FamilySpec) -> Result<(Vec<Block>, String)> {
    let whole = |dim: usize, profile: Arc<dyn RadialProfile>| {
        let label = profile.label();
        (vec![Block { start: 0, len: dim, profile }], label)
    };
    Ok(match spec {
        FamilySpec::Power { p, dim } => whole(*dim, Arc::new(profile::Power::new(*p)?)),
        FamilySpec::LogTempered { p, dim } => whole(*dim, Arc::new(profile::LogTempered::new(*p)?)),
        FamilySpec::LogDampedCompanion { p, dim } => {
            whole(*dim, Arc::new(profile::LogDampedCompanion::new(*p)?))
        }
        FamilySpec::Block { exponents, dims } => {
            if exponents.len() != dims.len() || dims.is_empty() || dims.contains(&0) {
                return Err(Error::InvalidFamily(
                    "block family needs one positive dimension per exponent".into(),
                ));
            }
            let mut start = 0;
            let mut blocks = Vec::new();
            for (&p, &len) in exponents.iter().zip(dims) {
                blocks.push(Block { start, len, profile: Arc::new(profile::Power::new(p)?) });
                start += len;
            }
            let ps: Vec<String> = exponents.iter().map(|p| p.to_string()).collect();
            let ds: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
            (blocks, format!("block({}; {})", ps.join(","), ds.join(",")))
        }
        FamilySpec::Scaled { factor, inner } => {
            if !(*factor > 0.0) || !factor.is_finite() {
                return Err(Error::InvalidFamily(format!("scale factor {factor} must be positive")));
            }
            let (blocks, label) = blocks_for(inner)?;
            let blocks = blocks
                .into_iter()
                .map(|b| Block {
                    profile: Arc::new(profile::Scaled { factor: *factor, inner: b.profile }),
                    ..b
                })
                .collect();
            (blocks, format!("{factor}*{label}"))
        }
    })
}

/// Flags a caller asserts for a custom integrand.
#[derive(Debug, Clone, Copy, Default)]
pub struct CustomFlags {
    pub strictly_convex: bool,
    pub n_function: bool,
}

impl GFunction {
    /// Wraps user callables after sampling `φ(0) = 0`, evenness, convexity
    /// and `φ(λx) ≤ λφ(x)`; the first failing sample is returned as witness.
    pub fn custom<E, G>(dim: usize, eval: E, grad: G, flags: CustomFlags) -> Result<Self>
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidFamily("dimension must be positive".into()));
        }
        let phi = GFunction {
            dim,
            structure: Structure::General { eval: Arc::new(eval), grad: Arc::new(grad) },
            strictly_convex: flags.strictly_convex,
            n_function: flags.n_function,
            analytic_conjugate: false,
            label: "custom".into(),
        };
        phi.check_invariants(sampling::DEFAULT_SEED)?;
        Ok(phi)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    pub fn is_n_function(&self) -> bool {
        self.n_function
    }

    pub fn has_analytic_conjugate(&self) -> bool {
        self.analytic_conjugate
    }

    pub fn structure_kind(&self) -> StructureKind {
        match &self.structure {
            Structure::Blocks(b) if b.len() == 1 => StructureKind::Radial,
            Structure::Blocks(_) => StructureKind::Block,
            Structure::General { .. } => StructureKind::General,
        }
    }

    /// Coordinate ranges of the blocks (a single range for radial families).
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        match &self.structure {
            Structure::Blocks(b) => b.iter().map(|b| b.start..b.start + b.len).collect(),
            Structure::General { .. } => vec![0..self.dim],
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.structure {
            Structure::Blocks(blocks) => blocks
                .iter()
                .map(|b| b.profile.value(norm(&x[b.start..b.start + b.len])))
                .sum(),
            Structure::General { eval, .. } => eval(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.structure {
            Structure::Blocks(blocks) => {
                for b in blocks {
                    let xb = &x[b.start..b.start + b.len];
                    let r = norm(xb);
                    let ob = &mut out[b.start..b.start + b.len];
                    if r == 0.0 {
                        ob.iter_mut().for_each(|v| *v = 0.0);
                    } else {
                        let s = b.profile.derivative(r) / r;
                        for (o, xi) in ob.iter_mut().zip(xb) {
                            *o = s * xi;
                        }
                    }
                }
            }
            Structure::General { grad, .. } => out.copy_from_slice(&grad(x)),
        }
    }

    /// `φ*(ξ)`, using the closed form when the family has one. Divergent
    /// suprema are reported as `f64::INFINITY`.
    pub fn conjugate(&self, xi: &[f64]) -> f64 {
        self.conjugate_impl(xi, true)
    }

    /// `φ*(ξ)` computed by maximization even when a closed form exists.
    pub fn conjugate_numeric(&self, xi: &[f64]) -> f64 {
        self.conjugate_impl(xi, false)
    }

    fn conjugate_impl(&self, xi: &[f64], allow_analytic: bool) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        match &self.structure {
            Structure::Blocks(blocks) => blocks
                .iter()
                .map(|b| {
                    let r = norm(&xi[b.start..b.start + b.len]);
                    match b.profile.analytic_conjugate().filter(|_| allow_analytic) {
                        Some(c) => c.value(r),
                        None => radial_sup(b.profile.as_ref(), r).value,
                    }
                })
                .sum(),
            Structure::General { .. } => general_conjugate(self, xi),
        }
    }

    /// The conjugate `φ*` as a G-function in its own right. Closed forms are
    /// used where available; otherwise each block profile is conjugated
    /// numerically. General integrands are conjugated by gradient ascent.
    pub fn conjugate_function(&self) -> GFunction {
        match &self.structure {
            Structure::Blocks(blocks) => {
                let blocks: Vec<Block> = blocks
                    .iter()
                    .map(|b| Block {
                        profile: b.profile.analytic_conjugate().unwrap_or_else(|| {
                            Arc::new(NumericConjugate { inner: b.profile.clone() })
                        }),
                        ..b.clone()
                    })
                    .collect();
                let analytic =
                    blocks.iter().all(|b| b.profile.analytic_conjugate().is_some());
                GFunction {
                    dim: self.dim,
                    structure: Structure::Blocks(blocks),
                    strictly_convex: self.strictly_convex,
                    n_function: self.n_function,
                    analytic_conjugate: analytic,
                    label: format!("conj[{}]", self.label),
                }
            }
            Structure::General { .. } => {
                let inner = self.clone();
                let inner2 = self.clone();
                GFunction {
                    dim: self.dim,
                    structure: Structure::General {
                        eval: Arc::new(move |xi: &[f64]| general_conjugate(&inner, xi)),
                        grad: Arc::new(move |xi: &[f64]| general_conjugate_argmax(&inner2, xi).1),
                    },
                    strictly_convex: self.strictly_convex,
                    n_function: self.n_function,
                    analytic_conjugate: false,
                    label: format!("conj[{}]", self.label),
                }
            }
        }
    }

    /// Samples the G-function axioms on a fixed-seed grid and returns the
    /// first violation found.
    pub fn check_invariants(&self, seed: u64) -> Result<()> {
        let zero = vec![0.0; self.dim];
        let f0 = self.evaluate(&zero);
        if f0.abs() > 1e-12 {
            return Err(Error::NotAGFunction { property: "phi(0) = 0", witness: zero });
        }
        let mut rng = sampling::rng(seed);
        for &radius in &[0.1, 1.0, 10.0] {
            for _ in 0..64 {
                let x = sampling::ball_point(&mut rng, self.dim, radius);
                let y = sampling::ball_point(&mut rng, self.dim, radius);
                let fx = self.evaluate(&x);
                let fy = self.evaluate(&y);
                let tol = 1e-9 * fx.abs().max(fy.abs()).max(1.0);
                if !fx.is_finite() || fx < -tol {
                    return Err(Error::NotAGFunction { property: "nonnegativity", witness: x });
                }
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                if (self.evaluate(&neg) - fx).abs() > tol {
                    return Err(Error::NotAGFunction { property: "evenness", witness: x });
                }
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                if self.evaluate(&mid) > 0.5 * (fx + fy) + tol {
                    return Err(Error::NotAGFunction { property: "convexity", witness: mid });
                }
                for lambda in [0.25, 0.5, 0.75] {
                    let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
                    if self.evaluate(&lx) > lambda * fx + tol {
                        return Err(Error::NotAGFunction {
                            property: "phi(lambda x) <= lambda phi(x)",
                            witness: x,
                        });
                    }
                }
            }
        }
        if self.n_function {
            self.check_n_function_ratios()?;
        }
        Ok(())
    }

    /// `φ(x)/|x|` must shrink toward 0 at small radii and grow at large ones.
    fn check_n_function_ratios(&self) -> Result<()> {
        for dir in sampling::directions(self.dim, 2 * self.dim + 2, sampling::DEFAULT_SEED) {
            let ratio = |r: f64| self.evaluate(&dir.iter().map(|d| d * r).collect::<Vec<_>>()) / r;
            let small = [1e-2, 1e-4, 1e-6].map(ratio);
            let large = [1e2, 1e4, 1e6].map(ratio);
            let shrinking = small.windows(2).all(|w| w[1] <= w[0]) && small[2] < 1e-2;
            let growing = large.windows(2).all(|w| w[1] >= w[0]) && large[2] > 1e2;
            if !shrinking || !growing {
                return Err(Error::NotAGFunction { property: "N-function limits", witness: dir });
            }
        }
        Ok(())
    }
}

const GENERAL_CONJ_MAX_ITER: usize = 500;
const GENERAL_CONJ_DIVERGENCE: f64 = 1e12;

fn general_conjugate(phi: &GFunction, xi: &[f64]) -> f64 {
    general_conjugate_argmax(phi, xi).0
}

/// Gradient ascent on the concave map `x ↦ ⟨ξ,x⟩ − φ(x)` from the origin
/// with Armijo backtracking.
fn general_conjugate_argmax(phi: &GFunction, xi: &[f64]) -> (f64, Vec<f64>) {
    let n = phi.dim;
    let mut x = vec![0.0; n];
    if norm(xi) == 0.0 {
        return (0.0, x);
    }
    let objective = |x: &[f64]| dot(xi, x) - phi.evaluate(x);
    let mut val = 0.0;
    let mut step = 1.0;
    for _ in 0..GENERAL_CONJ_MAX_ITER {
        let g: Vec<f64> = xi.iter().zip(phi.gradient(&x)).map(|(a, b)| a - b).collect();
        let gn2 = dot(&g, &g);
        if gn2.sqrt() <= 1e-12 * (1.0 + norm(xi)) {
            break;
        }
        step *= 2.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let tv = objective(&trial);
            if tv >= val + 0.25 * step * gn2 {
                x = trial;
                val = tv;
                break;
            }
            step *= 0.5;
            if step < 1e-30 {
                return (val.max(0.0), x);
            }
        }
        if norm(&x) > GENERAL_CONJ_DIVERGENCE {
            return (f64::INFINITY, x);
        }
    }
    (val.max(0.0), x)
}

/// `φ(x) + φ*(ξ) − ⟨ξ, x⟩`, nonnegative by the Fenchel inequality.
pub fn fenchel_young_gap(phi: &GFunction, x: &[f64], xi: &[f64]) -> f64 {
    let c = phi.conjugate(xi);
    if c.is_infinite() {
        return f64::INFINITY;
    }
    phi.evaluate(x) + c - dot(xi, x)
}

/// The two slacks in `φ*(∇φ(x)) ≤ ⟨∇φ(x), x⟩ ≤ φ(2x)`, returned as
/// `(φ(2x) − ⟨∇φ(x),x⟩, ⟨∇φ(x),x⟩ − φ*(∇φ(x)))`.
pub fn gradient_conjugate_bound_check(phi: &GFunction, x: &[f64]) -> (f64, f64) {
    let g = phi.gradient(x);
    let pairing = dot(&g, x);
    let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    (phi.evaluate(&doubled) - pairing, pairing - phi.conjugate(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(p: f64, dim: usize) -> GFunction {
        make_family(&FamilySpec::Power { p, dim }).unwrap()
    }

    #[test]
    fn family_examples() {
        assert_eq!(power(2.0, 2).evaluate(&[3.0, 4.0]), 12.5);
        let b = make_family(&FamilySpec::Block { exponents: vec![2.0, 4.0], dims: vec![1, 1] })
            .unwrap();
        assert_eq!(b.evaluate(&[1.0, 0.0]), 0.5);
        assert_eq!(b.evaluate(&[0.0, 1.0]), 0.25);
        assert_eq!(b.structure_kind(), StructureKind::Block);
        let lt = make_family(&FamilySpec::LogTempered { p: 3.0, dim: 1 }).unwrap();
        assert_eq!(lt.evaluate(&[0.0]), 0.0);
    }

    #[test]
    fn rejects_non_n_function_exponent() {
        assert!(matches!(
            make_family(&FamilySpec::Power { p: 1.0, dim: 1 }),
            Err(Error::ExponentTooSmall(_))
        ));
    }

    #[test]
    fn conjugate_examples() {
        assert!((power(2.0, 2).conjugate(&[1.0, 2.0]) - 2.5).abs() < 1e-12);
        let p3 = power(3.0, 1);
        assert!((p3.conjugate_numeric(&[1.0]) - 2.0 / 3.0).abs() < 1e-10);
        for phi in [p3.clone(), power(1.5, 3)] {
            let zero = vec![0.0; phi.dim()];
            assert_eq!(phi.conjugate(&zero), 0.0);
            assert_eq!(phi.conjugate_numeric(&zero), 0.0);
        }
    }

    #[test]
    fn fenchel_examples() {
        let p2 = power(2.0, 1);
        assert!(fenchel_young_gap(&p2, &[1.0], &[1.0]).abs() < 1e-15);
        assert!((fenchel_young_gap(&p2, &[1.0], &[0.0]) - 0.5).abs() < 1e-15);
        let lt = make_family(&FamilySpec::LogTempered { p: 3.0, dim: 1 }).unwrap();
        let g = lt.gradient(&[2.0]);
        assert!(fenchel_young_gap(&lt, &[2.0], &g).abs() < 1e-7);
    }

    #[test]
    fn gradient_bound_examples() {
        let (a, b) = gradient_conjugate_bound_check(&power(2.0, 1), &[1.0]);
        assert!((a - 1.0).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a, b) = gradient_conjugate_bound_check(&power(3.0, 2), &[0.0, 0.0]);
        assert_eq!((a, b), (0.0, 0.0));
        let lt = make_family(&FamilySpec::LogTempered { p: 3.0, dim: 1 }).unwrap();
        for x in [0.5, 1.0, 5.0, 40.0] {
            let (a, b) = gradient_conjugate_bound_check(&lt, &[x]);
            assert!(a >= -1e-7 && b >= -1e-7, "x={x}: {a} {b}");
        }
    }

    #[test]
    fn custom_rejects_nonconvex_and_odd() {
        let nonconvex = GFunction::custom(
            1,
            |x| x[0].abs().sqrt(),
            |x| vec![0.5 * x[0].signum() / x[0].abs().sqrt().max(1e-300)],
            CustomFlags::default(),
        );
        assert!(matches!(nonconvex, Err(Error::NotAGFunction { .. })));
        let odd = GFunction::custom(1, |x| x[0] + x[0] * x[0], |x| vec![1.0 + 2.0 * x[0]], CustomFlags::default());
        assert!(matches!(odd, Err(Error::NotAGFunction { property: "evenness", .. })));
    }

    #[test]
    fn custom_general_conjugate_matches_closed_form() {
        let q = GFunction::custom(
            2,
            |x| 0.5 * (x[0] * x[0] + x[1] * x[1]),
            |x| x.to_vec(),
            CustomFlags { strictly_convex: true, n_function: true },
        )
        .unwrap();
        assert!((q.conjugate(&[1.0, 2.0]) - 2.5).abs() < 1e-8);
        assert_eq!(q.structure_kind(), StructureKind::General);
    }

    #[test]
    fn general_conjugate_reports_divergence() {
        // |x| has conjugate +inf outside the unit ball; use a smoothed version
        let lin = GFunction::custom(
            1,
            |x| (1.0 + x[0] * x[0]).sqrt() - 1.0,
            |x| vec![x[0] / (1.0 + x[0] * x[0]).sqrt()],
            CustomFlags::default(),
        )
        .unwrap();
        assert!(lin.conjugate(&[2.0]).is_infinite());
        assert!(fenchel_young_gap(&lin, &[1.0], &[2.0]).is_infinite());
    }
}
