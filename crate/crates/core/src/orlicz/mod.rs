//! Periodic grid trajectories and discrete Orlicz-space numerics.
//!
//! All integrals use the left-endpoint rule `h Σ_i f(t_i)` and derivatives
//! are forward differences with periodic wraparound, so the discrete
//! integration-by-parts identity holds exactly.

mod csv_io;
mod inequalities;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunc::GFunction;

pub use csv_io::{read_trajectory_csv, write_trajectory_csv};
pub use inequalities::{
    amemiya_bound_gap, holder_gap, sobolev_norms, wirtinger_gap, SobolevNorms, WirtingerGap,
};

pub const MIN_NODES: usize = 4;

/// Values `u_0..u_{N-1} ∈ R^n` at `t_i = iT/N`, with `u_N ≡ u_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    period: f64,
    dim: usize,
    /// Row-major `N × n`.
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(period: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidPeriod(period));
        }
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: values.len() });
        }
        let nodes = values.len() / dim;
        if nodes < MIN_NODES {
            return Err(Error::TooFewNodes(nodes));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: pos / dim });
        }
        Ok(Self { period, dim, values })
    }

    pub fn from_fn<F: FnMut(f64) -> Vec<f64>>(period: f64, nodes: usize, dim: usize, mut f: F) -> Result<Self> {
        let h = period / nodes as f64;
        let mut values = Vec::with_capacity(nodes * dim);
        for i in 0..nodes {
            let v = f(i as f64 * h);
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            values.extend(v);
        }
        Self::new(period, dim, values)
    }

    pub fn constant(period: f64, nodes: usize, c: &[f64]) -> Result<Self> {
        Self::from_fn(period, nodes, c.len(), |_| c.to_vec())
    }

    pub fn zeros(period: f64, nodes: usize, dim: usize) -> Result<Self> {
        Self::new(period, dim, vec![0.0; nodes * dim])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    /// Grid spacing `h = T/N`.
    pub fn step(&self) -> f64 {
        self.period / self.nodes() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Forward differences `u'_i = (u_{i+1 mod N} − u_i)/h`.
    pub fn derivative(&self) -> Trajectory {
        let n = self.nodes();
        let h = self.step();
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..n {
            let next = self.node((i + 1) % n);
            values.extend(next.iter().zip(self.node(i)).map(|(a, b)| (a - b) / h));
        }
        Trajectory { period: self.period, dim: self.dim, values }
    }

    pub fn scaled(&self, s: f64) -> Trajectory {
        Trajectory { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn plus(&self, other: &Trajectory) -> Trajectory {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Trajectory { values, ..self.clone() }
    }

    /// Same values on a time grid rotated by `k` nodes: `v_i = u_{i+k}`.
    pub fn rotated(&self, k: usize) -> Trajectory {
        let n = self.nodes();
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..n {
            values.extend_from_slice(self.node((i + k) % n));
        }
        Trajectory { values, ..self.clone() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.iter().map(crate::vecops::norm).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// `u = ū + ũ` with `ū` the time average.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub mean: Vec<f64>,
    pub oscillation: Trajectory,
}

/// Splits off the mean `ū = (h/T) Σ u_i`.
pub fn decompose(u: &Trajectory) -> Decomposition {
    let n = u.nodes();
    let mut mean = vec![0.0; u.dim()];
    for x in u.iter() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut osc = u.clone();
    for i in 0..n {
        for (o, m) in osc.node_mut(i).iter_mut().zip(&mean) {
            *o -= m;
        }
    }
    Decomposition { mean, oscillation: osc }
}

/// `ρ_φ(u) = h Σ φ(u_i)`.
pub fn modular(phi: &GFunction, u: &Trajectory) -> f64 {
    assert_eq!(phi.dim(), u.dim(), "modular: dimension mismatch");
    u.step() * u.iter().map(|x| phi.evaluate(x)).sum::<f64>()
}

/// How the Luxemburg bisection ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    Converged,
    /// Bracket halved 60 times without leaving the unit modular ball.
    DeclaredZero,
    /// Bracket doubled 60 times without entering it.
    DeclaredInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormDiagnostic {
    pub value: f64,
    pub status: NormStatus,
    pub bracket_steps: usize,
    pub bisection_steps: usize,
}

const LUX_BRACKET_LIMIT: usize = 60;
const LUX_REL_TOL: f64 = 1e-12;

/// `inf { λ > 0 : ρ_φ(u/λ) ≤ 1 }` with diagnostics.
///
/// The bracket starts at `λ = 1` and is doubled or halved at most 60 times,
/// then bisected. The upper end is returned so that `ρ_φ(u/‖u‖) ≤ 1`.
pub fn luxemburg_norm_detailed(phi: &GFunction, u: &Trajectory) -> NormDiagnostic {
    if u.is_zero() {
        return NormDiagnostic { value: 0.0, status: NormStatus::Converged, bracket_steps: 0, bisection_steps: 0 };
    }
    let within = |lambda: f64| modular(phi, &u.scaled(1.0 / lambda)) <= 1.0;
    let (mut lo, mut hi);
    let mut bracket_steps = 0;
    if within(1.0) {
        hi = 1.0;
        lo = 0.5;
        while within(lo) {
            hi = lo;
            lo *= 0.5;
            bracket_steps += 1;
            if bracket_steps >= LUX_BRACKET_LIMIT {
                return NormDiagnostic { value: 0.0, status: NormStatus::DeclaredZero, bracket_steps, bisection_steps: 0 };
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while !within(hi) {
            lo = hi;
            hi *= 2.0;
            bracket_steps += 1;
            if bracket_steps >= LUX_BRACKET_LIMIT {
                return NormDiagnostic {
                    value: f64::INFINITY,
                    status: NormStatus::DeclaredInfinite,
                    bracket_steps,
                    bisection_steps: 0,
                };
            }
        }
    }
    let mut bisection_steps = 0;
    while hi - lo > LUX_REL_TOL * hi && bisection_steps < 200 {
        let mid = 0.5 * (lo + hi);
        if within(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        bisection_steps += 1;
    }
    NormDiagnostic { value: hi, status: NormStatus::Converged, bracket_steps, bisection_steps }
}

/// Luxemburg norm `‖u‖_{L^φ}`.
pub fn luxemburg_norm(phi: &GFunction, u: &Trajectory) -> f64 {
    luxemburg_norm_detailed(phi, u).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunc::{make_family, FamilySpec};
    use std::f64::consts::{PI, TAU};

    fn power(p: f64) -> GFunction {
        make_family(&FamilySpec::Power { p, dim: 1 }).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(Trajectory::zeros(1.0, 3, 1), Err(Error::TooFewNodes(3)));
        assert_eq!(Trajectory::zeros(0.0, 8, 1), Err(Error::InvalidPeriod(0.0)));
        assert!(matches!(
            Trajectory::new(1.0, 1, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { node: 1 })
        ));
    }

    #[test]
    fn derivative_telescopes() {
        let u = Trajectory::from_fn(3.0, 17, 2, |t| vec![t * t, (5.0 * t).sin()]).unwrap();
        let d = u.derivative();
        for k in 0..2 {
            let s: f64 = d.iter().map(|x| x[k] * d.step()).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn modular_examples() {
        let p2 = power(2.0);
        assert_eq!(modular(&p2, &Trajectory::zeros(1.0, 8, 1).unwrap()), 0.0);
        let c = Trajectory::constant(1.0, 8, &[3.0]).unwrap();
        assert!((modular(&p2, &c) - 4.5).abs() < 1e-14);
        // analytic: ∫₀^{2π} sin²(t)/2 dt = π/2
        let s = Trajectory::from_fn(TAU, 512, 1, |t| vec![t.sin()]).unwrap();
        assert!((modular(&p2, &s) - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn luxemburg_examples() {
        assert_eq!(luxemburg_norm(&power(2.0), &Trajectory::zeros(1.0, 8, 1).unwrap()), 0.0);
        for (p, t, c) in [(2.0, 1.0, 1.0), (3.0, 2.5, -4.0), (1.5, 0.3, 1e-4), (5.0, 7.0, 1e5)] {
            let u = Trajectory::constant(t, 8, &[c]).unwrap();
            let expect = c.abs() * (t / p).powf(1.0 / p);
            let got = luxemburg_norm(&power(p), &u);
            assert!((got / expect - 1.0).abs() < 1e-10, "p={p}: {got} vs {expect}");
        }
        let u = Trajectory::from_fn(1.0, 32, 1, |t| vec![(TAU * t).cos() + 0.3]).unwrap();
        let phi = power(3.0);
        let n1 = luxemburg_norm(&phi, &u);
        let n2 = luxemburg_norm(&phi, &u.scaled(2.0));
        assert!((n2 - 2.0 * n1).abs() <= 1e-9 * n1);
    }

    #[test]
    fn luxemburg_saturates_with_diagnostic() {
        let u = Trajectory::constant(1.0, 8, &[1e-30]).unwrap();
        let d = luxemburg_norm_detailed(&power(2.0), &u);
        assert_eq!(d.status, NormStatus::DeclaredZero);
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn decompose_examples() {
        let c = decompose(&Trajectory::constant(2.0, 8, &[1.5, -2.0]).unwrap());
        assert_eq!(c.mean, vec![1.5, -2.0]);
        assert!(c.oscillation.is_zero());
        let s = decompose(&Trajectory::from_fn(TAU, 64, 1, |t| vec![t.sin()]).unwrap());
        assert!(s.mean[0].abs() < 1e-12);
        let s3 = decompose(&Trajectory::from_fn(TAU, 64, 1, |t| vec![3.0 + t.sin()]).unwrap());
        assert!((s3.mean[0] - 3.0).abs() < 1e-12);
        for i in 0..64 {
            assert!((s3.oscillation.node(i)[0] - (i as f64 * TAU / 64.0).sin()).abs() < 1e-12);
        }
    }
}
