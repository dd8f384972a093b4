//! Slacks of the classical Orlicz-space inequalities on discrete trajectories.

use serde::{Deserialize, Serialize};

use super::{decompose, luxemburg_norm, modular, Trajectory};
use crate::error::{Error, Result};
use crate::gfunc::GFunction;
use crate::vecops::{dot, norm};

/// `ρ_φ(u) + 1 − ‖u‖_φ`.
pub fn amemiya_bound_gap(phi: &GFunction, u: &Trajectory) -> f64 {
    modular(phi, u) + 1.0 - luxemburg_norm(phi, u)
}

/// `2‖u‖_φ ‖v‖_{φ*} − h Σ ⟨v_i, u_i⟩`. The conjugate norm uses `φ*` as the
/// integrand (numeric when no closed form exists).
pub fn holder_gap(phi: &GFunction, u: &Trajectory, v: &Trajectory) -> Result<f64> {
    if u.nodes() != v.nodes() || u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.as_slice().len(), got: v.as_slice().len() });
    }
    let conj = phi.conjugate_function();
    if let Some(x) = v.iter().find(|x| conj.evaluate(x).is_infinite()) {
        return Err(Error::InfiniteConjugate(x.to_vec()));
    }
    let pairing: f64 = u.step() * u.iter().zip(v.iter()).map(|(a, b)| dot(a, b)).sum::<f64>();
    let nu = luxemburg_norm(phi, u);
    let nv = luxemburg_norm(&conj, v);
    let bound = if nu == 0.0 || nv == 0.0 { 0.0 } else { 2.0 * nu * nv };
    Ok(bound - pairing)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerGap {
    /// `min_i [(1/T) h Σ_r φ(T u'_r) − φ(ũ_i)]`.
    pub gap: f64,
    /// Node attaining the minimum.
    pub node: usize,
    /// `ε_h = max_i |φ(ũ_{i+1}) − φ(ũ_i)|`, the one-cell variation of `φ(ũ)`.
    pub slack: f64,
}

/// Pointwise Wirtinger-type slack `(1/T)∫φ(T u') − φ(ũ(t))`, minimized over nodes.
pub fn wirtinger_gap(phi: &GFunction, u: &Trajectory) -> WirtingerGap {
    let t = u.period();
    let du = u.derivative();
    let rhs = du.step() * du.iter().map(|x| phi.evaluate(&crate::vecops::scaled(x, t))).sum::<f64>() / t;
    let osc = decompose(u).oscillation;
    let vals: Vec<f64> = osc.iter().map(|x| phi.evaluate(x)).collect();
    let (node, lhs) = vals
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let n = vals.len();
    let slack = (0..n).map(|i| (vals[(i + 1) % n] - vals[i]).abs()).fold(0.0, f64::max);
    WirtingerGap { gap: rhs - lhs, node, slack }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorms {
    /// `‖u‖_φ + ‖u'‖_φ`.
    pub standard: f64,
    /// `|ū| + ‖u'‖_φ`.
    pub equivalent: f64,
    /// `standard / equivalent` (1 when both vanish).
    pub ratio: f64,
}

pub fn sobolev_norms(phi: &GFunction, u: &Trajectory) -> SobolevNorms {
    let nd = luxemburg_norm(phi, &u.derivative());
    let standard = luxemburg_norm(phi, u) + nd;
    let equivalent = norm(&decompose(u).mean) + nd;
    let ratio = if equivalent == 0.0 && standard == 0.0 { 1.0 } else { standard / equivalent };
    SobolevNorms { standard, equivalent, ratio }
}
