//! Sampled Δ₂/∇₂ and `≪` probes. Every result is a falsifier on a
//! deterministic sample, never a proof.

use serde::{Deserialize, Serialize};

use super::GFunction;
use crate::sampling;

/// Doubling constant estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta2Constant {
    Finite(f64),
    Unbounded,
}

impl Delta2Constant {
    pub fn is_finite(&self) -> bool {
        matches!(self, Delta2Constant::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub delta2_constant: Delta2Constant,
    /// `(l, C)` with `φ(x) ≤ (r/l) φ(l x) + C` for `r = 1/2` on the sample.
    pub nabla2_pair: Option<(f64, f64)>,
    pub sample_radius: f64,
    /// Sample point attaining the reported doubling constant.
    pub witness: Vec<f64>,
    /// Doubling constants over the nested radii `R/16, R/8, R/4, R/2, R`.
    pub radius_trend: Vec<(f64, f64)>,
}

const NABLA2_R: f64 = 0.5;
const NABLA2_MAX_DOUBLINGS: u32 = 20;

/// Sample points `r·d` for log-spaced radii `r ≤ radius` and unit directions.
fn sample_points(dim: usize, radius: f64, samples: usize) -> Vec<Vec<f64>> {
    let dirs = sampling::directions(dim, (2 * dim + 2).max(8), sampling::DEFAULT_SEED);
    let per_dir = (samples / dirs.len()).max(8);
    let lo = (radius * 1e-3).min(1e-3);
    let radii = sampling::log_space(lo, radius, per_dir);
    let mut pts = Vec::with_capacity(radii.len() * dirs.len());
    for r in &radii {
        for d in &dirs {
            pts.push(d.iter().map(|v| v * r).collect());
        }
    }
    pts
}

fn max_doubling_ratio(phi: &GFunction, pts: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut best = (1.0, pts[0].clone());
    for x in pts {
        let fx = phi.evaluate(x);
        if fx <= 0.0 {
            continue;
        }
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let ratio = (phi.evaluate(&doubled) - 1.0) / fx;
        if !(ratio <= best.0) {
            best = (if ratio.is_nan() { f64::INFINITY } else { ratio }, x.clone());
        }
    }
    best
}

/// Estimates the constant of `φ(2x) ≤ Cφ(x) + 1` and a `∇₂` pair.
///
/// The doubling constant is the largest `(φ(2x) − 1)/φ(x)` on the sample,
/// clipped below at 1. It is recomputed on the nested radii `R·2^{-k}`,
/// `k = 0..4`; a strictly increasing trend that more than doubles, or a
/// non-finite value, is reported as unbounded.
pub fn delta2_report(phi: &GFunction, radius: f64, samples: usize) -> GrowthReport {
    let samples = samples.max(100);
    let mut trend = Vec::new();
    let mut top = (1.0, vec![0.0; phi.dim()]);
    for k in (0..5).rev() {
        let r = radius / f64::powi(2.0, k);
        let pts = sample_points(phi.dim(), r, samples);
        let (c, w) = max_doubling_ratio(phi, &pts);
        trend.push((r, c));
        if k == 0 {
            top = (c, w);
        }
    }
    let increasing = trend.windows(2).all(|w| w[1].1 > w[0].1 * (1.0 + 1e-12));
    let unbounded = !top.0.is_finite() || (increasing && trend[4].1 > 2.0 * trend[0].1);
    let delta2_constant = if unbounded {
        Delta2Constant::Unbounded
    } else {
        Delta2Constant::Finite(top.0)
    };

    let pts = sample_points(phi.dim(), radius, samples);
    let outer: Vec<&Vec<f64>> = {
        let cut = radius * 1e-2;
        pts.iter().filter(|x| crate::vecops::norm(x) >= cut).collect()
    };
    let mut nabla2_pair = None;
    for k in 1..=NABLA2_MAX_DOUBLINGS {
        let l = f64::powi(2.0, k as i32);
        let slack = |x: &Vec<f64>| {
            let lx: Vec<f64> = x.iter().map(|v| l * v).collect();
            phi.evaluate(x) - NABLA2_R / l * phi.evaluate(&lx)
        };
        if outer.iter().all(|x| slack(x) <= 1e-12 * phi.evaluate(x).max(1.0)) {
            let c = pts.iter().map(slack).fold(0.0_f64, f64::max);
            nabla2_pair = Some((l, c));
            break;
        }
    }
    GrowthReport {
        delta2_constant,
        nabla2_pair,
        sample_radius: radius,
        witness: top.1,
        radius_trend: trend,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub holds: bool,
    /// Per `k`: the smallest sampled `R` beyond which `φ₀(x) ≤ φ₁(kx)`, if any.
    pub thresholds: Vec<(f64, Option<f64>)>,
    /// First failing `(k, x)`.
    pub witness: Option<(f64, Vec<f64>)>,
}

/// Probes `φ₀ ≪ φ₁`: for every `k` in `k_grid` there must be a sampled
/// `R ≤ radius/10` with `φ₀(x) ≤ φ₁(kx)` at every sample with `|x| > R`.
pub fn order_llcurly(phi0: &GFunction, phi1: &GFunction, k_grid: &[f64], radius: f64) -> OrderReport {
    assert_eq!(phi0.dim(), phi1.dim(), "order_llcurly needs equal dimensions");
    let dim = phi0.dim();
    let dirs = sampling::directions(dim, (2 * dim + 2).max(16), sampling::DEFAULT_SEED);
    let radii = sampling::log_space(1e-3, radius, 400);
    let mut thresholds = Vec::new();
    let mut witness = None;
    for &k in k_grid {
        // index of the last radius with a violation
        let mut last_bad: Option<(usize, Vec<f64>)> = None;
        for (i, r) in radii.iter().enumerate() {
            for d in &dirs {
                let x: Vec<f64> = d.iter().map(|v| v * r).collect();
                let kx: Vec<f64> = x.iter().map(|v| k * v).collect();
                if phi0.evaluate(&x) > phi1.evaluate(&kx) {
                    last_bad = Some((i, x));
                    break;
                }
            }
        }
        let threshold = match &last_bad {
            None => Some(0.0),
            Some((i, _)) if radii[*i] <= radius / 10.0 => Some(radii[*i]),
            Some(_) => None,
        };
        if threshold.is_none() && witness.is_none() {
            witness = last_bad.map(|(_, x)| (k, x));
        }
        thresholds.push((k, threshold));
    }
    OrderReport { holds: thresholds.iter().all(|(_, t)| t.is_some()), thresholds, witness }
}
