//! Matuszewska–Orlicz index estimation and the modular growth probe.

use serde::{Deserialize, Serialize};

use super::GFunction;
use crate::error::{Error, Result};
use crate::orlicz::{luxemburg_norm, modular, Trajectory};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub lambda_grid: Vec<f64>,
    /// Larger of the two RMS residuals of the log-log slope fits.
    pub fit_residual: f64,
    /// Set when `fit_residual > 0.1`.
    pub degenerate: bool,
}

const FIT_POINTS: usize = 7;
const DEGENERATE_RESIDUAL: f64 = 0.1;

/// `M(λ) = sup_{u ≠ 0} φ(λu)/φ(u)` over log-spaced radii in `[1e-3, 1e3]`
/// and sampled directions.
fn scaled_sup(phi: &GFunction, lambda: f64, probes: &[Vec<f64>]) -> f64 {
    probes
        .iter()
        .filter_map(|u| {
            let fu = phi.evaluate(u);
            (fu > 0.0).then(|| {
                let lu: Vec<f64> = u.iter().map(|v| lambda * v).collect();
                phi.evaluate(&lu) / fu
            })
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `y` against `x` and the RMS residual.
fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (my + slope * (a - mx));
            e * e
        })
        .sum();
    (slope, (rss / n).sqrt())
}

/// Estimates `α_φ` from the slope of `ln M(λ)` against `ln λ` on
/// `λ ∈ [1e-6, 1e-3]`, and `β_φ` on `λ ∈ [1e3, 1e6]`.
pub fn matuszewska_indices(phi: &GFunction) -> Result<IndexEstimate> {
    if !phi.is_n_function() {
        return Err(Error::Precondition(format!("{} is not flagged as an N-function", phi.label())));
    }
    let dirs = sampling::directions(phi.dim(), (2 * phi.dim() + 2).max(16), sampling::DEFAULT_SEED);
    let mut probes = Vec::new();
    for r in sampling::log_space(1e-3, 1e3, 61) {
        for d in &dirs {
            probes.push(d.iter().map(|v| v * r).collect::<Vec<f64>>());
        }
    }
    let small = sampling::log_space(1e-6, 1e-3, FIT_POINTS);
    let large = sampling::log_space(1e3, 1e6, FIT_POINTS);
    let slope = |grid: &[f64]| {
        let x: Vec<f64> = grid.iter().map(|l| l.ln()).collect();
        let y: Vec<f64> = grid.iter().map(|&l| scaled_sup(phi, l, &probes).ln()).collect();
        fit_slope(&x, &y)
    };
    let (alpha, ra) = slope(&small);
    let (beta, rb) = slope(&large);
    let fit_residual = ra.max(rb);
    Ok(IndexEstimate {
        alpha,
        beta,
        lambda_grid: small.into_iter().chain(large).collect(),
        fit_residual,
        degenerate: !(fit_residual <= DEGENERATE_RESIDUAL),
    })
}

pub const MIN_TREND_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrend {
    /// `(‖u‖_φ, ρ_φ(u)/‖u‖_φ^μ)` per step.
    pub table: Vec<(f64, f64)>,
    pub increasing_steps: usize,
    pub passed: bool,
}

/// Tracks `ρ_φ(u)/‖u‖^μ` along `u, 10u, 100u, ...` for each base trajectory
/// (so the norm grows ×10 per step) and passes when every sequence increases
/// monotonically over at least [`MIN_TREND_STEPS`] steps.
///
/// `mu` must be below the estimated lower index `α_φ`.
pub fn lemma52_growth_probe(
    phi: &GFunction,
    mu: f64,
    trajectories: &[Trajectory],
    steps: usize,
) -> Result<Vec<GrowthTrend>> {
    let alpha = matuszewska_indices(phi)?.alpha;
    if !(mu > 0.0 && mu < alpha) {
        return Err(Error::Precondition(format!(
            "mu = {mu} must lie in (0, alpha = {alpha:.4})"
        )));
    }
    let mut out = Vec::new();
    for u in trajectories {
        let mut table = Vec::with_capacity(steps);
        let mut scale = 1.0;
        for _ in 0..steps {
            let v = u.scaled(scale);
            let n = luxemburg_norm(phi, &v);
            table.push((n, modular(phi, &v) / n.powf(mu)));
            scale *= 10.0;
        }
        let increasing_steps = table.windows(2).take_while(|w| w[1].1 > w[0].1).count();
        out.push(GrowthTrend {
            passed: increasing_steps >= MIN_TREND_STEPS && increasing_steps + 1 == table.len(),
            table,
            increasing_steps,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunc::{make_family, FamilySpec};

    #[test]
    fn power_indices_equal_exponent() {
        let phi = make_family(&FamilySpec::Power { p: 2.5, dim: 1 }).unwrap();
        let est = matuszewska_indices(&phi).unwrap();
        assert!((est.alpha - 2.5).abs() < 0.05 && (est.beta - 2.5).abs() < 0.05);
        assert!(est.fit_residual < 1e-9 && !est.degenerate);
    }

    #[test]
    fn block_indices_split_by_scale() {
        let phi = make_family(&FamilySpec::Block { exponents: vec![2.0, 4.0], dims: vec![1, 1] })
            .unwrap();
        let est = matuszewska_indices(&phi).unwrap();
        assert!((est.alpha - 2.0).abs() < 0.05, "{est:?}");
        assert!((est.beta - 4.0).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn conjugate_index_identity_for_cubic() {
        let phi = make_family(&FamilySpec::Power { p: 3.0, dim: 1 }).unwrap();
        let a = matuszewska_indices(&phi).unwrap().alpha;
        let b = matuszewska_indices(&phi.conjugate_function()).unwrap().beta;
        assert!((1.0 / a + 1.0 / b - 1.0).abs() < 0.03);
    }

    #[test]
    fn growth_probe_on_constants_grows_linearly() {
        let phi = make_family(&FamilySpec::Power { p: 2.0, dim: 1 }).unwrap();
        let u = Trajectory::constant(1.0, 8, &[1.0]).unwrap();
        let trend = &lemma52_growth_probe(&phi, 1.0, &[u], 5).unwrap()[0];
        assert!(trend.passed);
        // ρ = T c²/2, ‖u‖ = c (T/2)^{1/2}: ratio = c (T/2)^{1/2}
        for (i, (_, r)) in trend.table.iter().enumerate() {
            let c = 10f64.powi(i as i32);
            assert!((r - c * 0.5f64.sqrt()).abs() < 1e-8 * c);
        }
    }

    #[test]
    fn growth_probe_rejects_mu_above_alpha() {
        let phi = make_family(&FamilySpec::Power { p: 2.0, dim: 1 }).unwrap();
        let u = Trajectory::constant(1.0, 8, &[1.0]).unwrap();
        assert!(matches!(lemma52_growth_probe(&phi, 2.5, &[u], 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn growth_probe_log_tempered_mu_two() {
        let phi = make_family(&FamilySpec::LogTempered { p: 3.0, dim: 1 }).unwrap();
        let u = Trajectory::from_fn(1.0, 16, 1, |t| vec![1.0 + (std::f64::consts::TAU * t).sin()])
            .unwrap();
        let trend = &lemma52_growth_probe(&phi, 2.0, &[u], 5).unwrap()[0];
        assert!(trend.passed, "{trend:?}");
    }
}
