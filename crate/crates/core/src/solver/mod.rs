//! Discrete action functional, its first-order model, and validation of
//! candidate minimizers against the Euler–Lagrange inclusion.
//!
//! On the grid `t_i = i h`, `h = T/N`, the action is
//! `A(u) = h Σ_i [φ(u'_i) + F(t_i, u_i)]` with `u'_i = (u_{i+1} − u_i)/h`
//! and indices mod `N`. Stationarity of `A` is exactly the discrete inclusion
//! `(w_i − w_{i−1})/h ∈ ∂F(t_i, u_i)` with `w_i = ∇φ(u'_i)`.

mod minimize;

use serde::{Deserialize, Serialize};

use crate::clarke::Potential;
use crate::error::{Error, Result};
use crate::gfunc::GFunction;
use crate::orlicz::{Trajectory, MIN_NODES};
use crate::vecops::norm;

pub use minimize::{minimize, Init};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Accelerated proximal gradient with backtracking and adaptive restart.
    Accelerated,
    /// Min-norm subgradient steps `a/(1 + k/b)` along `−g/|g|`.
    Subgradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: Method,
    pub step_a: f64,
    pub step_b: f64,
    /// Continuation on Huber/soft-max smoothing before the final polish.
    pub smoothing: bool,
    pub smoothing_mu0: f64,
    pub smoothing_mu_min: f64,
    pub starts: usize,
    /// Radius `r₀` of the constant starting points; 1 when absent.
    pub start_radius: Option<f64>,
    /// Iteration budget per start.
    pub max_iter: usize,
    /// Relative action-decrease tolerance: `tol_a · (1 + |A|)`.
    pub tol_a: f64,
    pub tol_r: f64,
    pub tol_m: f64,
    /// Window (in iterations) over which the action decrease is measured.
    pub patience: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Accelerated,
            step_a: 1.0,
            step_b: 100.0,
            smoothing: true,
            smoothing_mu0: 1e-1,
            smoothing_mu_min: 1e-6,
            starts: 8,
            start_radius: None,
            max_iter: 200_000,
            tol_a: 1e-9,
            tol_r: 1e-3,
            tol_m: 1e-6,
            patience: 50,
            seed: crate::sampling::DEFAULT_SEED,
        }
    }
}

/// `φ`, `F` and the grid: `N` nodes on `[0, T]` with `T` the horizon of `F`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub phi: GFunction,
    pub potential: Potential,
    pub nodes: usize,
    pub options: SolverOptions,
}

impl DiscreteProblem {
    pub fn new(phi: GFunction, potential: Potential, nodes: usize, options: SolverOptions) -> Result<Self> {
        if phi.dim() != potential.dim() {
            return Err(Error::DimensionMismatch { expected: phi.dim(), got: potential.dim() });
        }
        if nodes < MIN_NODES {
            return Err(Error::TooFewNodes(nodes));
        }
        if options.starts == 0 {
            return Err(Error::Precondition("at least one start is required".into()));
        }
        Ok(Self { phi, potential, nodes, options })
    }

    pub fn period(&self) -> f64 {
        self.potential.horizon()
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn step(&self) -> f64 {
        self.period() / self.nodes as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub(crate) fn check(&self, u: &Trajectory) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.dim() });
        }
        if u.nodes() != self.nodes {
            return Err(Error::Precondition(format!(
                "trajectory has {} nodes, problem has {}",
                u.nodes(),
                self.nodes
            )));
        }
        if (u.period() - self.period()).abs() > 1e-12 * self.period() {
            return Err(Error::InvalidPeriod(u.period()));
        }
        Ok(())
    }

    /// Fluxes `w_i = ∇φ(u'_i)`.
    fn fluxes(&self, u: &Trajectory) -> Vec<Vec<f64>> {
        u.derivative().iter().map(|d| self.phi.gradient(d)).collect()
    }
}

/// `h Σ_i [φ(u'_i) + F(t_i, u_i)]`.
pub fn action(problem: &DiscreteProblem, u: &Trajectory) -> Result<f64> {
    problem.check(u)?;
    let h = problem.step();
    let du = u.derivative();
    let mut total = 0.0;
    for i in 0..problem.nodes {
        total += problem.phi.evaluate(du.node(i)) + problem.potential.value(problem.time(i), u.node(i));
    }
    Ok(h * total)
}

/// Per-node `g_i = −(w_i − w_{i−1}) + h ξ_i`, with `ξ_i` the least-norm
/// element of `∂F(t_i, u_i)`.
pub fn action_subgradient(problem: &DiscreteProblem, u: &Trajectory) -> Result<Vec<Vec<f64>>> {
    problem.check(u)?;
    let h = problem.step();
    let n = problem.nodes;
    let w = problem.fluxes(u);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = &w[(i + n - 1) % n];
        let xi = problem.potential.subdiff(problem.time(i), u.node(i)).min_norm_element()?;
        out.push(
            w[i].iter()
                .zip(prev)
                .zip(&xi)
                .map(|((a, b), x)| -(a - b) + h * x)
                .collect(),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    pub max: f64,
    pub mean: f64,
    /// `dist((w_i − w_{i−1})/h, ∂F(t_i, u_i))`.
    pub per_node: Vec<f64>,
    /// `|h Σ_i ξ*_i|` with `ξ*_i` the projection of `(w_i − w_{i−1})/h`.
    pub mean_condition: f64,
    /// Largest `|w_k − (w_{N−1} + h Σ_{i≤k} ξ*_i)|`: how far the flux chain
    /// rebuilt from the selections drifts; its last entry is the closure
    /// defect of `∇φ(u'(0)) = ∇φ(u'(T))`.
    pub derivative_periodicity_gap: f64,
}

pub fn el_residual(problem: &DiscreteProblem, u: &Trajectory) -> Result<ElResidual> {
    problem.check(u)?;
    let h = problem.step();
    let n = problem.nodes;
    let dim = problem.dim();
    let w = problem.fluxes(u);
    let mut per_node = Vec::with_capacity(n);
    let mut xi_sum = vec![0.0; dim];
    let mut chain = w[n - 1].clone();
    let mut gap: f64 = 0.0;
    for i in 0..n {
        let prev = &w[(i + n - 1) % n];
        let r: Vec<f64> = w[i].iter().zip(prev).map(|(a, b)| (a - b) / h).collect();
        let proj = problem.potential.subdiff(problem.time(i), u.node(i)).project(&r)?;
        per_node.push(proj.distance);
        for k in 0..dim {
            xi_sum[k] += proj.point[k];
            chain[k] += h * proj.point[k];
        }
        let drift: Vec<f64> = chain.iter().zip(&w[i]).map(|(c, wi)| c - wi).collect();
        gap = gap.max(norm(&drift));
    }
    let max = per_node.iter().copied().fold(0.0, f64::max);
    let mean = per_node.iter().sum::<f64>() / n as f64;
    Ok(ElResidual {
        max,
        mean,
        per_node,
        mean_condition: h * norm(&xi_sum),
        derivative_periodicity_gap: gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    pub tol_r: f64,
    pub tol_m: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self { tol_r: 1e-3, tol_m: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub residual_ok: bool,
    pub mean_ok: bool,
    /// Injectivity of `∇φ`, needed to read `u'(0) = u'(T)` off the fluxes.
    pub strictly_convex: bool,
    pub max_residual: f64,
    pub mean_condition: f64,
}

pub fn verify_solution(problem: &DiscreteProblem, u: &Trajectory, tol: VerifyTolerances) -> Result<VerifyReport> {
    let el = el_residual(problem, u)?;
    Ok(report_from(&el, problem.phi.strictly_convex(), tol))
}

pub(crate) fn report_from(el: &ElResidual, strictly_convex: bool, tol: VerifyTolerances) -> VerifyReport {
    let residual_ok = el.max <= tol.tol_r;
    let mean_ok = el.mean_condition <= tol.tol_m;
    VerifyReport {
        passed: residual_ok && mean_ok && strictly_convex,
        residual_ok,
        mean_ok,
        strictly_convex,
        max_residual: el.max,
        mean_condition: el.mean_condition,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: usize,
    pub action: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub trajectory: Trajectory,
    pub action: f64,
    pub el: ElResidual,
    pub verification: VerifyReport,
    /// Iterations of the winning start.
    pub iterations: usize,
    pub total_iterations: usize,
    pub restarts_used: usize,
    pub best_start: usize,
    pub converged: bool,
    pub starts: Vec<StartSummary>,
    /// Action after every iteration of the winning start.
    #[serde(skip)]
    pub action_trace: Vec<f64>,
}
