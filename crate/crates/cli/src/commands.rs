use anyhow::{anyhow, Context, Result};
use phi_inclusion::gfunc::{delta2_report, matuszewska_indices, GrowthReport, IndexEstimate};
use phi_inclusion::sampling::log_space;
use phi_inclusion::solver::StartSummary;
use phi_inclusion::{
    make_family, minimize, run_probes, DiscreteProblem, ElResidual, GFunction, HypothesisReport, Init, Potential,
    SolveResult, VerifyReport,
};
use serde::Serialize;

use crate::config::ProblemConfig;

/// Exit status of `solve` and `convergence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Converged and verified.
    Verified,
    /// Converged, but the EL verification failed.
    Unverified,
    BudgetExhausted,
    /// Every start had infinite action, so there was nothing to minimize.
    InfiniteAction,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::BudgetExhausted | Status::InfiniteAction => 2,
            Status::Unverified => 3,
        }
    }

    fn of(result: &SolveResult) -> Self {
        if !result.action.is_finite() {
            Status::InfiniteAction
        } else if !result.converged {
            Status::BudgetExhausted
        } else if result.verification.passed {
            Status::Verified
        } else {
            Status::Unverified
        }
    }
}

pub fn build_phi(cfg: &ProblemConfig) -> Result<GFunction> {
    make_family(&cfg.phi).context("phi")
}

pub fn build_potential(cfg: &ProblemConfig) -> Result<Potential> {
    let spec = cfg.potential.as_ref().ok_or_else(|| anyhow!("config has no `potential.*` section"))?;
    Potential::from_spec(spec, cfg.horizon()).context("potential")
}

pub fn build_problem(cfg: &ProblemConfig) -> Result<DiscreteProblem> {
    let phi = build_phi(cfg)?;
    let potential = build_potential(cfg)?;
    DiscreteProblem::new(phi, potential, cfg.nodes, cfg.solver.clone()).context("problem")
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugateSample {
    /// `ξ = radius · e₁`.
    pub radius: f64,
    pub value: f64,
    /// Numerical sup when a closed form exists, for comparison.
    pub numeric: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub label: String,
    pub dim: usize,
    pub strictly_convex: bool,
    pub n_function: bool,
    pub conjugate_table: Vec<ConjugateSample>,
    pub growth: GrowthReport,
    pub conjugate_growth: GrowthReport,
    pub indices: Option<IndexEstimate>,
    pub conjugate_indices: Option<IndexEstimate>,
    /// `1/α_φ + 1/β_{φ*}`, which should be close to 1.
    pub index_identity: Option<f64>,
    pub notes: Vec<String>,
}

pub fn analyze(cfg: &ProblemConfig) -> Result<AnalysisReport> {
    let phi = build_phi(cfg)?;
    let conj = phi.conjugate_function();
    let dim = phi.dim();
    let opts = &cfg.analysis;
    let conjugate_table = log_space(1e-2, 1e2, opts.conjugate_points.max(2))
        .into_iter()
        .map(|r| {
            let mut xi = vec![0.0; dim];
            xi[0] = r;
            ConjugateSample {
                radius: r,
                value: phi.conjugate(&xi),
                numeric: phi.has_analytic_conjugate().then(|| phi.conjugate_numeric(&xi)),
            }
        })
        .collect();
    let mut notes = Vec::new();
    let mut estimate = |f: &GFunction, which: &str| match matuszewska_indices(f) {
        Ok(e) => Some(e),
        Err(e) => {
            notes.push(format!("{which} indices: {e}"));
            None
        }
    };
    let indices = estimate(&phi, "phi");
    let conjugate_indices = estimate(&conj, "conjugate");
    let index_identity = match (&indices, &conjugate_indices) {
        (Some(a), Some(b)) => Some(1.0 / a.alpha + 1.0 / b.beta),
        _ => None,
    };
    Ok(AnalysisReport {
        label: phi.label().to_string(),
        dim,
        strictly_convex: phi.strictly_convex(),
        n_function: phi.is_n_function(),
        conjugate_table,
        growth: delta2_report(&phi, opts.radius, opts.samples),
        conjugate_growth: delta2_report(&conj, opts.radius, opts.samples),
        indices,
        conjugate_indices,
        index_identity,
        notes,
    })
}

pub fn check(cfg: &ProblemConfig) -> Result<HypothesisReport> {
    let phi = build_phi(cfg)?;
    let potential = build_potential(cfg)?;
    run_probes(&phi, &potential, &cfg.probe).context("probes")
}

/// The `solve` section of a report. The trajectory itself goes to CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSection {
    pub status: Status,
    pub exit_code: i32,
    pub nodes: usize,
    pub period: f64,
    pub action: f64,
    pub sup_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub total_iterations: usize,
    pub restarts_used: usize,
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    pub verification: VerifyReport,
    pub el: ElResidual,
}

pub struct SolveOutcome {
    pub result: SolveResult,
    pub section: SolveSection,
}

pub fn solve(cfg: &ProblemConfig) -> Result<SolveOutcome> {
    let problem = build_problem(cfg)?;
    solve_problem(&problem)
}

fn solve_problem(problem: &DiscreteProblem) -> Result<SolveOutcome> {
    let result = minimize(problem, Init::Auto).context("solver")?;
    let status = Status::of(&result);
    let section = SolveSection {
        status,
        exit_code: status.exit_code(),
        nodes: problem.nodes,
        period: problem.period(),
        action: result.action,
        sup_norm: result.trajectory.sup_norm(),
        converged: result.converged,
        iterations: result.iterations,
        total_iterations: result.total_iterations,
        restarts_used: result.restarts_used,
        best_start: result.best_start,
        starts: result.starts.clone(),
        verification: result.verification.clone(),
        el: result.el.clone(),
    };
    Ok(SolveOutcome { result, section })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub h: f64,
    pub action: f64,
    pub el_max: f64,
    pub mean_condition: f64,
    pub converged: bool,
    pub status: Status,
    /// Largest per-coordinate spread `max_i u_i − min_i u_i`.
    pub oscillation: f64,
    /// `max_i |u^N(t_i) − u^{2N}(t_i)|` against the next level.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// `log₂(|A_N − A_{2N}| / |A_{2N} − A_{4N}|)` per consecutive triple.
    pub action_orders: Vec<Option<f64>>,
    /// `log₂(change_N / change_{2N})` per consecutive pair of changes.
    pub trajectory_orders: Vec<Option<f64>>,
    /// Last finite action order.
    pub order: Option<f64>,
    pub all_converged: bool,
}

impl ConvergenceReport {
    pub fn status(&self) -> Status {
        if self.rows.iter().all(|r| r.status == Status::Verified) {
            Status::Verified
        } else if self.all_converged {
            Status::Unverified
        } else {
            Status::BudgetExhausted
        }
    }
}

fn log2_ratio(a: f64, b: f64) -> Option<f64> {
    let r = (a.abs() / b.abs()).log2();
    r.is_finite().then_some(r)
}

pub fn convergence(cfg: &ProblemConfig, levels: usize) -> Result<ConvergenceReport> {
    let phi = build_phi(cfg)?;
    let potential = build_potential(cfg)?;
    let mut solved = Vec::with_capacity(levels + 1);
    for level in 0..=levels {
        let nodes = cfg.nodes << level;
        let problem = DiscreteProblem::new(phi.clone(), potential.clone(), nodes, cfg.solver.clone())
            .with_context(|| format!("level {level}"))?;
        solved.push(solve_problem(&problem)?);
    }
    let mut rows: Vec<ConvergenceRow> = solved
        .iter()
        .map(|s| {
            let u = &s.result.trajectory;
            let oscillation = (0..u.dim())
                .map(|k| {
                    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[k]), hi.max(x[k])));
                    hi - lo
                })
                .fold(0.0, f64::max);
            ConvergenceRow {
                nodes: s.section.nodes,
                h: u.step(),
                action: s.result.action,
                el_max: s.result.el.max,
                mean_condition: s.result.el.mean_condition,
                converged: s.result.converged,
                status: s.section.status,
                oscillation,
                change: None,
            }
        })
        .collect();
    for k in 0..solved.len().saturating_sub(1) {
        let (coarse, fine) = (&solved[k].result.trajectory, &solved[k + 1].result.trajectory);
        let change = (0..coarse.nodes())
            .flat_map(|i| coarse.node(i).iter().zip(fine.node(2 * i)).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        rows[k].change = Some(change);
    }
    let action_orders: Vec<Option<f64>> = rows
        .windows(3)
        .map(|w| log2_ratio(w[0].action - w[1].action, w[1].action - w[2].action))
        .collect();
    let changes: Vec<f64> = rows.iter().filter_map(|r| r.change).collect();
    let trajectory_orders = changes.windows(2).map(|w| log2_ratio(w[0], w[1])).collect();
    let order = action_orders.iter().rev().find_map(|o| *o);
    let all_converged = rows.iter().all(|r| r.converged);
    Ok(ConvergenceReport { rows, action_orders, trajectory_orders, order, all_converged })
}
