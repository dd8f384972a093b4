use std::f64::consts::TAU;
use std::ops::Range;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use rayon::prelude::*;

use super::{action, el_residual, report_from, DiscreteProblem, Method, SolveResult, StartSummary, VerifyTolerances};
use crate::clarke::{Spatial, ACTIVITY_TOL};
use crate::error::Result;
use crate::orlicz::Trajectory;
use crate::sampling;
use crate::vecops::{dot, norm};

/// Starting point of [`minimize`].
#[derive(Debug, Clone)]
pub enum Init {
    /// Constants `0, ±r₀ e_k`, then seeded random low-frequency trajectories.
    Auto,
    Given(Trajectory),
}

/// Largest Lipschitz estimate before a run is declared stalled.
const MAX_LIPSCHITZ: f64 = 1e30;
/// Relative decrease that ends a smoothing stage.
const STAGE_TOL: f64 = 1e-7;
/// Relative slack for comparisons of action values.
const ROUNDOFF: f64 = 1e-13;
/// Ties within this value gap are snapped onto the kink of a max term.
const SNAP_GAP: f64 = 1e-5;

/// Minimizes the discrete action from several starts and returns the best
/// run by exact action (ties broken by start index).
pub fn minimize(problem: &DiscreteProblem, init: Init) -> Result<SolveResult> {
    let starts = match init {
        Init::Given(u) => {
            problem.check(&u)?;
            vec![u.as_slice().to_vec()]
        }
        Init::Auto => auto_starts(problem),
    };
    let model = Model::new(problem);
    let mut runs = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, u0)| model.run(k, u0))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| a.action.total_cmp(&b.action).then(a.start.cmp(&b.start)));
    let total_iterations = runs.iter().map(|r| r.iterations).sum();
    let mut summaries: Vec<StartSummary> = runs
        .iter()
        .map(|r| StartSummary { start: r.start, action: r.action, iterations: r.iterations, converged: r.converged })
        .collect();
    summaries.sort_by_key(|s| s.start);
    let restarts_used = runs.len();
    let best = runs.swap_remove(0);
    let trajectory = model.trajectory(best.x);
    let el = el_residual(problem, &trajectory)?;
    let tol = VerifyTolerances { tol_r: problem.options.tol_r, tol_m: problem.options.tol_m };
    let verification = report_from(&el, problem.phi.strictly_convex(), tol);
    Ok(SolveResult {
        trajectory,
        action: best.action,
        el,
        verification,
        iterations: best.iterations,
        total_iterations,
        restarts_used,
        best_start: best.start,
        converged: best.converged,
        starts: summaries,
        action_trace: best.trace,
    })
}

fn auto_starts(problem: &DiscreteProblem) -> Vec<Vec<f64>> {
    let n = problem.nodes;
    let dim = problem.dim();
    let r0 = problem.options.start_radius.unwrap_or(1.0);
    let mut constants = vec![vec![0.0; dim]];
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut c = vec![0.0; dim];
            c[k] = s * r0;
            constants.push(c);
        }
    }
    let mut out: Vec<Vec<f64>> = constants
        .into_iter()
        .take(problem.options.starts)
        .map(|c| (0..n).flat_map(|_| c.clone()).collect())
        .collect();
    let mut rng = sampling::rng(problem.options.seed);
    let omega = std::f64::consts::TAU / problem.period();
    while out.len() < problem.options.starts {
        let mean: Vec<f64> = (0..dim).map(|_| r0 * sampling::gaussian(&mut rng)).collect();
        let modes: Vec<(f64, f64)> = (0..3 * dim)
            .map(|_| (r0 * sampling::gaussian(&mut rng), r0 * sampling::gaussian(&mut rng)))
            .collect();
        let mut u = Vec::with_capacity(n * dim);
        for i in 0..n {
            let t = problem.time(i);
            for k in 0..dim {
                let mut v = mean[k];
                for m in 0..3 {
                    let (a, b) = modes[3 * k + m];
                    let w = omega * (m + 1) as f64 * t;
                    v += (a * w.cos() + b * w.sin()) / (m + 1) as f64;
                }
                u.push(v);
            }
        }
        out.push(u);
    }
    out
}

struct Run {
    start: usize,
    x: Vec<f64>,
    action: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// How nonsmooth terms enter the smooth part of a stage.
#[derive(Debug, Clone, Copy)]
struct Mode {
    /// Huber / soft-max parameter.
    mu: f64,
    /// Norm terms handled by the proximal map instead of Huber smoothing.
    prox: bool,
}

/// Norm groups of one node: `(block, h·Σa_j)`.
type NormGroups = Vec<(Range<usize>, f64)>;

struct Model<'a> {
    p: &'a DiscreteProblem,
    n: usize,
    dim: usize,
    h: f64,
    coefs: Vec<Vec<f64>>,
    /// Per node, merged norm groups `(block, h·Σa_j)`; `None` when blocks
    /// overlap partially and no closed-form prox exists.
    groups: Option<Vec<NormGroups>>,
    has_norms: bool,
    has_max: bool,
    precond: Preconditioner,
}

/// Periodic `(1/h)DᵀD + h·I` per coordinate, the Hessian of the quadratic
/// action, inverted by FFT.
struct Preconditioner {
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Eigenvalues divided into the spectrum, including the `1/N` of the
    /// unnormalized inverse transform.
    scale: Vec<f64>,
}

impl Preconditioner {
    fn new(n: usize, dim: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let scale = (0..n)
            .map(|k| {
                let eig = (2.0 - 2.0 * (TAU * k as f64 / n as f64).cos()) / h + h;
                1.0 / (eig * n as f64)
            })
            .collect();
        Self { dim, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), scale }
    }

    fn solve(&self, g: &[f64], out: &mut [f64]) {
        let dim = self.dim;
        let mut buf = vec![Complex::new(0.0, 0.0); self.scale.len()];
        for k in 0..dim {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex::new(g[i * dim + k], 0.0);
            }
            self.forward.process(&mut buf);
            for (b, s) in buf.iter_mut().zip(&self.scale) {
                *b *= *s;
            }
            self.inverse.process(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                out[i * dim + k] = b.re;
            }
        }
    }
}

impl<'a> Model<'a> {
    fn new(p: &'a DiscreteProblem) -> Self {
        let n = p.nodes;
        let h = p.step();
        let coefs: Vec<Vec<f64>> = (0..n).map(|i| p.potential.coefficients(p.time(i))).collect();
        let terms = p.potential.terms();
        let has_norms = terms.iter().any(|t| matches!(t.spatial, Spatial::AbsNorm(_)));
        let has_max = p.potential.has_max_terms();
        let blocks: Vec<Range<usize>> = {
            let mut b: Vec<Range<usize>> = terms
                .iter()
                .filter_map(|t| match &t.spatial {
                    Spatial::AbsNorm(r) => Some(r.clone()),
                    _ => None,
                })
                .collect();
            b.sort_by_key(|r| (r.start, r.end));
            b.dedup();
            b
        };
        let disjoint = blocks.windows(2).all(|w| w[0].end <= w[1].start);
        let groups = disjoint.then(|| {
            coefs
                .iter()
                .map(|c| {
                    blocks
                        .iter()
                        .map(|b| {
                            let total: f64 = terms
                                .iter()
                                .zip(c)
                                .filter(|(t, _)| matches!(&t.spatial, Spatial::AbsNorm(r) if r == b))
                                .map(|(_, a)| *a)
                                .sum();
                            (b.clone(), h * total)
                        })
                        .collect()
                })
                .collect()
        });
        let precond = Preconditioner::new(n, p.dim(), h);
        Self { p, n, dim: p.dim(), h, coefs, groups, has_norms, has_max, precond }
    }

    fn trajectory(&self, x: Vec<f64>) -> Trajectory {
        Trajectory::new(self.p.period(), self.dim, x).expect("solver iterates stay finite")
    }

    /// Smooth part of the stage objective; the gradient is written to `grad`
    /// when given.
    fn smooth(&self, u: &[f64], mode: Mode, mut grad: Option<&mut [f64]>) -> f64 {
        let (n, dim, h) = (self.n, self.dim, self.h);
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut d = vec![0.0; dim];
        let mut w = vec![0.0; dim];
        let mut scratch = vec![0.0; dim];
        let mut total = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            for k in 0..dim {
                d[k] = (u[j * dim + k] - u[i * dim + k]) / h;
            }
            total += self.p.phi.evaluate(&d);
            let x = &u[i * dim..(i + 1) * dim];
            let skip = mode.prox && self.groups.is_some();
            match grad.as_deref_mut() {
                Some(g) => {
                    self.p.phi.gradient_into(&d, &mut w);
                    for k in 0..dim {
                        g[i * dim + k] -= w[k];
                        g[j * dim + k] += w[k];
                    }
                    total += self.p.potential.smoothed_scaled(
                        &self.coefs[i],
                        x,
                        mode.mu,
                        skip,
                        h,
                        &mut g[i * dim..(i + 1) * dim],
                    );
                }
                None => {
                    total += self.p.potential.smoothed_scaled(&self.coefs[i], x, mode.mu, skip, h, &mut scratch);
                }
            }
        }
        h * total
    }

    fn uses_prox(&self, mode: Mode) -> bool {
        mode.prox && self.has_norms && self.groups.is_some()
    }

    /// Proximal part `Σ_i h Σ_B c_B |u_{i,B}|`.
    fn reg(&self, u: &[f64], mode: Mode) -> f64 {
        match (&self.groups, mode.prox) {
            (Some(groups), true) => groups
                .iter()
                .enumerate()
                .map(|(i, gs)| {
                    gs.iter()
                        .map(|(b, c)| c * norm(&u[i * self.dim + b.start..i * self.dim + b.end]))
                        .sum::<f64>()
                })
                .sum(),
            _ => 0.0,
        }
    }

    /// Block soft-thresholding with step `1/lip`.
    fn prox(&self, z: &mut [f64], lip: f64, mode: Mode) {
        let (Some(groups), true) = (&self.groups, mode.prox) else {
            return;
        };
        for (i, gs) in groups.iter().enumerate() {
            for (b, c) in gs {
                let seg = &mut z[i * self.dim + b.start..i * self.dim + b.end];
                let nrm = norm(seg);
                let thr = c / lip;
                if nrm <= thr {
                    seg.iter_mut().for_each(|v| *v = 0.0);
                } else {
                    let s = 1.0 - thr / nrm;
                    seg.iter_mut().for_each(|v| *v *= s);
                }
            }
        }
    }

    fn exact_action(&self, x: &[f64]) -> Result<f64> {
        action(self.p, &self.trajectory(x.to_vec()))
    }

    fn el_ok(&self, x: &[f64]) -> Result<bool> {
        let el = el_residual(self.p, &self.trajectory(x.to_vec()))?;
        Ok(el.max <= self.p.options.tol_r && el.mean_condition <= self.p.options.tol_m)
    }

    fn run(&self, start: usize, x0: Vec<f64>) -> Result<Run> {
        let opts = &self.p.options;
        let mut x = x0;
        let mut trace = Vec::new();
        let mut iterations = 0;
        let initial = self.exact_action(&x)?;
        if !initial.is_finite() {
            // no descent is possible from an infinite action
            return Ok(Run { start, x, action: initial, iterations, converged: false, trace: vec![initial] });
        }
        let converged = match opts.method {
            Method::Subgradient => self.subgradient(&mut x, opts.max_iter, &mut iterations, &mut trace)?,
            Method::Accelerated => {
                let nonsmooth = self.has_norms || self.has_max;
                if nonsmooth && opts.smoothing {
                    let mut mus = Vec::new();
                    let mut mu = opts.smoothing_mu0;
                    while mu >= opts.smoothing_mu_min {
                        mus.push(mu);
                        mu *= 0.5;
                    }
                    let stage_budget = (opts.max_iter / 4 / mus.len().max(1)).max(opts.patience);
                    for mu in mus {
                        let budget = stage_budget.min(opts.max_iter - iterations);
                        let mode = Mode { mu, prox: false };
                        self.accelerated(&mut x, mode, budget, false, &mut iterations, &mut trace)?;
                    }
                }
                let mode = Mode { mu: opts.smoothing_mu_min, prox: true };
                let budget = opts.max_iter - iterations;
                self.accelerated(&mut x, mode, budget, true, &mut iterations, &mut trace)?
            }
        };
        let action = self.exact_action(&x)?;
        Ok(Run { start, x, action, iterations, converged, trace })
    }

    /// FISTA with backtracking, function and gradient restarts. In the final
    /// stage (`polish`) convergence requires the EL test as well.
    fn accelerated(
        &self,
        x: &mut Vec<f64>,
        mode: Mode,
        budget: usize,
        polish: bool,
        iterations: &mut usize,
        trace: &mut Vec<f64>,
    ) -> Result<bool> {
        let opts = &self.p.options;
        let len = x.len();
        let mut fx = self.smooth(x, mode, None) + self.reg(x, mode);
        let mut y = x.clone();
        let mut gy = vec![0.0; len];
        let mut z = vec![0.0; len];
        let mut t = 1.0_f64;
        let mut window = vec![fx];
        // the proximal map is only closed-form in the Euclidean metric
        let precond = (!self.uses_prox(mode)).then_some(&self.precond);
        let mut dir = vec![0.0; len];
        let mut lip = if precond.is_some() { 1.0 } else { 1.0 / self.h };
        let lip = &mut lip;
        for _ in 0..budget {
            let sy = self.smooth(&y, mode, Some(&mut gy));
            match precond {
                Some(pc) => pc.solve(&gy, &mut dir),
                None => dir.copy_from_slice(&gy),
            }
            let gd = dot(&gy, &dir);
            let mut sz;
            loop {
                for k in 0..len {
                    z[k] = y[k] - dir[k] / *lip;
                }
                self.prox(&mut z, *lip, mode);
                sz = self.smooth(&z, mode, None);
                let model = if precond.is_some() {
                    -0.5 * gd / *lip
                } else {
                    let mut lin = 0.0;
                    let mut sq = 0.0;
                    for k in 0..len {
                        let dz = z[k] - y[k];
                        lin += gy[k] * dz;
                        sq += dz * dz;
                    }
                    lin + 0.5 * *lip * sq
                };
                let bound = sy + model + ROUNDOFF * (1.0 + sy.abs());
                if sz <= bound || *lip >= MAX_LIPSCHITZ {
                    break;
                }
                *lip *= 2.0;
            }
            *iterations += 1;
            let fz = sz + self.reg(&z, mode);
            // slack: near the optimum action values stop resolving progress
            if !(fz <= fx + ROUNDOFF * (1.0 + fx.abs())) {
                // function restart: drop momentum and retry from x
                y.copy_from_slice(x);
                t = 1.0;
                if *lip >= MAX_LIPSCHITZ || !fz.is_finite() && !fx.is_finite() {
                    trace.push(fx);
                    return Ok(false);
                }
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let beta = (t - 1.0) / t_next;
                let mut gradient_restart = 0.0;
                for k in 0..len {
                    gradient_restart += (y[k] - z[k]) * (z[k] - x[k]);
                }
                if gradient_restart > 0.0 {
                    t = 1.0;
                    y.copy_from_slice(&z);
                } else {
                    for k in 0..len {
                        y[k] = z[k] + beta * (z[k] - x[k]);
                    }
                    t = t_next;
                }
                x.copy_from_slice(&z);
                fx = fz;
                *lip *= 0.95;
            }
            trace.push(fx);
            window.push(fx);
            if window.len() > opts.patience {
                let old = window.remove(0);
                let decrease = old - fx;
                let tol = if polish { opts.tol_a } else { STAGE_TOL };
                if decrease <= tol * (1.0 + fx.abs()) {
                    if !polish {
                        return Ok(false);
                    }
                    if self.el_ok(x)? {
                        return Ok(true);
                    }
                    if self.has_max {
                        if let Some(s) = self.snap_kinks(x) {
                            if self.el_ok(&s)? {
                                *x = s;
                                return Ok(true);
                            }
                        }
                    }
                    if decrease == 0.0 && *lip >= MAX_LIPSCHITZ {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(polish && self.el_ok(x)? && {
            let last = window.first().copied().unwrap_or(fx);
            last - fx <= opts.tol_a * (1.0 + fx.abs())
        })
    }

    /// Projects nodes whose two largest max-term pieces nearly tie onto the
    /// tie set, by Newton steps on their difference.
    fn snap_kinks(&self, x: &[f64]) -> Option<Vec<f64>> {
        let dim = self.dim;
        let mut out = x.to_vec();
        let mut moved = false;
        for i in 0..self.n {
            for (term, &a) in self.p.potential.terms().iter().zip(&self.coefs[i]) {
                let Spatial::MaxOf(fs) = &term.spatial else { continue };
                if a == 0.0 || fs.len() < 2 {
                    continue;
                }
                let xi = &mut out[i * dim..(i + 1) * dim];
                let mut order: Vec<(f64, usize)> = fs.iter().enumerate().map(|(k, f)| (f.value(xi), k)).collect();
                order.sort_by(|p, q| q.0.total_cmp(&p.0));
                let (top, second) = (order[0], order[1]);
                let gap = top.0 - second.0;
                if gap <= ACTIVITY_TOL || gap > SNAP_GAP * (1.0 + top.0.abs()) {
                    continue;
                }
                for _ in 0..8 {
                    let diff = fs[top.1].value(xi) - fs[second.1].value(xi);
                    let gd: Vec<f64> = fs[top.1]
                        .gradient(xi)
                        .iter()
                        .zip(fs[second.1].gradient(xi))
                        .map(|(p, q)| p - q)
                        .collect();
                    let gg = dot(&gd, &gd);
                    if gg == 0.0 || diff.abs() <= 0.1 * ACTIVITY_TOL {
                        break;
                    }
                    for (v, g) in xi.iter_mut().zip(&gd) {
                        *v -= diff / gg * g;
                    }
                    moved = true;
                }
            }
        }
        moved.then_some(out)
    }

    /// Diminishing-step min-norm subgradient method; keeps the best iterate.
    fn subgradient(&self, x: &mut Vec<f64>, budget: usize, iterations: &mut usize, trace: &mut Vec<f64>) -> Result<bool> {
        let opts = &self.p.options;
        let mut best = (self.exact_action(x)?, x.clone());
        let mut window = vec![best.0];
        for k in 0..budget {
            let u = self.trajectory(x.clone());
            let g: Vec<f64> = super::action_subgradient(self.p, &u)?.into_iter().flatten().collect();
            let gn = norm(&g);
            *iterations += 1;
            if gn == 0.0 {
                trace.push(best.0);
                return self.el_ok(x);
            }
            let step = opts.step_a / (1.0 + k as f64 / opts.step_b);
            for (v, gi) in x.iter_mut().zip(&g) {
                *v -= step * gi / gn;
            }
            let a = self.exact_action(x)?;
            if a < best.0 {
                best = (a, x.clone());
            }
            trace.push(best.0);
            window.push(best.0);
            if window.len() > opts.patience {
                let old = window.remove(0);
                if old - best.0 <= opts.tol_a * (1.0 + best.0.abs()) && self.el_ok(&best.1)? {
                    *x = best.1;
                    return Ok(true);
                }
            }
        }
        *x = best.1;
        Ok(false)
    }
}
