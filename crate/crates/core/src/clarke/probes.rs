//! Sampled falsifiers for the hypotheses of the existence theorems.
//!
//! A `pass` only means that no counterexample was found at the declared
//! sample scale. Every `fail` carries a [`Witness`] whose inequality can be
//! re-evaluated directly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Potential, SubdiffSet, TimeExpr};
use crate::gfunc::{delta2_report, order_llcurly, Delta2Constant, FamilySpec, GFunction};
use crate::quad;
use crate::sampling;
use crate::vecops::norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Pass,
    Fail,
    NotProbed,
}

/// A concrete violation of `lhs ≤ rhs` (or of a strict or trend statement,
/// as explained by `description`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
    pub description: String,
}

impl Witness {
    fn new(description: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { t: None, x: None, y: None, xi: None, lhs, rhs, description: description.into() }
    }
    fn at(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
    fn x(mut self, x: &[f64]) -> Self {
        self.x = Some(x.to_vec());
        self
    }
    fn y(mut self, y: &[f64]) -> Self {
        self.y = Some(y.to_vec());
        self
    }
    fn xi(mut self, xi: &[f64]) -> Self {
        self.xi = Some(xi.to_vec());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub status: ProbeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub radii: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub table: Vec<TrendRow>,
    pub note: String,
}

impl ProbeOutcome {
    fn not_probed(note: impl Into<String>) -> Self {
        Self {
            status: ProbeStatus::NotProbed,
            witness: None,
            radii: Vec::new(),
            samples: 0,
            seed: 0,
            table: Vec::new(),
            note: note.into(),
        }
    }

    fn pass(note: impl Into<String>) -> Self {
        Self { status: ProbeStatus::Pass, ..Self::not_probed(note) }
    }

    fn fail(witness: Witness) -> Self {
        Self { status: ProbeStatus::Fail, witness: Some(witness), ..Self::not_probed("") }
    }

    fn with_meta(mut self, radii: Vec<f64>, samples: usize, seed: u64) -> Self {
        self.radii = radii;
        self.samples = samples;
        self.seed = seed;
        self
    }

    fn with_table(mut self, table: Vec<TrendRow>) -> Self {
        self.table = table;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == ProbeStatus::Pass
    }
}

/// Options of the H3 probe.
#[derive(Debug, Clone, PartialEq)]
pub struct H3Options {
    /// Supplied `b(t)`; when absent `b(t) = sup_{|x| ≤ 1} (|F| + |ξ|)`.
    pub b: Option<TimeExpr>,
    pub radius: f64,
    pub radii_count: usize,
    pub time_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PascaOptions {
    pub p: f64,
    pub q: f64,
    /// Dimension of the `x₁` block; `x₂` is the rest.
    pub split: usize,
    /// `(α₁, α₂)`; defaults to `0.9 (p − 1), 0.9 (q − 1)`.
    pub alphas: Option<(f64, f64)>,
    pub radius: f64,
}

/// Everything [`run_probes`] needs beyond `φ` and `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub phi0: Option<FamilySpec>,
    pub d: Option<TimeExpr>,
    pub b: Option<TimeExpr>,
    pub lambda: f64,
    pub mu: f64,
    /// Outer radius of the bounded-set samples (H1, H3, H4, H6, H7).
    pub radius: f64,
    pub samples: usize,
    pub time_samples: usize,
    /// Radii of the coercivity trend tables (H5, H8).
    pub trend_radii: Vec<f64>,
    pub bo_pairs: usize,
    pub seed: u64,
    pub pasca: Option<PascaOptions>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            phi0: None,
            d: None,
            b: None,
            lambda: 0.5,
            mu: 1.0,
            radius: 1e3,
            samples: 2000,
            time_samples: 32,
            trend_radii: default_trend_radii(),
            bo_pairs: 100_000,
            seed: sampling::DEFAULT_SEED,
            pasca: None,
        }
    }
}

/// `10^k` for `k = −2..=100`.
pub fn default_trend_radii() -> Vec<f64> {
    (-2..=100).map(|k| 10f64.powi(k)).collect()
}

fn time_grid(horizon: f64, m: usize) -> Vec<f64> {
    (0..m).map(|k| (k as f64 + 0.5) * horizon / m as f64).collect()
}

fn probe_directions(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    sampling::directions(dim, (2 * dim + 2).max(16), seed)
}

/// The origin plus `r·d` over log-spaced radii and probe directions.
fn shell_points(dim: usize, radii: &[f64], dirs: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let mut pts = vec![(0.0, vec![0.0; dim])];
    for &r in radii {
        for d in dirs {
            pts.push((r, d.iter().map(|v| v * r).collect()));
        }
    }
    pts
}

fn max_norm(set: &SubdiffSet, dirs: &[Vec<f64>]) -> f64 {
    set.extreme_points(dirs).iter().map(|p| norm(p)).fold(0.0, f64::max)
}

/// Rows where `lhs > rhs` beyond rounding.
fn violates(lhs: f64, rhs: f64) -> bool {
    !(lhs <= rhs + 1e-9 * rhs.abs().max(1.0))
}

/// H1: strict convexity and `Δ₂` for both `φ` and `φ*`.
pub fn probe_h1(phi: &GFunction, radius: f64, samples: usize) -> ProbeOutcome {
    let meta = |o: ProbeOutcome| o.with_meta(vec![radius], samples, sampling::DEFAULT_SEED);
    if !phi.strictly_convex() {
        return meta(ProbeOutcome::fail(flatness_witness(phi, radius)));
    }
    let own = delta2_report(phi, radius, samples);
    if let Some(w) = delta2_witness(phi, &own, "φ") {
        return meta(ProbeOutcome::fail(w).with_table(trend_rows(&own.radius_trend)));
    }
    let conj = phi.conjugate_function();
    let dual = delta2_report(&conj, radius, samples);
    if let Some(w) = delta2_witness(&conj, &dual, "φ*") {
        return meta(ProbeOutcome::fail(w).with_table(trend_rows(&dual.radius_trend)));
    }
    let c = |r: &crate::gfunc::GrowthReport| match r.delta2_constant {
        Delta2Constant::Finite(c) => c,
        Delta2Constant::Unbounded => f64::INFINITY,
    };
    meta(
        ProbeOutcome::pass(format!(
            "strictly convex; Δ₂ constants φ: {:.6}, φ*: {:.6} on |x| ≤ {radius:e}",
            c(&own),
            c(&dual)
        ))
        .with_table(trend_rows(&own.radius_trend)),
    )
}

fn trend_rows(trend: &[(f64, f64)]) -> Vec<TrendRow> {
    trend.iter().map(|&(radius, value)| TrendRow { radius, value }).collect()
}

fn delta2_witness(f: &GFunction, report: &crate::gfunc::GrowthReport, name: &str) -> Option<Witness> {
    if report.delta2_constant.is_finite() {
        return None;
    }
    let x = &report.witness;
    let c_inner = report.radius_trend[0].1;
    let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    Some(
        Witness::new(
            format!(
                "{name}(2x) exceeds C·{name}(x) + 1 with C = {c_inner:.6}, the constant found on \
                 the innermost radius; constants keep growing with the radius"
            ),
            f.evaluate(&doubled),
            c_inner * f.evaluate(x) + 1.0,
        )
        .x(x),
    )
}

/// Searches a segment on which `φ` is affine.
fn flatness_witness(phi: &GFunction, radius: f64) -> Witness {
    let dim = phi.dim();
    for d in probe_directions(dim, sampling::DEFAULT_SEED) {
        for r in sampling::log_space(1e-3, radius, 40) {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            let y: Vec<f64> = d.iter().map(|v| v * 2.0 * r).collect();
            let mid: Vec<f64> = d.iter().map(|v| v * 1.5 * r).collect();
            let lhs = phi.evaluate(&mid);
            let rhs = 0.5 * (phi.evaluate(&x) + phi.evaluate(&y));
            if (rhs - lhs).abs() <= 1e-12 * rhs.abs().max(1.0) {
                return Witness::new(
                    "φ((x+y)/2) equals (φ(x)+φ(y))/2: not strictly convex",
                    lhs,
                    rhs,
                )
                .x(&x)
                .y(&y);
            }
        }
    }
    Witness::new("φ is not flagged strictly convex; no affine segment located", 0.0, 0.0)
}

/// H2 holds by construction for every [`Potential`].
pub fn probe_h2(f: &Potential) -> ProbeOutcome {
    debug_assert!(f.is_regular());
    ProbeOutcome::pass(
        "regular by construction: smooth terms plus nonnegative multiples of convex norms and maxima",
    )
}

/// Decade increments of `∫ b` toward both endpoints. Returns a witness when
/// the increments stop decaying (`b ∉ L¹`).
fn l1_witness<B: Fn(f64) -> f64>(b: &B, horizon: f64) -> Option<Witness> {
    const DECADES: i32 = 9;
    for (side, map) in [("t → 0", 0), ("t → T", 1)] {
        let at = |s: f64| if map == 0 { s } else { horizon - s };
        let mut incs = Vec::new();
        for k in 1..DECADES {
            let hi = horizon * 10f64.powi(-k);
            let lo = horizon * 10f64.powi(-k - 1);
            let v = quad::integrate(|s| b(at(s)).abs(), lo, hi, 1e-12);
            incs.push((lo, v));
        }
        if incs.iter().any(|(_, v)| !v.is_finite()) {
            let (lo, _) = incs.iter().find(|(_, v)| !v.is_finite()).copied().unwrap();
            return Some(
                Witness::new(format!("∫ b is infinite near {side}"), f64::INFINITY, 0.0).at(at(lo)),
            );
        }
        let n = incs.len();
        let stalls = (n - 3..n).all(|i| incs[i].1 > 0.9 * incs[i - 1].1 && incs[i].1 > 0.0);
        if stalls {
            let (lo, last) = incs[n - 1];
            return Some(
                Witness::new(
                    format!(
                        "∫ b over successive decades toward {side} does not decay (b ∉ L¹): \
                         lhs is the last decade integral, rhs 0.9× the previous one"
                    ),
                    last,
                    0.9 * incs[n - 2].1,
                )
                .at(at(lo)),
            );
        }
    }
    None
}

/// H3: `|F(t,x)| + |ξ| ≤ c(x) b(t)` with `b ∈ L¹` and `c` bounded on bounded
/// sets. The reported table is the empirical envelope `c(R)` for `|x| ≤ R`.
pub fn probe_h3(f: &Potential, opts: &H3Options) -> ProbeOutcome {
    let dim = f.dim();
    let dirs = probe_directions(dim, opts.seed);
    let radii = sampling::log_space(1e-3, opts.radius, opts.radii_count.max(2));
    let pts = shell_points(dim, &radii, &dirs);
    let unit = shell_points(dim, &sampling::log_space(1e-3, 1.0, 6), &dirs);
    let lhs = |t: f64, x: &[f64]| f.value(t, x).abs() + max_norm(&f.subdiff(t, x), &dirs);
    let b = |t: f64| match &opts.b {
        Some(expr) => expr.eval(t),
        None => unit.iter().map(|(_, x)| lhs(t, x)).fold(0.0, f64::max),
    };
    let samples = pts.len() * opts.time_samples;
    let meta = |o: ProbeOutcome| o.with_meta(radii.clone(), samples, opts.seed);

    if let Some(w) = l1_witness(&b, f.horizon()) {
        return meta(ProbeOutcome::fail(w));
    }
    let mut envelope = vec![0.0_f64; radii.len() + 1];
    for t in time_grid(f.horizon(), opts.time_samples) {
        let bt = b(t);
        for (r, x) in &pts {
            let l = lhs(t, x);
            if !l.is_finite() || !bt.is_finite() {
                return meta(ProbeOutcome::fail(
                    Witness::new("|F| + |ξ| or b(t) is not finite", l, bt).at(t).x(x),
                ));
            }
            if bt <= 0.0 {
                if l > 0.0 {
                    return meta(ProbeOutcome::fail(
                        Witness::new("b(t) = 0 while |F| + |ξ| > 0", l, 0.0).at(t).x(x),
                    ));
                }
                continue;
            }
            let shell = radii.iter().position(|q| q >= r).map_or(0, |i| i + 1);
            envelope[shell] = envelope[shell].max(l / bt);
        }
    }
    let mut table = Vec::with_capacity(radii.len());
    let mut running = envelope[0];
    for (i, r) in radii.iter().enumerate() {
        running = running.max(envelope[i + 1]);
        table.push(TrendRow { radius: *r, value: running });
    }
    let source = if opts.b.is_some() { "supplied" } else { "empirical sup over |x| ≤ 1" };
    meta(
        ProbeOutcome::pass(format!(
            "b {source}, integrable near both endpoints; c(R) finite on every sampled radius"
        ))
        .with_table(table),
    )
}

/// Sample scale for the bound checks of H4, H6, H7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSampling {
    pub radius: f64,
    pub radii_count: usize,
    pub time_samples: usize,
    pub seed: u64,
}

impl BoundSampling {
    fn from_options(o: &ProbeOptions) -> Self {
        let dirs = 16;
        Self {
            radius: o.radius,
            radii_count: (o.samples / dirs).clamp(4, 200),
            time_samples: o.time_samples,
            seed: o.seed,
        }
    }
}

const K_GRID: [f64; 4] = [0.2, 0.5, 1.0, 2.0];
const ORDER_RADIUS: f64 = 1e12;

/// H4: `φ*(ξ/d(t)) ≤ φ₀(x) + 1` for every `ξ ∈ ∂F(t,x)`, with `φ₀ ≪ φ`.
pub fn probe_h4(
    f: &Potential,
    phi: &GFunction,
    phi0: &GFunction,
    d: &TimeExpr,
    s: &BoundSampling,
) -> ProbeOutcome {
    let dim = f.dim();
    let dirs = probe_directions(dim, s.seed);
    let radii = sampling::log_space(1e-3, s.radius, s.radii_count);
    let pts = shell_points(dim, &radii, &dirs);
    let meta = |o: ProbeOutcome| o.with_meta(radii.clone(), pts.len() * s.time_samples, s.seed);

    let order = order_llcurly(phi0, phi, &K_GRID, ORDER_RADIUS);
    if let Some((k, x)) = &order.witness {
        let kx: Vec<f64> = x.iter().map(|v| k * v).collect();
        return meta(ProbeOutcome::fail(
            Witness::new(
                format!("φ₀ ≪ φ fails: φ₀(x) > φ(kx) for k = {k} beyond R = {:e}", ORDER_RADIUS / 10.0),
                phi0.evaluate(x),
                phi.evaluate(&kx),
            )
            .x(x),
        ));
    }
    for t in time_grid(f.horizon(), s.time_samples) {
        let dt = d.eval(t);
        if !(dt > 0.0 && dt.is_finite()) {
            return meta(ProbeOutcome::fail(
                Witness::new("d(t) must be positive and finite", 0.0, dt).at(t),
            ));
        }
        for (_, x) in &pts {
            let rhs = phi0.evaluate(x) + 1.0;
            for xi in f.subdiff(t, x).extreme_points(&dirs) {
                let scaled: Vec<f64> = xi.iter().map(|v| v / dt).collect();
                let lhs = phi.conjugate(&scaled);
                if violates(lhs, rhs) {
                    return meta(ProbeOutcome::fail(
                        Witness::new("φ*(ξ/d(t)) > φ₀(x) + 1", lhs, rhs).at(t).x(x).xi(&xi),
                    ));
                }
            }
        }
    }
    meta(ProbeOutcome::pass(format!(
        "no violation on |x| ≤ {:e}; φ₀ ≪ φ on k ∈ {:?}",
        s.radius, K_GRID
    )))
}

/// Trend of `m(R) = min_{|x| = R} g(x)` over `radii`. Passes when the last
/// at least 4 steps increase, `m` ends positive and exceeds `10·|m(R₀)|`.
fn trend_probe<G: Fn(&[f64]) -> f64>(
    dim: usize,
    radii: &[f64],
    seed: u64,
    g: G,
    what: &str,
) -> ProbeOutcome {
    let dirs = probe_directions(dim, seed);
    let mut table = Vec::with_capacity(radii.len());
    let mut argmins = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best = (f64::INFINITY, Vec::new());
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            let v = g(&x);
            if !(v >= best.0) {
                best = (v, x);
            }
        }
        table.push(TrendRow { radius: r, value: best.0 });
        argmins.push(best.1);
    }
    let meta = |o: ProbeOutcome| o.with_meta(radii.to_vec(), radii.len() * dirs.len(), seed);
    let n = table.len();
    if n < 2 {
        return meta(ProbeOutcome::not_probed("need at least two radii"));
    }
    let rising = table.windows(2).rev().take_while(|w| w[1].value > w[0].value).count();
    let first = table[0].value;
    let last = table[n - 1].value;
    if rising < crate::gfunc::MIN_TREND_STEPS {
        let k = n - 1 - rising;
        let w = Witness::new(
            format!("{what} does not increase from R = {:e} to R = {:e}", table[k - 1].radius, table[k].radius),
            table[k - 1].value,
            table[k].value,
        )
        .x(&argmins[k]);
        return meta(ProbeOutcome::fail(w).with_table(table));
    }
    if !(last > 0.0 && last > 10.0 * first.abs()) {
        let w = Witness::new(
            format!("{what} at the largest radius does not exceed 10·|m(R₀)|"),
            10.0 * first.abs(),
            last,
        )
        .x(&argmins[n - 1]);
        return meta(ProbeOutcome::fail(w).with_table(table));
    }
    meta(
        ProbeOutcome::pass(format!(
            "{what} increased over the last {rising} radius steps, from {first:e} to {last:e}"
        ))
        .with_table(table),
    )
}

const TIME_INTEGRAL_TOL: f64 = 1e-8;

/// H5: `(1/φ₀(2x)) ∫₀^T F(t,x) dt → ∞`.
pub fn probe_h5(f: &Potential, phi0: &GFunction, radii: &[f64], seed: u64) -> ProbeOutcome {
    trend_probe(
        f.dim(),
        radii,
        seed,
        |x| {
            let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
            f.time_integral(x, TIME_INTEGRAL_TOL) / phi0.evaluate(&x2)
        },
        "m(R) = min (1/φ₀(2x)) ∫F(t,x)dt",
    )
}

/// H8: `∫₀^T F(t,x) dt → ∞`.
pub fn probe_h8(f: &Potential, radii: &[f64], seed: u64) -> ProbeOutcome {
    trend_probe(f.dim(), radii, seed, |x| f.time_integral(x, TIME_INTEGRAL_TOL), "m(R) = min ∫F(t,x)dt")
}

/// Pairs `(x, y)` for two-point checks: structured collinear pairs on a log
/// grid plus uniform random pairs in the ball.
fn pair_samples(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dirs = probe_directions(dim, seed);
    let mut pairs = Vec::with_capacity(count);
    for r in sampling::log_space(1e-3, radius, 20) {
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            pairs.push((x.clone(), x.clone()));
            pairs.push((x.clone(), vec![0.0; dim]));
            pairs.push((x.clone(), x.iter().map(|v| -v).collect()));
        }
    }
    let mut rng = sampling::rng(seed);
    while pairs.len() < count {
        let r = radius * 10f64.powf(-3.0 * rng.gen::<f64>());
        pairs.push((sampling::ball_point(&mut rng, dim, r), sampling::ball_point(&mut rng, dim, r)));
    }
    pairs
}

/// H6: `F(t, λ(x+y)) ≤ μ (F(t,x) + F(t,y))`.
pub fn probe_h6(f: &Potential, lambda: f64, mu: f64, s: &BoundSampling, pairs: usize) -> ProbeOutcome {
    let dim = f.dim();
    let sample = pair_samples(dim, s.radius, pairs, s.seed);
    let meta = |o: ProbeOutcome| o.with_meta(vec![s.radius], sample.len() * s.time_samples, s.seed);
    for t in time_grid(f.horizon(), s.time_samples) {
        for (x, y) in &sample {
            let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| lambda * (a + b)).collect();
            let lhs = f.value(t, &z);
            let rhs = mu * (f.value(t, x) + f.value(t, y));
            if violates(lhs, rhs) {
                return meta(ProbeOutcome::fail(
                    Witness::new(format!("F(t, λ(x+y)) > μ(F(t,x) + F(t,y)) with λ = {lambda}, μ = {mu}"), lhs, rhs)
                        .at(t)
                        .x(x)
                        .y(y),
                ));
            }
        }
    }
    meta(ProbeOutcome::pass(format!("λ = {lambda}, μ = {mu}: no violation on |x|, |y| ≤ {:e}", s.radius)))
}

/// H7: `F(t,x) ≤ b(t)(φ₀(x) + 1)` with `φ₀ ≪ φ`. Without a supplied `b` the
/// envelope `sup F/(φ₀+1)` must stop growing with the radius.
pub fn probe_h7(
    f: &Potential,
    phi: &GFunction,
    phi0: &GFunction,
    b: Option<&TimeExpr>,
    s: &BoundSampling,
) -> ProbeOutcome {
    let dim = f.dim();
    let dirs = probe_directions(dim, s.seed);
    let radii = sampling::log_space(1e-3, s.radius, s.radii_count);
    let pts = shell_points(dim, &radii, &dirs);
    let meta = |o: ProbeOutcome| o.with_meta(radii.clone(), pts.len() * s.time_samples, s.seed);
    let order = order_llcurly(phi0, phi, &K_GRID, ORDER_RADIUS);
    if let Some((k, x)) = &order.witness {
        let kx: Vec<f64> = x.iter().map(|v| k * v).collect();
        return meta(ProbeOutcome::fail(
            Witness::new(format!("φ₀ ≪ φ fails: φ₀(x) > φ(kx) for k = {k}"), phi0.evaluate(x), phi.evaluate(&kx))
                .x(x),
        ));
    }
    let times = time_grid(f.horizon(), s.time_samples);
    if let Some(b) = b {
        if let Some(w) = l1_witness(&|t| b.eval(t), f.horizon()) {
            return meta(ProbeOutcome::fail(w));
        }
        for &t in &times {
            let bt = b.eval(t);
            for (_, x) in &pts {
                let lhs = f.value(t, x);
                let rhs = bt * (phi0.evaluate(x) + 1.0);
                if violates(lhs, rhs) {
                    return meta(ProbeOutcome::fail(
                        Witness::new("F(t,x) > b(t)(φ₀(x) + 1)", lhs, rhs).at(t).x(x),
                    ));
                }
            }
        }
        return meta(ProbeOutcome::pass("supplied b; no violation"));
    }
    // envelope e(R) = sup_{t, |x| = R} F⁺/(φ₀+1), running maximum in R
    let mut table = Vec::with_capacity(radii.len());
    let mut running = 0.0_f64;
    let mut arg = (0.0, vec![0.0; dim]);
    for &r in &radii {
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            let denom = phi0.evaluate(&x) + 1.0;
            for &t in &times {
                let v = f.value(t, &x).max(0.0) / denom;
                if v > running {
                    running = v;
                    arg = (t, x.clone());
                }
            }
        }
        table.push(TrendRow { radius: r, value: running });
    }
    let n = table.len();
    let back = (n / 3).max(1);
    let earlier = table[n - 1 - back].value;
    if !running.is_finite() || (earlier > 0.0 && running > 2.0 * earlier) {
        let (t, x) = arg;
        return meta(
            ProbeOutcome::fail(
                Witness::new(
                    format!(
                        "F(t,x)/(φ₀(x)+1) keeps growing: lhs is its value here, rhs twice the \
                         envelope at R = {:e}",
                        table[n - 1 - back].radius
                    ),
                    running,
                    2.0 * earlier,
                )
                .at(t)
                .x(&x),
            )
            .with_table(table),
        );
    }
    meta(ProbeOutcome::pass("empirical b(t) = sup F/(φ₀+1) stays bounded").with_table(table))
}

/// H9: `[F(t,·)]_BO ≤ b(t)` with `[f]_BO = sup |f(x) − f(y)|/(1 + |x − y|)`.
pub fn probe_h9(
    f: &Potential,
    b: Option<&TimeExpr>,
    radius: f64,
    pairs_per_t: usize,
    time_samples: usize,
    seed: u64,
) -> ProbeOutcome {
    let dim = f.dim();
    let radii: Vec<f64> = sampling::log_space(radius * 1e-3, radius, 4);
    let per_radius = (pairs_per_t / radii.len()).max(100);
    let samples: Vec<Vec<(Vec<f64>, Vec<f64>)>> =
        radii.iter().map(|&r| pair_samples(dim, r, per_radius, seed)).collect();
    let meta = |o: ProbeOutcome| o.with_meta(radii.clone(), per_radius * radii.len() * time_samples, seed);
    let times = time_grid(f.horizon(), time_samples);
    let quotient = |t: f64, x: &[f64], y: &[f64]| {
        let dxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        (f.value(t, x) - f.value(t, y)).abs() / (1.0 + norm(&dxy))
    };
    let mut table = Vec::new();
    let mut best_b = 0.0_f64;
    for &t in &times {
        let mut per_radius_best: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        let mut running = (0.0_f64, vec![0.0; dim], vec![0.0; dim]);
        for pairs in &samples {
            for (x, y) in pairs {
                let q = quotient(t, x, y);
                if !(q <= running.0) {
                    running = (q, x.clone(), y.clone());
                }
            }
            per_radius_best.push(running.clone());
        }
        let (est, x, y) = per_radius_best.last().cloned().unwrap();
        if let Some(b) = b {
            let bt = b.eval(t);
            if violates(est, bt) {
                return meta(ProbeOutcome::fail(
                    Witness::new("|F(t,x) − F(t,y)|/(1+|x−y|) > b(t)", est, bt).at(t).x(&x).y(&y),
                ));
            }
        }
        let prev = per_radius_best[per_radius_best.len() - 2].0;
        if !est.is_finite() || (prev > 0.0 && est > 1.5 * prev) {
            let rows: Vec<TrendRow> = radii
                .iter()
                .zip(&per_radius_best)
                .map(|(&radius, (v, _, _))| TrendRow { radius, value: *v })
                .collect();
            return meta(
                ProbeOutcome::fail(
                    Witness::new(
                        "BO quotient grows with the sample radius: lhs is the quotient of this pair, \
                         rhs 1.5× the estimate on the next smaller radius",
                        est,
                        1.5 * prev,
                    )
                    .at(t)
                    .x(&x)
                    .y(&y),
                )
                .with_table(rows),
            );
        }
        if table.is_empty() {
            table = radii
                .iter()
                .zip(&per_radius_best)
                .map(|(&radius, (v, _, _))| TrendRow { radius, value: *v })
                .collect();
        }
        best_b = best_b.max(est);
    }
    let source = if b.is_some() { "supplied b" } else { "empirical b" };
    meta(
        ProbeOutcome::pass(format!("{source}; sup over t of the BO estimate {best_b:.6}")).with_table(table),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PascaOutcome {
    pub pasca1: ProbeOutcome,
    pub pasca2: ProbeOutcome,
    pub pasca3: ProbeOutcome,
}

/// Block-wise growth bounds `|ζ_i| ≤ c_{i1}|x_i|^{α_i} + c_{i2}` and the
/// coercivity ratio `∫F / (|x₁|^{p'α₁} + |x₂|^{q'α₂})`.
pub fn probe_pasca(f: &Potential, o: &PascaOptions, time_samples: usize, seed: u64) -> PascaOutcome {
    let dim = f.dim();
    if o.split == 0 || o.split >= dim {
        let np = || ProbeOutcome::not_probed(format!("split {} does not divide R^{dim} into two blocks", o.split));
        return PascaOutcome { pasca1: np(), pasca2: np(), pasca3: np() };
    }
    let (a1, a2) = o.alphas.unwrap_or((0.9 * (o.p - 1.0), 0.9 * (o.q - 1.0)));
    let b1 = 0..o.split;
    let b2 = o.split..dim;
    let pasca1 = pasca_block(f, b1.clone(), b2.clone(), a1, o.radius, time_samples, seed, "ζ₁");
    let pasca2 = pasca_block(f, b2.clone(), b1.clone(), a2, o.radius, time_samples, seed, "ζ₂");
    let pp = o.p / (o.p - 1.0);
    let qq = o.q / (o.q - 1.0);
    let pasca3 = trend_probe(
        dim,
        &default_trend_radii(),
        seed,
        |x| {
            let den = norm(&x[b1.clone()]).powf(pp * a1) + norm(&x[b2.clone()]).powf(qq * a2);
            f.time_integral(x, TIME_INTEGRAL_TOL) / den
        },
        "∫F / (|x₁|^{p'α₁} + |x₂|^{q'α₂})",
    );
    PascaOutcome { pasca1, pasca2, pasca3 }
}

fn embed(dim: usize, own: &std::ops::Range<usize>, xo: &[f64], other: &std::ops::Range<usize>, xr: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    x[own.clone()].copy_from_slice(xo);
    x[other.clone()].copy_from_slice(xr);
    x
}

#[allow(clippy::too_many_arguments)]
fn pasca_block(
    f: &Potential,
    own: std::ops::Range<usize>,
    other: std::ops::Range<usize>,
    alpha: f64,
    radius: f64,
    time_samples: usize,
    seed: u64,
    name: &str,
) -> ProbeOutcome {
    const SLACK: f64 = 1.05;
    let dim = f.dim();
    let own_dirs = probe_directions(own.len(), seed);
    let other_dirs = probe_directions(other.len(), seed);
    let times = time_grid(f.horizon(), time_samples);
    let zeta = |t: f64, x: &[f64]| {
        f.subdiff(t, x).max_block_norm(own.clone(), &own_dirs)
    };
    let own_radii = sampling::log_space(1e-3, radius, 40);
    let small_other: Vec<Vec<f64>> = std::iter::once(vec![0.0; other.len()])
        .chain(other_dirs.iter().map(|d| d.iter().map(|v| 0.1 * v).collect()))
        .collect();

    // fit with |x_other| small
    let mut c2 = 0.0_f64;
    let mut c1 = 0.0_f64;
    for &t in &times {
        for xr in &small_other {
            c2 = c2.max(zeta(t, &embed(dim, &own, &vec![0.0; own.len()], &other, xr)));
            for &r in own_radii.iter().filter(|r| **r <= 1.0) {
                for d in &own_dirs {
                    let xo: Vec<f64> = d.iter().map(|v| v * r).collect();
                    c2 = c2.max(zeta(t, &embed(dim, &own, &xo, &other, xr)));
                }
            }
        }
    }
    for &t in &times {
        for xr in &small_other {
            for &r in own_radii.iter().filter(|r| **r > 1.0) {
                for d in &own_dirs {
                    let xo: Vec<f64> = d.iter().map(|v| v * r).collect();
                    let z = zeta(t, &embed(dim, &own, &xo, &other, xr));
                    c1 = c1.max((z - c2).max(0.0) / r.powf(alpha));
                }
            }
        }
    }
    let samples = times.len() * own_radii.len() * own_dirs.len() * 2;
    let meta = |o: ProbeOutcome| o.with_meta(own_radii.clone(), samples, seed);
    let fitted = format!("fitted c₁ = {c1:.6}, c₂ = {c2:.6}, α = {alpha}");

    // violation search with |x_other| large
    let far = sampling::log_space(1.0, radius, 20);
    for &t in &times {
        for &r2 in far.iter().rev() {
            for dr in &other_dirs {
                let xr: Vec<f64> = dr.iter().map(|v| v * r2).collect();
                for &r in std::iter::once(&0.0).chain(own_radii.iter()) {
                    for d in &own_dirs {
                        let xo: Vec<f64> = d.iter().map(|v| v * r).collect();
                        let x = embed(dim, &own, &xo, &other, &xr);
                        let z = zeta(t, &x);
                        let bound = SLACK * (c1 * r.powf(alpha) + c2);
                        if violates(z, bound) {
                            return meta(ProbeOutcome::fail(
                                Witness::new(
                                    format!("|{name}| > 1.05·(c₁|x|^α + c₂) with the other block large; {fitted}"),
                                    z,
                                    bound,
                                )
                                .at(t)
                                .x(&x),
                            ));
                        }
                        if r == 0.0 {
                            break;
                        }
                    }
                }
            }
        }
    }
    meta(ProbeOutcome::pass(fitted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub theorem: u8,
    pub hypotheses: Vec<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: ProbeOutcome,
    pub h2: ProbeOutcome,
    pub h3: ProbeOutcome,
    pub h4: ProbeOutcome,
    pub h5: ProbeOutcome,
    pub h6: ProbeOutcome,
    pub h7: ProbeOutcome,
    pub h8: ProbeOutcome,
    pub h9: ProbeOutcome,
    pub pasca1: ProbeOutcome,
    pub pasca2: ProbeOutcome,
    pub pasca3: ProbeOutcome,
    pub phi_n_function: bool,
    pub theorems: Vec<TheoremVerdict>,
    /// Theorems whose listed hypotheses all passed.
    pub theorem_verdict: Vec<u8>,
    pub disclaimer: String,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> Option<&ProbeOutcome> {
        Some(match name {
            "h1" => &self.h1,
            "h2" => &self.h2,
            "h3" => &self.h3,
            "h4" => &self.h4,
            "h5" => &self.h5,
            "h6" => &self.h6,
            "h7" => &self.h7,
            "h8" => &self.h8,
            "h9" => &self.h9,
            "pasca1" => &self.pasca1,
            "pasca2" => &self.pasca2,
            "pasca3" => &self.pasca3,
            _ => return None,
        })
    }

    pub fn theorem_holds(&self, theorem: u8) -> bool {
        self.theorem_verdict.contains(&theorem)
    }

    /// Radius where the H5 (else H8) trend starts increasing for good.
    pub fn coercive_radius(&self) -> Option<f64> {
        for o in [&self.h5, &self.h8] {
            if o.passed() && o.table.len() >= 2 {
                let n = o.table.len();
                let rising = o.table.windows(2).rev().take_while(|w| w[1].value > w[0].value).count();
                return Some(o.table[n - 1 - rising].radius);
            }
        }
        None
    }
}

const THEOREM_HYPOTHESES: [(u8, &[&str]); 3] = [
    (1, &["h1", "h2", "h3", "h4", "h5"]),
    (2, &["h1", "h2", "h3", "h6", "h7", "h8"]),
    (3, &["h1", "h2", "h3", "h8", "h9", "phi_n_function"]),
];

/// Runs every probe whose inputs are available.
pub fn run_probes(phi: &GFunction, f: &Potential, opts: &ProbeOptions) -> crate::error::Result<HypothesisReport> {
    if phi.dim() != f.dim() {
        return Err(crate::error::Error::DimensionMismatch { expected: phi.dim(), got: f.dim() });
    }
    let phi0 = opts.phi0.as_ref().map(crate::gfunc::make_family).transpose()?;
    if let Some(p0) = &phi0 {
        if p0.dim() != f.dim() {
            return Err(crate::error::Error::DimensionMismatch { expected: f.dim(), got: p0.dim() });
        }
    }
    let bounds = BoundSampling::from_options(opts);
    let need_phi0 = || ProbeOutcome::not_probed("requires a φ₀ (probe.phi0)");

    let h1 = probe_h1(phi, opts.radius, opts.samples);
    let h2 = probe_h2(f);
    let h3 = probe_h3(
        f,
        &H3Options {
            b: opts.b.clone(),
            radius: opts.radius,
            radii_count: bounds.radii_count.min(40),
            time_samples: opts.time_samples,
            seed: opts.seed,
        },
    );
    let h4 = match (&phi0, &opts.d) {
        (Some(p0), Some(d)) => probe_h4(f, phi, p0, d, &bounds),
        (None, _) => need_phi0(),
        (_, None) => ProbeOutcome::not_probed("requires d(t) (probe.d)"),
    };
    let h5 = match &phi0 {
        Some(p0) => probe_h5(f, p0, &opts.trend_radii, opts.seed),
        None => need_phi0(),
    };
    let h6 = probe_h6(f, opts.lambda, opts.mu, &bounds, opts.samples);
    let h7 = match &phi0 {
        Some(p0) => probe_h7(f, phi, p0, opts.b.as_ref(), &bounds),
        None => need_phi0(),
    };
    let h8 = probe_h8(f, &opts.trend_radii, opts.seed);
    let h9 = probe_h9(f, opts.b.as_ref(), opts.radius, opts.bo_pairs, 8, opts.seed);
    let pasca = match &opts.pasca {
        Some(po) => probe_pasca(f, po, 8, opts.seed),
        None => {
            let np = || ProbeOutcome::not_probed("requires probe.pasca options");
            PascaOutcome { pasca1: np(), pasca2: np(), pasca3: np() }
        }
    };
    let mut report = HypothesisReport {
        h1,
        h2,
        h3,
        h4,
        h5,
        h6,
        h7,
        h8,
        h9,
        pasca1: pasca.pasca1,
        pasca2: pasca.pasca2,
        pasca3: pasca.pasca3,
        phi_n_function: phi.is_n_function(),
        theorems: Vec::new(),
        theorem_verdict: Vec::new(),
        disclaimer: "probes are falsifiers: pass means no counterexample at the declared sample scale".into(),
    };
    for (theorem, hyps) in THEOREM_HYPOTHESES {
        let holds = hyps.iter().all(|h| match *h {
            "phi_n_function" => report.phi_n_function,
            name => report.get(name).is_some_and(ProbeOutcome::passed),
        });
        report.theorems.push(TheoremVerdict {
            theorem,
            hypotheses: hyps.iter().map(|s| s.to_string()).collect(),
            holds,
        });
        if holds {
            report.theorem_verdict.push(theorem);
        }
    }
    Ok(report)
}
