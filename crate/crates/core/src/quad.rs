//! Quadrature wrappers over the `quadrature` crate's double-exponential rule.

/// Adaptive integral of `f` over `[a, b]` to absolute error `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quadrature::integrate(f, a, b, tol).integral
}

/// Integral over `[0, s]` of a nonnegative integrand whose mass may sit at
/// very large arguments. The part beyond 1 is computed in `u = ln r` and the
/// tolerance is relative there.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: F, s: f64, abs_tol: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s <= 1.0 {
        return integrate(&f, 0.0, s, abs_tol);
    }
    let head = integrate(&f, 0.0, 1.0, abs_tol);
    let top = s.ln();
    // A crude scale estimate so the tail tolerance tracks the tail magnitude.
    let scale = (f(s) * s).abs().max(1.0);
    let tail = integrate(|u: f64| {
        let r = u.exp();
        f(r) * r
    }, 0.0, top, abs_tol.max(1e-13 * scale));
    head + tail
}

/// Cumulative integrals `∫₀^{s_k} f` of a fixed integrand on the geometric
/// grid `s_k = s₀ ρ^k`, so that `∫₀^s f` costs one Gauss–Legendre cell.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    start: f64,
    ln_ratio: f64,
    cum: Vec<f64>,
    rule: gauss_quad::GaussLegendre,
}

const TABLE_START: f64 = 1e-3;
const TABLE_RATIO: f64 = 1.1;
const TABLE_END: f64 = 1e160;
const CELL_DEGREE: usize = 10;

impl CumulativeTable {
    pub fn new<F: Fn(f64) -> f64>(f: F, head_tol: f64) -> Self {
        let rule = gauss_quad::GaussLegendre::new(
            std::num::NonZeroUsize::new(CELL_DEGREE).expect("nonzero degree"),
        );
        let ln_ratio = TABLE_RATIO.ln();
        let cells = ((TABLE_END / TABLE_START).ln() / ln_ratio).ceil() as usize;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(integrate(&f, 0.0, TABLE_START, head_tol));
        let mut lo = TABLE_START;
        for _ in 0..cells {
            let hi = lo * TABLE_RATIO;
            let next = cum.last().copied().unwrap_or(0.0) + rule.integrate(lo, hi, &f);
            cum.push(next);
            lo = hi;
        }
        Self { start: TABLE_START, ln_ratio, cum, rule }
    }

    /// `∫₀^s f`; below the grid and beyond it adaptive quadrature is used.
    pub fn integral<F: Fn(f64) -> f64>(&self, f: F, s: f64, tol: f64) -> f64 {
        if s <= self.start {
            return integrate(&f, 0.0, s, tol);
        }
        let k = ((s / self.start).ln() / self.ln_ratio).floor() as usize;
        if k + 1 >= self.cum.len() {
            return integrate_radial(f, s, tol);
        }
        let node = self.start * (self.ln_ratio * k as f64).exp();
        let node = node.min(s);
        self.cum[k] + self.rule.integrate(node, s, &f)
    }
}
