//! Acceptance criteria 1–8. Runs without the libtest harness so that the
//! per-criterion verdict lines are always printed.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use phi_inclusion::gfunc::profile::{radial_sup, NumericConjugate, Power};
use phi_inclusion::gfunc::{fenchel_young_gap, matuszewska_indices};
use phi_inclusion::orlicz::{amemiya_bound_gap, holder_gap, wirtinger_gap};
use phi_inclusion::sampling::{self, log_space};
use phi_inclusion::{el_residual, make_family, minimize, FamilySpec, GFunction, Init, Trajectory};
use phi_inclusion_cli::commands::{build_problem, check};
use phi_inclusion_cli::config::ProblemConfig;
use rand::Rng;

const CONJ_REL_TOL: f64 = 1e-6;
const DOUBLE_CONJ_REL_TOL: f64 = 1e-5;
const CONJ_BUDGET: Duration = Duration::from_secs(10);
const FY_TOL: f64 = 1e-7;
const HOLDER_TOL: f64 = 1e-6;
const AMEMIYA_TOL: f64 = 1e-8;
const INEQ_BUDGET: Duration = Duration::from_secs(60);
const INDEX_TOL: f64 = 0.05;
const INDEX_IDENTITY_TOL: f64 = 0.03;
const BENCH_LINF_TOL: f64 = 5e-3;
const MIN_ORDER: f64 = 1.0;
const ABS_SUP_TOL: f64 = 1e-2;
const PLAP_RESIDUAL_TOL: f64 = 1e-3;
const WITNESS_RECHECK_TOL: f64 = 1e-9;
const IBP_TOL: f64 = 1e-12;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn config(name: &str) -> ProblemConfig {
    ProblemConfig::from_path(&repo_path(&format!("configs/{name}"))).expect("example config parses")
}

fn power(p: f64, dim: usize) -> GFunction {
    make_family(&FamilySpec::Power { p, dim }).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let radii = log_space(1e-2, 1e2, 200);
    let mut worst = (0.0_f64, 0.0_f64);
    for p in [1.5, 2.0, 3.0, 5.0] {
        let phi = power(p, 1);
        let q = p / (p - 1.0);
        let double = NumericConjugate { inner: Arc::new(Power::new(p).unwrap()) };
        for &r in &radii {
            let want = r.powf(q) / q;
            let e = rel_err(phi.conjugate_numeric(&[r]), want);
            ensure(e <= CONJ_REL_TOL, || format!("p = {p}, ξ = {r}: conjugate rel. error {e:e}"))?;
            let back = radial_sup(&double, r).value;
            let e2 = rel_err(back, r.powf(p) / p);
            ensure(e2 <= DOUBLE_CONJ_REL_TOL, || format!("p = {p}, x = {r}: biconjugate rel. error {e2:e}"))?;
            worst = (worst.0.max(e), worst.1.max(e2));
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < CONJ_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("max rel. error φ* {:.1e}, φ** {:.1e}, {:.2?}", worst.0, worst.1, elapsed))
}

fn random_family<R: Rng>(rng: &mut R, dim: usize) -> FamilySpec {
    let p = rng.gen_range(1.2..5.0);
    match rng.gen_range(0..4) {
        0 => FamilySpec::Power { p, dim },
        1 if dim == 2 => FamilySpec::Block { exponents: vec![p, rng.gen_range(1.2..5.0)], dims: vec![1, 1] },
        2 => FamilySpec::LogTempered { p: rng.gen_range(2.0..4.0), dim },
        _ => FamilySpec::LogDampedCompanion { p, dim },
    }
}

fn random_trajectory<R: Rng>(rng: &mut R, nodes: usize, dim: usize, scale: f64) -> Trajectory {
    let values = (0..nodes * dim).map(|_| rng.gen_range(-scale..scale)).collect();
    Trajectory::new(TAU, dim, values).unwrap()
}

fn criterion_2() -> Verdict {
    const INSTANCES: usize = 1000;
    let start = Instant::now();
    let mut rng = sampling::rng(2024);
    let (mut fy, mut holder, mut amemiya) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut wirtinger_excess = f64::NEG_INFINITY;
    let mut eps_h = 0.0_f64;
    for k in 0..INSTANCES {
        let dim = 1 + k % 2;
        let spec = random_family(&mut rng, dim);
        let phi = make_family(&spec).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let g = fenchel_young_gap(&phi, &x, &xi);
        ensure(g >= -FY_TOL, || format!("Fenchel–Young gap {g:e} for {spec:?} at {x:?}, {xi:?}"))?;
        fy = fy.min(g);

        let nodes = 16;
        let u = random_trajectory(&mut rng, nodes, dim, 3.0);
        let v = random_trajectory(&mut rng, nodes, dim, 3.0);
        let ph = power(rng.gen_range(1.3..5.0), dim);
        let h = holder_gap(&ph, &u, &v).map_err(|e| e.to_string())?;
        ensure(h >= -HOLDER_TOL, || format!("Hölder gap {h:e}"))?;
        holder = holder.min(h);

        let w = wirtinger_gap(&phi, &u);
        ensure(w.gap >= -w.slack, || format!("Wirtinger gap {:e} below −ε_h = {:e}", w.gap, -w.slack))?;
        wirtinger_excess = wirtinger_excess.max(-w.gap);
        eps_h = eps_h.max(w.slack);

        let a = amemiya_bound_gap(&phi, &u);
        ensure(a >= -AMEMIYA_TOL, || format!("Amemiya gap {a:e} for {spec:?}"))?;
        amemiya = amemiya.min(a);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < INEQ_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{INSTANCES} instances: min gaps FY {fy:.1e}, Hölder {holder:.1e}, Amemiya {amemiya:.1e}; \
         Wirtinger worst {:.1e} with ε_h ≤ {eps_h:.1e}; {elapsed:.2?}",
        -wirtinger_excess
    ))
}

fn criterion_3() -> Verdict {
    let mut lines = Vec::new();
    for p in [1.5, 2.0, 3.0, 5.0] {
        let phi = power(p, 2);
        let e = matuszewska_indices(&phi).map_err(|e| e.to_string())?;
        ensure((e.alpha - p).abs() <= INDEX_TOL && (e.beta - p).abs() <= INDEX_TOL, || {
            format!("power({p}): α = {}, β = {}", e.alpha, e.beta)
        })?;
        let c = matuszewska_indices(&phi.conjugate_function()).map_err(|e| e.to_string())?;
        let identity = 1.0 / e.alpha + 1.0 / c.beta;
        ensure((identity - 1.0).abs() <= INDEX_IDENTITY_TOL, || format!("power({p}): 1/α + 1/β* = {identity}"))?;
        lines.push(format!("p={p}: α={:.3} β={:.3} id={identity:.3}", e.alpha, e.beta));
    }
    let block = make_family(&FamilySpec::Block { exponents: vec![2.0, 4.0], dims: vec![1, 1] }).unwrap();
    let e = matuszewska_indices(&block).map_err(|e| e.to_string())?;
    ensure((e.alpha - 2.0).abs() <= INDEX_TOL && (e.beta - 4.0).abs() <= INDEX_TOL, || {
        format!("block(2,4): α = {}, β = {}", e.alpha, e.beta)
    })?;
    lines.push(format!("block(2,4): ({:.3}, {:.3})", e.alpha, e.beta));
    Ok(lines.join("; "))
}

/// `u(t) = a cos(t) e₁` with `a = −1/(1 + ω²)`, `ω = 1`.
fn benchmark_error(nodes: usize) -> Result<(f64, bool), String> {
    let mut cfg = config("smooth_benchmark.conf");
    cfg.nodes = nodes;
    let problem = build_problem(&cfg).map_err(|e| format!("{e:#}"))?;
    let r = minimize(&problem, Init::Auto).map_err(|e| e.to_string())?;
    let a = -1.0 / (1.0 + 1.0);
    let err = (0..nodes)
        .map(|i| (r.trajectory.node(i)[0] - a * r.trajectory.time(i).cos()).abs())
        .fold(0.0, f64::max);
    Ok((err, r.converged))
}

fn criterion_4() -> Verdict {
    let levels = [64, 128, 256, 512];
    let mut errors = Vec::new();
    for n in levels {
        let (e, converged) = benchmark_error(n)?;
        ensure(converged, || format!("N = {n} did not converge"))?;
        errors.push(e);
    }
    let at_256 = errors[2];
    ensure(at_256 <= BENCH_LINF_TOL, || format!("L∞ error {at_256:e} at N = 256"))?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(orders.iter().all(|o| *o >= MIN_ORDER), || format!("orders {orders:?}, errors {errors:?}"))?;
    Ok(format!("L∞ error {at_256:.2e} at N=256; orders {:?}", orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()))
}

fn criterion_5() -> Verdict {
    let cfg = config("abs.conf");
    let problem = build_problem(&cfg).map_err(|e| format!("{e:#}"))?;
    let zero = Trajectory::zeros(problem.period(), problem.nodes, 1).unwrap();
    let at_zero = el_residual(&problem, &zero).map_err(|e| e.to_string())?;
    ensure(at_zero.max == 0.0, || format!("residual at u ≡ 0 is {:e}", at_zero.max))?;
    let r = minimize(&problem, Init::Auto).map_err(|e| e.to_string())?;
    let sup = r.trajectory.sup_norm();
    ensure(sup <= ABS_SUP_TOL, || format!("‖u*‖∞ = {sup:e}"))?;
    ensure(r.converged && r.verification.passed, || format!("solver status {:?}", r.verification))?;
    Ok(format!("‖u*‖∞ = {sup:.1e}, residual at 0 = {}, solver residual {:.1e}", at_zero.max, r.el.max))
}

fn criterion_6a() -> Verdict {
    let cfg = config("p_laplacian.conf");
    let report = check(&cfg).map_err(|e| format!("{e:#}"))?;
    for h in ["h1", "h2", "h3", "h4", "h5"] {
        let o = report.get(h).ok_or_else(|| format!("{h} missing"))?;
        ensure(o.passed(), || format!("{h} failed: {:?}", o.witness))?;
    }
    ensure(report.theorem_holds(1), || "Theorem 1 hypotheses not all passing".into())?;
    ensure(cfg.nodes == 512, || format!("config uses N = {}", cfg.nodes))?;
    let problem = build_problem(&cfg).map_err(|e| format!("{e:#}"))?;
    let r = minimize(&problem, Init::Auto).map_err(|e| e.to_string())?;
    ensure(r.converged, || "solver did not converge".into())?;
    ensure(r.el.max <= PLAP_RESIDUAL_TOL, || format!("EL max residual {:e}", r.el.max))?;
    Ok(format!("H1–H5 pass; N=512 EL max {:.1e}, mean condition {:.1e}", r.el.max, r.el.mean_condition))
}

fn criterion_6b() -> Verdict {
    let cfg = config("pq33.conf");
    let report = check(&cfg).map_err(|e| format!("{e:#}"))?;
    ensure(report.theorem_holds(1), || "Theorem 1 hypotheses not all passing".into())?;
    let potential = phi_inclusion_cli::commands::build_potential(&cfg).map_err(|e| format!("{e:#}"))?;
    let mut lines = Vec::new();
    for (name, k) in [("pasca1", 0usize), ("pasca2", 1usize)] {
        let o = report.get(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(!o.passed(), || format!("{name} unexpectedly passed"))?;
        let w = o.witness.as_ref().ok_or_else(|| format!("{name} has no witness"))?;
        let (t, x) = (w.t.ok_or("witness without t")?, w.x.clone().ok_or("witness without x")?);
        // F is smooth, so ∂_{x_k} F is the k-th gradient component
        let zeta = potential.subdiff(t, &x).base[k].abs();
        ensure((zeta - w.lhs).abs() <= WITNESS_RECHECK_TOL * (1.0 + zeta), || {
            format!("{name}: recomputed |ζ| = {zeta}, witness says {}", w.lhs)
        })?;
        ensure(w.lhs > w.rhs, || format!("{name}: witness does not violate ({} ≤ {})", w.lhs, w.rhs))?;
        lines.push(format!("{name} fails at x = ({:.3e}, {:.3e}): {:.3e} > {:.3e}", x[0], x[1], w.lhs, w.rhs));
    }
    Ok(format!("Theorem 1 hypotheses pass; {}", lines.join("; ")))
}

fn criterion_7() -> Verdict {
    let mut rng = sampling::rng(77);
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let dim = 1 + k % 3;
        let nodes = rng.gen_range(4..64);
        let phi = power(rng.gen_range(1.2..5.0), dim);
        let u = random_trajectory(&mut rng, nodes, dim, 5.0);
        let v = random_trajectory(&mut rng, nodes, dim, 5.0);
        let h = u.step();
        let w: Vec<Vec<f64>> = u.derivative().iter().map(|d| phi.gradient(d)).collect();
        let dv = v.derivative();
        let lhs: f64 = h * (0..nodes).map(|i| w[i].iter().zip(dv.node(i)).map(|(a, b)| a * b).sum::<f64>()).sum::<f64>();
        let rhs: f64 = -h * (0..nodes)
            .map(|i| {
                let prev = &w[(i + nodes - 1) % nodes];
                w[i].iter().zip(prev).zip(v.node(i)).map(|((a, b), x)| (a - b) / h * x).sum::<f64>()
            })
            .sum::<f64>();
        let scale: f64 = h * (0..nodes)
            .map(|i| w[i].iter().map(|a| a * a).sum::<f64>().sqrt() * dv.node(i).iter().map(|a| a * a).sum::<f64>().sqrt())
            .sum::<f64>();
        let rel = (lhs - rhs).abs() / (1.0 + scale);
        ensure(rel <= IBP_TOL, || format!("pair {k}: |lhs − rhs| = {:e}, scale {scale:e}", (lhs - rhs).abs()))?;
        worst = worst.max(rel);
    }
    Ok(format!("100 pairs, max |lhs − rhs|/(1 + Σ|w||v'|h) = {worst:.1e}"))
}

fn criterion_8() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_phi-inclusion");
    let cfg = repo_path("configs/p_laplacian.conf");
    let run = |dir: &std::path::Path| -> Result<(Vec<u8>, Vec<u8>), String> {
        let status = Command::new(bin)
            .args(["solve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir)
            .args(["--seed", "99"])
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), || format!("exit status {status}"))?;
        let report = std::fs::read(dir.join("report.json")).map_err(|e| e.to_string())?;
        let csv = std::fs::read(dir.join("trajectory.csv")).map_err(|e| e.to_string())?;
        Ok((report, csv))
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, ca) = run(a.path())?;
    let (rb, cb) = run(b.path())?;
    ensure(ra == rb, || "report.json differs between runs".into())?;
    ensure(ca == cb, || "trajectory.csv differs between runs".into())?;
    Ok(format!("two solve runs: identical report.json ({} bytes) and trajectory.csv", ra.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 conjugation", criterion_1),
        ("2 inequalities", criterion_2),
        ("3 indices", criterion_3),
        ("4 smooth benchmark", criterion_4),
        ("5 nonsmooth benchmark", criterion_5),
        ("6a p-Laplacian example", criterion_6a),
        ("6b (3,3) example", criterion_6b),
        ("7 integration by parts", criterion_7),
        ("8 determinism", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let verdict = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
