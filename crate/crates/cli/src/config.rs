//! Problem files: flat `key = value` lines with dotted section keys.
//!
//! ```text
//! period = 2*pi
//! nodes = 256
//! phi.family = power
//! phi.p = 2
//! phi.dim = 1
//! potential.dim = 1
//! potential.term.0.coefficient = cos(t)
//! potential.term.0.kind = affine
//! potential.term.0.weights = 1
//! ```
//!
//! Blank lines and `#` comments are ignored. Missing optional keys take
//! their defaults; unknown keys are errors. [`ProblemConfig::to_text`]
//! writes every key, so `parse(to_text(c)) == c`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::path::Path;
use std::str::FromStr;

use phi_inclusion::sampling::DEFAULT_SEED;
use phi_inclusion::{
    FamilySpec, Method, PascaOptions, PotentialSpec, ProbeOptions, SmoothSpec, SolverOptions, SpatialSpec,
    TermSpec, TimeExpr,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse `{value}`: {msg}")]
    Invalid { key: String, value: String, msg: String },
    #[error("unknown keys: {}", .0.join(", "))]
    Unknown(Vec<String>),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Options of the `analyze` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Outer radius of the Δ₂/∇₂ samples.
    pub radius: f64,
    pub samples: usize,
    /// Number of log-spaced radii in the conjugate table.
    pub conjugate_points: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { radius: 1e3, samples: 2000, conjugate_points: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    /// Period `T`; any constant time expression such as `2*pi`.
    pub period: TimeExpr,
    pub nodes: usize,
    /// Seeds both the solver starts and the probes.
    pub seed: u64,
    pub phi: FamilySpec,
    pub potential: Option<PotentialSpec>,
    pub solver: SolverOptions,
    pub probe: ProbeOptions,
    pub analysis: AnalysisOptions,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let r = Reader::new(text)?;
        let period_key = "period";
        let period: TimeExpr = r.parse_with(period_key, TimeExpr::parse)?.unwrap_or_else(|| TimeExpr::parse("2*pi").unwrap());
        if !period.is_constant() {
            return Err(r.invalid(period_key, "period must not depend on t"));
        }
        let seed = r.opt("seed")?.unwrap_or(DEFAULT_SEED);
        let phi = read_family(&r, "phi.")?;
        let potential = if r.has_prefix("potential.") { Some(read_potential(&r)?) } else { None };
        let solver = read_solver(&r, seed)?;
        let probe = read_probe(&r, seed)?;
        let d = AnalysisOptions::default();
        let analysis = AnalysisOptions {
            radius: r.opt("analysis.radius")?.unwrap_or(d.radius),
            samples: r.opt("analysis.samples")?.unwrap_or(d.samples),
            conjugate_points: r.opt("analysis.conjugate_points")?.unwrap_or(d.conjugate_points),
        };
        let cfg = Self { period, nodes: r.opt("nodes")?.unwrap_or(256), seed, phi, potential, solver, probe, analysis };
        r.finish()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Value of `T`.
    pub fn horizon(&self) -> f64 {
        self.period.eval(0.0)
    }

    /// Replaces the seed everywhere it is used.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.solver.seed = seed;
        self.probe.seed = seed;
    }

    /// Canonical key/value pairs in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut w = Writer::default();
        w.put("period", self.period.source());
        w.put("nodes", self.nodes);
        w.put("seed", self.seed);
        write_family(&mut w, "phi.", &self.phi);
        if let Some(p) = &self.potential {
            write_potential(&mut w, p);
        }
        write_solver(&mut w, &self.solver);
        write_probe(&mut w, &self.probe);
        w.num("analysis.radius", self.analysis.radius);
        w.put("analysis.samples", self.analysis.samples);
        w.put("analysis.conjugate_points", self.analysis.conjugate_points);
        w.0
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Sorted key/value map, used as the `config_echo` section of reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries().into_iter().collect()
    }
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
    used: RefCell<BTreeSet<String>>,
}

impl Reader {
    fn new(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{content}`") });
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line, msg: format!("bad key `{key}`") });
            }
            if entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
        }
        Ok(Self { entries, used: RefCell::new(BTreeSet::new()) })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key).map(|(_, v)| v.as_str());
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        let value = self.entries.get(key).map(|(_, v)| v.clone()).unwrap_or_default();
        ConfigError::Invalid { key: key.to_string(), value, msg: msg.into() }
    }

    fn parse_with<T, E: ToString>(&self, key: &str, f: impl Fn(&str) -> std::result::Result<T, E>) -> Result<Option<T>> {
        self.raw(key).map(|v| f(v).map_err(|e| self.invalid(key, e.to_string()))).transpose()
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: ToString,
    {
        self.parse_with(key, str::parse::<T>)
    }

    fn req<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: ToString,
    {
        self.opt(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: ToString,
    {
        self.parse_with(key, |v| {
            v.split(',').map(|s| s.trim().parse::<T>().map_err(|e| e.to_string())).collect::<std::result::Result<Vec<T>, String>>()
        })
    }

    fn req_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: ToString,
    {
        self.list(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn expr(&self, key: &str) -> Result<Option<TimeExpr>> {
        self.parse_with(key, TimeExpr::parse)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    /// Indices `k` of keys `prefix.k.*`; they must be `0..n`.
    fn indices(&self, prefix: &str) -> Result<usize> {
        let mut found = BTreeSet::new();
        for key in self.entries.keys() {
            if let Some(rest) = key.strip_prefix(prefix) {
                let idx = rest.split('.').next().unwrap_or("");
                let k: usize = idx.parse().map_err(|_| self.invalid(key, format!("`{idx}` is not an index")))?;
                found.insert(k);
            }
        }
        let n = found.len();
        if found.iter().copied().ne(0..n) {
            return Err(ConfigError::Missing(format!("{prefix}{}", (0..n).find(|k| !found.contains(k)).unwrap_or(n))));
        }
        Ok(n)
    }

    fn finish(self) -> Result<()> {
        let used = self.used.into_inner();
        let unknown: Vec<String> = self.entries.into_keys().filter(|k| !used.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown(unknown))
        }
    }
}

#[derive(Default)]
struct Writer(Vec<(String, String)>);

impl Writer {
    fn put(&mut self, key: &str, v: impl ToString) {
        self.0.push((key.to_string(), v.to_string()));
    }

    /// Shortest representation that parses back to the same `f64`.
    fn num(&mut self, key: &str, v: f64) {
        self.put(key, format!("{v:?}"));
    }

    fn nums(&mut self, key: &str, v: &[f64]) {
        self.put(key, v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "));
    }

    fn ints(&mut self, key: &str, v: &[usize]) {
        self.put(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
    }
}

fn read_family(r: &Reader, prefix: &str) -> Result<FamilySpec> {
    let key = |k: &str| format!("{prefix}{k}");
    let family: String = r.req(&key("family"))?;
    Ok(match family.as_str() {
        "power" => FamilySpec::Power { p: r.req(&key("p"))?, dim: r.req(&key("dim"))? },
        "log_tempered" => FamilySpec::LogTempered { p: r.req(&key("p"))?, dim: r.req(&key("dim"))? },
        "log_damped_companion" => FamilySpec::LogDampedCompanion { p: r.req(&key("p"))?, dim: r.req(&key("dim"))? },
        "block" => FamilySpec::Block { exponents: r.req_list(&key("exponents"))?, dims: r.req_list(&key("dims"))? },
        "scaled" => FamilySpec::Scaled {
            factor: r.req(&key("factor"))?,
            inner: Box::new(read_family(r, &key("inner."))?),
        },
        other => return Err(r.invalid(&key("family"), format!("unknown family `{other}`"))),
    })
}

fn write_family(w: &mut Writer, prefix: &str, spec: &FamilySpec) {
    let key = |k: &str| format!("{prefix}{k}");
    match spec {
        FamilySpec::Power { p, dim } | FamilySpec::LogTempered { p, dim } | FamilySpec::LogDampedCompanion { p, dim } => {
            let name = match spec {
                FamilySpec::Power { .. } => "power",
                FamilySpec::LogTempered { .. } => "log_tempered",
                _ => "log_damped_companion",
            };
            w.put(&key("family"), name);
            w.num(&key("p"), *p);
            w.put(&key("dim"), dim);
        }
        FamilySpec::Block { exponents, dims } => {
            w.put(&key("family"), "block");
            w.nums(&key("exponents"), exponents);
            w.ints(&key("dims"), dims);
        }
        FamilySpec::Scaled { factor, inner } => {
            w.put(&key("family"), "scaled");
            w.num(&key("factor"), *factor);
            write_family(w, &key("inner."), inner);
        }
    }
}

fn read_smooth(r: &Reader, prefix: &str, kind: &str) -> Result<Option<SmoothSpec>> {
    let key = |k: &str| format!("{prefix}{k}");
    Ok(Some(match kind {
        "affine" => SmoothSpec::Affine { weights: r.req_list(&key("weights"))?, offset: r.opt(&key("offset"))?.unwrap_or(0.0) },
        "phi" => SmoothSpec::Phi { phi: read_family(r, &key("phi."))?, start: r.opt(&key("start"))?.unwrap_or(0) },
        "bilinear" => SmoothSpec::Bilinear { i: r.req(&key("i"))?, j: r.req(&key("j"))? },
        "constant" => SmoothSpec::Constant { value: r.req(&key("value"))? },
        _ => return Ok(None),
    }))
}

fn write_smooth(w: &mut Writer, prefix: &str, spec: &SmoothSpec) {
    let key = |k: &str| format!("{prefix}{k}");
    match spec {
        SmoothSpec::Affine { weights, offset } => {
            w.put(&key("kind"), "affine");
            w.nums(&key("weights"), weights);
            w.num(&key("offset"), *offset);
        }
        SmoothSpec::Phi { phi, start } => {
            w.put(&key("kind"), "phi");
            write_family(w, &key("phi."), phi);
            w.put(&key("start"), start);
        }
        SmoothSpec::Bilinear { i, j } => {
            w.put(&key("kind"), "bilinear");
            w.put(&key("i"), i);
            w.put(&key("j"), j);
        }
        SmoothSpec::Constant { value } => {
            w.put(&key("kind"), "constant");
            w.num(&key("value"), *value);
        }
    }
}

fn read_potential(r: &Reader) -> Result<PotentialSpec> {
    let dim = r.req("potential.dim")?;
    let count = r.indices("potential.term.")?;
    let mut terms = Vec::with_capacity(count);
    for k in 0..count {
        let prefix = format!("potential.term.{k}.");
        let key = |s: &str| format!("{prefix}{s}");
        let coefficient = r.expr(&key("coefficient"))?.unwrap_or_else(|| TimeExpr::constant(1.0));
        let kind: String = r.req(&key("kind"))?;
        let spatial = match kind.as_str() {
            "abs" => SpatialSpec::AbsNorm { start: r.opt(&key("start"))?.unwrap_or(0), len: r.req(&key("len"))? },
            "max" => {
                let pieces_prefix = key("piece.");
                let n = r.indices(&pieces_prefix)?;
                let mut pieces = Vec::with_capacity(n);
                for j in 0..n {
                    let pp = format!("{pieces_prefix}{j}.");
                    let pk: String = r.req(&format!("{pp}kind"))?;
                    let piece = read_smooth(r, &pp, &pk)?
                        .ok_or_else(|| r.invalid(&format!("{pp}kind"), format!("`{pk}` is not a smooth kind")))?;
                    pieces.push(piece);
                }
                SpatialSpec::MaxOf { pieces }
            }
            other => SpatialSpec::Smooth {
                f: read_smooth(r, &prefix, other)?.ok_or_else(|| r.invalid(&key("kind"), format!("unknown term kind `{other}`")))?,
            },
        };
        terms.push(TermSpec { coefficient, spatial });
    }
    Ok(PotentialSpec { dim, terms })
}

fn write_potential(w: &mut Writer, spec: &PotentialSpec) {
    w.put("potential.dim", spec.dim);
    for (k, term) in spec.terms.iter().enumerate() {
        let prefix = format!("potential.term.{k}.");
        w.put(&format!("{prefix}coefficient"), term.coefficient.source());
        match &term.spatial {
            SpatialSpec::Smooth { f } => write_smooth(w, &prefix, f),
            SpatialSpec::AbsNorm { start, len } => {
                w.put(&format!("{prefix}kind"), "abs");
                w.put(&format!("{prefix}start"), start);
                w.put(&format!("{prefix}len"), len);
            }
            SpatialSpec::MaxOf { pieces } => {
                w.put(&format!("{prefix}kind"), "max");
                for (j, piece) in pieces.iter().enumerate() {
                    write_smooth(w, &format!("{prefix}piece.{j}."), piece);
                }
            }
        }
    }
}

fn read_solver(r: &Reader, seed: u64) -> Result<SolverOptions> {
    let d = SolverOptions::default();
    let method = match r.raw("solver.method") {
        None => d.method,
        Some("accelerated") => Method::Accelerated,
        Some("subgradient") => Method::Subgradient,
        Some(_) => return Err(r.invalid("solver.method", "expected `accelerated` or `subgradient`")),
    };
    Ok(SolverOptions {
        method,
        step_a: r.opt("solver.step_a")?.unwrap_or(d.step_a),
        step_b: r.opt("solver.step_b")?.unwrap_or(d.step_b),
        smoothing: r.opt("solver.smoothing")?.unwrap_or(d.smoothing),
        smoothing_mu0: r.opt("solver.smoothing_mu0")?.unwrap_or(d.smoothing_mu0),
        smoothing_mu_min: r.opt("solver.smoothing_mu_min")?.unwrap_or(d.smoothing_mu_min),
        starts: r.opt("solver.starts")?.unwrap_or(d.starts),
        start_radius: r.opt("solver.start_radius")?.or(d.start_radius),
        max_iter: r.opt("solver.max_iter")?.unwrap_or(d.max_iter),
        tol_a: r.opt("solver.tol_a")?.unwrap_or(d.tol_a),
        tol_r: r.opt("solver.tol_r")?.unwrap_or(d.tol_r),
        tol_m: r.opt("solver.tol_m")?.unwrap_or(d.tol_m),
        patience: r.opt("solver.patience")?.unwrap_or(d.patience),
        seed,
    })
}

fn write_solver(w: &mut Writer, s: &SolverOptions) {
    w.put("solver.method", match s.method {
        Method::Accelerated => "accelerated",
        Method::Subgradient => "subgradient",
    });
    w.num("solver.step_a", s.step_a);
    w.num("solver.step_b", s.step_b);
    w.put("solver.smoothing", s.smoothing);
    w.num("solver.smoothing_mu0", s.smoothing_mu0);
    w.num("solver.smoothing_mu_min", s.smoothing_mu_min);
    w.put("solver.starts", s.starts);
    if let Some(r0) = s.start_radius {
        w.num("solver.start_radius", r0);
    }
    w.put("solver.max_iter", s.max_iter);
    w.num("solver.tol_a", s.tol_a);
    w.num("solver.tol_r", s.tol_r);
    w.num("solver.tol_m", s.tol_m);
    w.put("solver.patience", s.patience);
}

fn read_probe(r: &Reader, seed: u64) -> Result<ProbeOptions> {
    let d = ProbeOptions::default();
    let phi0 = if r.has_prefix("probe.phi0.") { Some(read_family(r, "probe.phi0.")?) } else { None };
    let pasca = if r.has_prefix("probe.pasca.") {
        let a1: Option<f64> = r.opt("probe.pasca.alpha1")?;
        let a2: Option<f64> = r.opt("probe.pasca.alpha2")?;
        let alphas = match (a1, a2) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(ConfigError::Missing("probe.pasca.alpha1 and probe.pasca.alpha2 go together".into())),
        };
        Some(PascaOptions {
            p: r.req("probe.pasca.p")?,
            q: r.req("probe.pasca.q")?,
            split: r.req("probe.pasca.split")?,
            alphas,
            radius: r.opt("probe.pasca.radius")?.unwrap_or(1e4),
        })
    } else {
        None
    };
    Ok(ProbeOptions {
        phi0,
        d: r.expr("probe.d")?,
        b: r.expr("probe.b")?,
        lambda: r.opt("probe.lambda")?.unwrap_or(d.lambda),
        mu: r.opt("probe.mu")?.unwrap_or(d.mu),
        radius: r.opt("probe.radius")?.unwrap_or(d.radius),
        samples: r.opt("probe.samples")?.unwrap_or(d.samples),
        time_samples: r.opt("probe.time_samples")?.unwrap_or(d.time_samples),
        trend_radii: r.list("probe.trend_radii")?.unwrap_or(d.trend_radii),
        bo_pairs: r.opt("probe.bo_pairs")?.unwrap_or(d.bo_pairs),
        seed,
        pasca,
    })
}

fn write_probe(w: &mut Writer, p: &ProbeOptions) {
    if let Some(phi0) = &p.phi0 {
        write_family(w, "probe.phi0.", phi0);
    }
    if let Some(d) = &p.d {
        w.put("probe.d", d.source());
    }
    if let Some(b) = &p.b {
        w.put("probe.b", b.source());
    }
    w.num("probe.lambda", p.lambda);
    w.num("probe.mu", p.mu);
    w.num("probe.radius", p.radius);
    w.put("probe.samples", p.samples);
    w.put("probe.time_samples", p.time_samples);
    w.nums("probe.trend_radii", &p.trend_radii);
    w.put("probe.bo_pairs", p.bo_pairs);
    if let Some(pasca) = &p.pasca {
        w.num("probe.pasca.p", pasca.p);
        w.num("probe.pasca.q", pasca.q);
        w.put("probe.pasca.split", pasca.split);
        if let Some((a1, a2)) = pasca.alphas {
            w.num("probe.pasca.alpha1", a1);
            w.num("probe.pasca.alpha2", a2);
        }
        w.num("probe.pasca.radius", pasca.radius);
    }
}
