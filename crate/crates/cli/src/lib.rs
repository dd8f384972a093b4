//! Command-line front end: problem files, commands and JSON reports.

pub mod commands;
pub mod config;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use config::ProblemConfig;
use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Conjugate table, Δ₂/∇₂ report and index estimates of φ.
    Analyze,
    /// Hypothesis probes and theorem verdicts.
    Check,
    /// Minimize the discrete action and verify the EL inclusion.
    Solve,
    /// Solve on N, 2N, ..., 2^levels·N and estimate the order.
    Convergence,
}

#[derive(Debug, Parser)]
#[command(name = "phi-inclusion", version, about = "Periodic φ-Laplacian differential inclusions")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for report.json and CSV outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the `seed` key of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the JSON report to stdout.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
}

/// Result of a command: the report and the process exit code.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
    /// Solved trajectory, for `solve`.
    pub trajectory: Option<phi_inclusion::Trajectory>,
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ProblemConfig> {
    let mut cfg = ProblemConfig::from_path(path)?;
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &ProblemConfig, levels: usize) -> Result<Outcome> {
    let mut report = Report::new(cfg);
    let mut trajectory = None;
    let exit_code = match command {
        Command::Analyze => {
            report.analysis = Some(commands::analyze(cfg)?);
            0
        }
        Command::Check => {
            report.hypotheses = Some(commands::check(cfg)?);
            0
        }
        Command::Solve => {
            let out = commands::solve(cfg)?;
            let code = out.section.exit_code;
            report.solve = Some(out.section);
            trajectory = Some(out.result.trajectory);
            code
        }
        Command::Convergence => {
            let conv = commands::convergence(cfg, levels)?;
            let code = conv.status().exit_code();
            report.convergence = Some(conv);
            code
        }
    };
    Ok(Outcome { report, exit_code, trajectory })
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("report.json"), outcome.report.to_json())?;
    if let Some(u) = &outcome.trajectory {
        let file = fs::File::create(dir.join("trajectory.csv"))?;
        phi_inclusion::write_trajectory_csv(u, file)?;
    }
    if let Some(conv) = &outcome.report.convergence {
        let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
        w.write_record(["nodes", "h", "action", "el_max", "mean_condition", "converged", "change"])?;
        for r in &conv.rows {
            w.write_record([
                r.nodes.to_string(),
                format!("{:?}", r.h),
                format!("{:?}", r.action),
                format!("{:?}", r.el_max),
                format!("{:?}", r.mean_condition),
                r.converged.to_string(),
                r.change.map(|c| format!("{c:?}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn summary(outcome: &Outcome, out: &mut dyn Write) -> Result<()> {
    let r = &outcome.report;
    if let Some(a) = &r.analysis {
        writeln!(out, "{}: strictly convex {}, N-function {}", a.label, a.strictly_convex, a.n_function)?;
        if let Some(i) = &a.indices {
            writeln!(out, "indices alpha = {:.4}, beta = {:.4}", i.alpha, i.beta)?;
        }
        writeln!(out, "delta2 constant: {:?}", a.growth.delta2_constant)?;
    }
    if let Some(h) = &r.hypotheses {
        for v in &h.theorems {
            writeln!(out, "theorem {}: {}", v.theorem, if v.holds { "hypotheses pass" } else { "not established" })?;
        }
        writeln!(out, "{}", h.disclaimer)?;
    }
    if let Some(s) = &r.solve {
        writeln!(
            out,
            "status {:?}: action {:.12}, EL max {:.3e}, mean {:.3e}, {} iterations",
            s.status, s.action, s.el.max, s.el.mean_condition, s.iterations
        )?;
    }
    if let Some(c) = &r.convergence {
        writeln!(out, "{:>8} {:>12} {:>20} {:>12} {:>10}", "N", "h", "action", "EL max", "converged")?;
        for row in &c.rows {
            writeln!(out, "{:>8} {:>12.4e} {:>20.12} {:>12.3e} {:>10}", row.nodes, row.h, row.action, row.el_max, row.converged)?;
        }
        match c.order {
            Some(o) => writeln!(out, "empirical order {o:.3}")?,
            None => writeln!(out, "empirical order unavailable")?,
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code: 0 verified, 1 config or
/// input error, 2 budget exhausted or infinite action, 3 converged but not verified.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| -> Result<i32> {
        let cfg = load_config(&cli.config, cli.seed)?;
        let outcome = execute(cli.command, &cfg, cli.levels)?;
        if let Some(dir) = &cli.out {
            write_outputs(dir, &outcome)?;
        }
        if cli.json {
            out.write_all(outcome.report.to_json().as_bytes())?;
        } else {
            summary(&outcome, out)?;
        }
        Ok(outcome.exit_code)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}
