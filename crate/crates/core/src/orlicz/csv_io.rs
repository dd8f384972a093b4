//! Trajectory CSV: header `t,u1,...,un`, one row per node, node 0 first.

use std::io::{Read, Write};

use super::Trajectory;
use crate::error::{Error, Result};

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

pub fn write_trajectory_csv<W: Write>(u: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=u.dim()).map(|k| format!("u{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..u.nodes() {
        let mut row = vec![format!("{:?}", u.time(i))];
        row.extend(u.node(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Reads a trajectory; the period is `N·(t_1 − t_0)` and every row must sit
/// on the uniform grid within `1e-9·T`.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(Error::Csv("header must be t,u1,...,un".into()));
    }
    for (k, name) in header.iter().skip(1).enumerate() {
        if name != format!("u{}", k + 1) {
            return Err(Error::Csv(format!("unexpected column {name:?}")));
        }
    }
    let dim = header.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Csv(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if nums.len() != dim + 1 {
            return Err(Error::Csv(format!("row {} has {} fields", times.len(), nums.len())));
        }
        times.push(nums[0]);
        values.extend_from_slice(&nums[1..]);
    }
    let n = times.len();
    if n < super::MIN_NODES {
        return Err(Error::TooFewNodes(n));
    }
    let h = times[1] - times[0];
    let period = h * n as f64;
    for (i, t) in times.iter().enumerate() {
        if (t - times[0] - i as f64 * h).abs() > 1e-9 * period.abs() || times[0].abs() > 1e-9 * period.abs() {
            return Err(Error::Csv(format!("non-uniform time grid at row {i} (t = {t})")));
        }
    }
    Trajectory::new(period, dim, values)
}
