//! Deterministic sample grids shared by the probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vecops::norm;

pub const DEFAULT_SEED: u64 = 0x5e_ed0f_1a91;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points log-spaced on `[lo, hi]`, both ends included.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn lin_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Unit directions in R^n: the signed coordinate axes, the normalized
/// all-ones diagonals, then seeded Gaussian directions up to `count` in total.
/// For n = 2 an evenly spaced circle is returned instead.
pub fn directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if dim == 2 {
        let m = count.max(8);
        return (0..m)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count.max(2 * dim));
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            out.push(e);
        }
    }
    let diag = 1.0 / (dim as f64).sqrt();
    out.push(vec![diag; dim]);
    out.push(vec![-diag; dim]);
    let mut r = rng(seed);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(&mut r)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Standard normal draw (Box-Muller).
pub fn gaussian<R: Rng>(r: &mut R) -> f64 {
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform point in the Euclidean ball of radius `radius`.
pub fn ball_point<R: Rng>(r: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| gaussian(r)).collect();
    let n = norm(&v).max(1e-300);
    let rad = radius * r.gen::<f64>().powf(1.0 / dim as f64);
    v.iter().map(|x| x * rad / n).collect()
}
