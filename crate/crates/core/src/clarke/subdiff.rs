//! Concrete convex sets `g₀ + Σ_k ρ_k B_k + Σ_m conv(H_m)` representing
//! Clarke subdifferentials of regular potentials.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{dot, norm};

/// A Euclidean ball of radius `radius` living in the coordinates `block`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBall {
    pub block: Range<usize>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdiffSet {
    /// Sum of all single-valued contributions.
    pub base: Vec<f64>,
    pub balls: Vec<BlockBall>,
    /// Vertex lists of convex hulls, one per active max-type term.
    pub hulls: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub distance: f64,
    pub iterations: usize,
}

pub const PROJECTION_TOL: f64 = 1e-10;
pub const PROJECTION_MAX_ITER: usize = 10_000;

impl SubdiffSet {
    pub fn singleton(point: Vec<f64>) -> Self {
        Self { base: point, balls: Vec::new(), hulls: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.balls.iter().all(|b| b.radius == 0.0) && self.hulls.iter().all(|h| h.len() <= 1)
    }

    /// Support function `σ(v) = sup_{ξ ∈ S} ⟨ξ, v⟩`.
    pub fn support(&self, v: &[f64]) -> f64 {
        let mut s = dot(&self.base, v);
        for b in &self.balls {
            s += b.radius * norm(&v[b.block.clone()]);
        }
        for h in &self.hulls {
            s += h.iter().map(|p| dot(p, v)).fold(f64::NEG_INFINITY, f64::max);
        }
        s
    }

    /// A maximizer of `⟨·, v⟩` over the set.
    pub fn support_point(&self, v: &[f64]) -> Vec<f64> {
        let mut p = self.base.clone();
        for b in &self.balls {
            let vb = &v[b.block.clone()];
            let n = norm(vb);
            if n > 0.0 {
                for (pi, vi) in p[b.block.clone()].iter_mut().zip(vb) {
                    *pi += b.radius * vi / n;
                }
            }
        }
        for h in &self.hulls {
            let best = h
                .iter()
                .max_by(|a, b| dot(a, v).total_cmp(&dot(b, v)))
                .expect("hull has vertices");
            for (pi, bi) in p.iter_mut().zip(best) {
                *pi += bi;
            }
        }
        p
    }

    /// Euclidean projection of `r` onto the set and its distance.
    ///
    /// Balls on pairwise identical-or-disjoint blocks without hulls are
    /// handled in closed form; otherwise accelerated projected gradient runs
    /// over the ball vectors and simplex weights.
    pub fn project(&self, r: &[f64]) -> Result<Projection> {
        assert_eq!(r.len(), self.dim());
        let hulls: Vec<&Vec<Vec<f64>>> = self.hulls.iter().filter(|h| h.len() > 1).collect();
        let mut base = self.base.clone();
        for h in self.hulls.iter().filter(|h| h.len() == 1) {
            for (b, v) in base.iter_mut().zip(&h[0]) {
                *b += v;
            }
        }
        let balls = merged_balls(&self.balls);
        if hulls.is_empty() && blocks_disjoint(&balls) {
            let mut point = base.clone();
            for b in &balls {
                let d: Vec<f64> = r[b.block.clone()]
                    .iter()
                    .zip(&base[b.block.clone()])
                    .map(|(x, y)| x - y)
                    .collect();
                let n = norm(&d);
                let s = if n <= b.radius { 1.0 } else { b.radius / n };
                for (pi, di) in point[b.block.clone()].iter_mut().zip(&d) {
                    *pi += s * di;
                }
            }
            let distance = norm(&crate::vecops::sub(r, &point));
            return Ok(Projection { point, distance, iterations: 0 });
        }
        project_iterative(&base, &balls, &hulls, r)
    }

    pub fn distance(&self, r: &[f64]) -> Result<f64> {
        Ok(self.project(r)?.distance)
    }

    /// The least-norm element.
    pub fn min_norm_element(&self) -> Result<Vec<f64>> {
        Ok(self.project(&vec![0.0; self.dim()])?.point)
    }

    /// Largest `|ξ_B|` over the set restricted to `block`, from support points
    /// along `directions` (exact for one-dimensional blocks).
    pub fn max_block_norm(&self, block: Range<usize>, directions: &[Vec<f64>]) -> f64 {
        let mut best: f64 = 0.0;
        for d in directions {
            let mut v = vec![0.0; self.dim()];
            v[block.clone()].copy_from_slice(d);
            best = best.max(norm(&self.support_point(&v)[block.clone()]));
        }
        best
    }

    /// Exposed points along `directions`; with a direction set that includes
    /// the coordinate axes this covers the vertices of every hull.
    pub fn extreme_points(&self, directions: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if self.is_singleton() {
            let mut p = self.base.clone();
            for h in &self.hulls {
                for (pi, v) in p.iter_mut().zip(&h[0]) {
                    *pi += v;
                }
            }
            return vec![p];
        }
        directions.iter().map(|d| self.support_point(d)).collect()
    }
}

fn merged_balls(balls: &[BlockBall]) -> Vec<BlockBall> {
    let mut out: Vec<BlockBall> = Vec::new();
    for b in balls.iter().filter(|b| b.radius > 0.0) {
        match out.iter_mut().find(|o| o.block == b.block) {
            Some(o) => o.radius += b.radius,
            None => out.push(b.clone()),
        }
    }
    out
}

fn blocks_disjoint(balls: &[BlockBall]) -> bool {
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            if a.block.start < b.block.end && b.block.start < a.block.end {
                return false;
            }
        }
    }
    true
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(w: &mut [f64]) {
    let mut u: Vec<f64> = w.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for wi in w.iter_mut() {
        *wi = (*wi - theta).max(0.0);
    }
}

fn project_iterative(
    base: &[f64],
    balls: &[BlockBall],
    hulls: &[&Vec<Vec<f64>>],
    r: &[f64],
) -> Result<Projection> {
    let n = base.len();
    // variable layout: ball vectors, then simplex weights
    let mut offsets = Vec::new();
    let mut len = 0;
    for b in balls {
        offsets.push(len);
        len += b.block.len();
    }
    for h in hulls {
        offsets.push(len);
        len += h.len();
    }
    let lipschitz: f64 = balls.len() as f64
        + hulls
            .iter()
            .map(|h| h.iter().map(|v| dot(v, v)).sum::<f64>())
            .sum::<f64>();
    let step = 1.0 / lipschitz.max(1e-300);

    let assemble = |z: &[f64]| -> Vec<f64> {
        let mut p = base.to_vec();
        for (k, b) in balls.iter().enumerate() {
            let o = offsets[k];
            for (j, i) in b.block.clone().enumerate() {
                p[i] += z[o + j];
            }
        }
        for (m, h) in hulls.iter().enumerate() {
            let o = offsets[balls.len() + m];
            for (j, v) in h.iter().enumerate() {
                for i in 0..n {
                    p[i] += z[o + j] * v[i];
                }
            }
        }
        p
    };
    let project_feasible = |z: &mut [f64]| {
        for (k, b) in balls.iter().enumerate() {
            let o = offsets[k];
            let seg = &mut z[o..o + b.block.len()];
            let nn = norm(seg);
            if nn > b.radius {
                seg.iter_mut().for_each(|v| *v *= b.radius / nn);
            }
        }
        for (m, h) in hulls.iter().enumerate() {
            let o = offsets[balls.len() + m];
            project_simplex(&mut z[o..o + h.len()]);
        }
    };
    let gradient = |z: &[f64]| -> Vec<f64> {
        let resid: Vec<f64> = assemble(z).iter().zip(r).map(|(p, x)| p - x).collect();
        let mut g = vec![0.0; len];
        for (k, b) in balls.iter().enumerate() {
            let o = offsets[k];
            for (j, i) in b.block.clone().enumerate() {
                g[o + j] = resid[i];
            }
        }
        for (m, h) in hulls.iter().enumerate() {
            let o = offsets[balls.len() + m];
            for (j, v) in h.iter().enumerate() {
                g[o + j] = dot(v, &resid);
            }
        }
        g
    };

    let mut z = vec![0.0; len];
    for (m, h) in hulls.iter().enumerate() {
        let o = offsets[balls.len() + m];
        z[o..o + h.len()].iter_mut().for_each(|w| *w = 1.0 / h.len() as f64);
    }
    let mut y = z.clone();
    let mut theta: f64 = 1.0;
    let mut last_step = f64::INFINITY;
    for it in 1..=PROJECTION_MAX_ITER {
        let g = gradient(&y);
        let mut next: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        project_feasible(&mut next);
        let moved: Vec<f64> = next.iter().zip(&z).map(|(a, b)| a - b).collect();
        last_step = norm(&moved);
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_next;
        // restart when the momentum direction opposes descent
        let restart = dot(&g, &moved) > 0.0;
        y = if restart {
            theta = 1.0;
            next.clone()
        } else {
            theta = theta_next;
            next.iter().zip(&moved).map(|(a, d)| a + momentum * d).collect()
        };
        z = next;
        if last_step <= PROJECTION_TOL * 1e-2 {
            let point = assemble(&z);
            let distance = norm(&crate::vecops::sub(r, &point));
            return Ok(Projection { point, distance, iterations: it });
        }
    }
    Err(Error::ProjectionDiverged { iterations: PROJECTION_MAX_ITER, last_step })
}
