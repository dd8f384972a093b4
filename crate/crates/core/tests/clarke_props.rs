use std::f64::consts::TAU;

use phi_inclusion::clarke::{probe_h3, probe_h6, BlockBall, BoundSampling, H3Options, SmoothFn, Spatial, SubdiffSet, Term};
use phi_inclusion::sampling::DEFAULT_SEED;
use phi_inclusion::{make_family, FamilySpec, Potential, TimeExpr};
use proptest::prelude::*;

const DIM: usize = 3;

fn vector(scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, DIM)
}

fn block() -> impl Strategy<Value = std::ops::Range<usize>> {
    prop_oneof![Just(0..1), Just(1..3), Just(0..3), Just(2..3)]
}

fn set() -> impl Strategy<Value = SubdiffSet> {
    let balls = prop::collection::vec((block(), 0.0f64..2.0).prop_map(|(block, radius)| BlockBall { block, radius }), 0..3);
    let hulls = prop::collection::vec(prop::collection::vec(vector(2.0), 1..4), 0..3);
    (vector(3.0), balls, hulls).prop_map(|(base, balls, hulls)| SubdiffSet { base, balls, hulls })
}

/// A point of the set built from its description: base, points of each
/// ball, and convex combinations of each hull's vertices.
fn member(s: &SubdiffSet, seeds: &[f64]) -> Vec<f64> {
    let mut p = s.base.clone();
    let mut k = 0;
    let mut next = || {
        k += 1;
        seeds[k % seeds.len()]
    };
    for b in &s.balls {
        let d: Vec<f64> = b.block.clone().map(|_| next() - 0.5).collect();
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let r = b.radius * next();
        for (i, v) in b.block.clone().zip(&d) {
            p[i] += r * v / n;
        }
    }
    for h in &s.hulls {
        let w: Vec<f64> = h.iter().map(|_| next() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        for (vertex, wi) in h.iter().zip(&w) {
            for (pi, vi) in p.iter_mut().zip(vertex) {
                *pi += wi / total * vi;
            }
        }
    }
    p
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sample_potential() -> Potential {
    let quad = make_family(&FamilySpec::Power { p: 2.0, dim: 2 }).unwrap();
    Potential::new(
        3,
        vec![
            Term::new(TimeExpr::parse("1 + sin(t)^2").unwrap(), Spatial::AbsNorm(0..2)),
            Term::new(TimeExpr::constant(0.5), Spatial::AbsNorm(2..3)),
            Term::new(
                TimeExpr::constant(1.0),
                Spatial::MaxOf(vec![
                    SmoothFn::Affine { weights: vec![1.0, 0.0, -1.0], offset: 0.0 },
                    SmoothFn::Affine { weights: vec![0.0, 1.0, 1.0], offset: 0.0 },
                ]),
            ),
            Term::new(TimeExpr::parse("cos(t)").unwrap(), Spatial::Smooth(SmoothFn::Phi { phi: quad, start: 1 })),
        ],
        TAU,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn support_is_positively_homogeneous_and_subadditive(s in set(), v in vector(2.0), w in vector(2.0), c in 0.0f64..10.0) {
        let cv: Vec<f64> = v.iter().map(|x| c * x).collect();
        let scale = 1.0 + c * s.support(&v).abs();
        prop_assert!((s.support(&cv) - c * s.support(&v)).abs() <= 1e-10 * scale);
        let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        prop_assert!(s.support(&vw) <= s.support(&v) + s.support(&w) + 1e-10 * (1.0 + s.support(&v).abs() + s.support(&w).abs()));
    }

    #[test]
    fn members_have_zero_distance(s in set(), seeds in prop::collection::vec(0.0f64..1.0, 16)) {
        let m = member(&s, &seeds);
        let d = s.distance(&m).unwrap();
        prop_assert!(d <= 1e-6, "distance {}", d);
    }

    #[test]
    fn distance_matches_projection_and_duality(s in set(), r in vector(8.0), dirs in prop::collection::vec(vector(1.0), 4)) {
        let proj = s.project(&r).unwrap();
        let gap: Vec<f64> = r.iter().zip(&proj.point).map(|(a, b)| a - b).collect();
        prop_assert!((dot(&gap, &gap).sqrt() - proj.distance).abs() <= 1e-12 * (1.0 + proj.distance));
        // the projected point lies in the set
        for v in &dirs {
            prop_assert!(dot(&proj.point, v) <= s.support(v) + 1e-6 * (1.0 + s.support(v).abs()));
        }
        // weak duality: dist(r) ≥ ⟨v, r⟩ − σ(v) for unit v, tight at v = gap/|gap|
        for v in &dirs {
            let n = dot(v, v).sqrt();
            prop_assume!(n > 1e-6);
            let u: Vec<f64> = v.iter().map(|x| x / n).collect();
            prop_assert!(proj.distance >= dot(&u, &r) - s.support(&u) - 1e-6);
        }
        if proj.distance > 1e-6 {
            let u: Vec<f64> = gap.iter().map(|x| x / proj.distance).collect();
            let dual = dot(&u, &r) - s.support(&u);
            prop_assert!((dual - proj.distance).abs() <= 1e-5 * (1.0 + proj.distance), "dual {} dist {}", dual, proj.distance);
        }
    }

    /// For regular potentials the generalized directional derivative equals
    /// the one-sided derivative and the support function of `∂F`.
    #[test]
    fn dirderiv_is_support_and_one_sided_limit(t in 0.0f64..TAU, x in vector(2.0), v in vector(1.0), kink in 0usize..3) {
        let f = sample_potential();
        let mut x = x;
        match kink {
            0 => { x[0] = 0.0; x[1] = 0.0; }
            1 => x[2] = 0.0,
            _ => x[1] = x[0] - 2.0 * x[2],
        }
        let d = f.dirderiv(t, &x, &v);
        let sigma = f.subdiff(t, &x).support(&v);
        prop_assert!((d - sigma).abs() <= 1e-9 * (1.0 + d.abs()));
        let eps = 1e-7;
        let xe: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
        let fd = (f.value(t, &xe) - f.value(t, &x)) / eps;
        prop_assert!((fd - d).abs() <= 1e-5 * (1.0 + d.abs()), "fd {} d {}", fd, d);
    }
}

#[test]
fn h6_witness_rechecks() {
    let quad = make_family(&FamilySpec::Power { p: 2.0, dim: 1 }).unwrap();
    let f = Potential::new(
        1,
        vec![
            Term::new(TimeExpr::constant(1.0), Spatial::Smooth(SmoothFn::Phi { phi: quad, start: 0 })),
            Term::new(TimeExpr::parse("cos(t)").unwrap(), Spatial::Smooth(SmoothFn::Affine { weights: vec![1.0], offset: 0.0 })),
        ],
        TAU,
    )
    .unwrap();
    let s = BoundSampling { radius: 10.0, radii_count: 12, time_samples: 8, seed: DEFAULT_SEED };
    let out = probe_h6(&f, 0.5, 1.0, &s, 2000);
    assert!(!out.passed());
    let w = out.witness.expect("failing probe carries a witness");
    let (t, x, y) = (w.t.unwrap(), w.x.unwrap(), w.y.unwrap());
    let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
    let lhs = f.value(t, &mid);
    let rhs = f.value(t, &x) + f.value(t, &y);
    assert!((lhs - w.lhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    assert!((rhs - w.rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    assert!(lhs > rhs);
}

#[test]
fn h3_witness_for_inverse_time_is_not_integrable() {
    let f = Potential::new(
        1,
        vec![Term::new(TimeExpr::parse("1/t").unwrap(), Spatial::Smooth(SmoothFn::Constant(1.0)))],
        TAU,
    )
    .unwrap();
    let out = probe_h3(&f, &H3Options { b: None, radius: 1.0, radii_count: 10, time_samples: 16, seed: DEFAULT_SEED });
    assert!(!out.passed());
    let w = out.witness.unwrap();
    assert!(w.lhs > w.rhs, "{w:?}");
}
