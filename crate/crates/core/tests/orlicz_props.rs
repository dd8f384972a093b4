use phi_inclusion::orlicz::{amemiya_bound_gap, holder_gap, luxemburg_norm, modular, wirtinger_gap};
use phi_inclusion::{make_family, FamilySpec, GFunction, Trajectory};
use proptest::prelude::*;

const PERIOD: f64 = 3.0;

fn trajectory(nodes: usize, dim: usize, scale: f64) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(-scale..scale, nodes * dim).prop_map(move |v| Trajectory::new(PERIOD, dim, v).unwrap())
}

fn pair(dim: usize) -> impl Strategy<Value = (Trajectory, Trajectory)> {
    (8usize..40).prop_flat_map(move |n| (trajectory(n, dim, 4.0), trajectory(n, dim, 4.0)))
}

fn phi(p: f64, dim: usize) -> GFunction {
    make_family(&FamilySpec::Power { p, dim }).unwrap()
}

fn grad_phi(phi: &GFunction, u: &Trajectory) -> Trajectory {
    let values = u.iter().flat_map(|x| phi.gradient(x)).collect();
    Trajectory::new(u.period(), u.dim(), values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn luxemburg_norm_axioms(p in 1.3f64..5.0, (u, v) in pair(2), s in -5.0f64..5.0) {
        let f = phi(p, 2);
        let (nu, nv) = (luxemburg_norm(&f, &u), luxemburg_norm(&f, &v));
        prop_assert!(nu > 0.0);
        let ns = luxemburg_norm(&f, &u.scaled(s));
        prop_assert!((ns - s.abs() * nu).abs() <= 1e-9 * (1.0 + s.abs() * nu), "{} vs {}", ns, s.abs() * nu);
        let nsum = luxemburg_norm(&f, &u.plus(&v));
        prop_assert!(nsum <= nu + nv + 1e-9 * (nu + nv));
        prop_assert!(modular(&f, &u.scaled(1.0 / nu)) <= 1.0 + 1e-9);
    }

    #[test]
    fn holder_and_amemiya_gaps_are_nonnegative(p in 1.3f64..5.0, (u, v) in pair(2)) {
        let f = phi(p, 2);
        let h = holder_gap(&f, &u, &v).unwrap();
        prop_assert!(h >= -1e-6, "holder {}", h);
        let a = amemiya_bound_gap(&f, &u);
        prop_assert!(a >= -1e-8, "amemiya {}", a);
    }

    #[test]
    fn wirtinger_gap_within_grid_slack(p in 1.3f64..5.0, (u, _v) in pair(1)) {
        let f = phi(p, 1);
        let w = wirtinger_gap(&f, &u);
        prop_assert!(w.gap >= -w.slack - 1e-12, "gap {} slack {}", w.gap, w.slack);
    }

    /// `h Σ ⟨∇φ(u'_i), v'_i⟩ = −h Σ ⟨(∇φ(u'_i) − ∇φ(u'_{i−1}))/h, v_i⟩`.
    #[test]
    fn discrete_integration_by_parts(p in 1.3f64..5.0, (u, v) in pair(3)) {
        let f = phi(p, 3);
        let h = u.step();
        let w = grad_phi(&f, &u.derivative());
        let dv = v.derivative();
        let n = u.nodes();
        let lhs: f64 = h * (0..n).map(|i| dot(w.node(i), dv.node(i))).sum::<f64>();
        let rhs: f64 = -h * (0..n)
            .map(|i| {
                let prev = w.node((i + n - 1) % n);
                w.node(i).iter().zip(prev).zip(v.node(i)).map(|((a, b), x)| (a - b) / h * x).sum::<f64>()
            })
            .sum::<f64>();
        let scale: f64 = h * (0..n).map(|i| norm(w.node(i)) * norm(dv.node(i))).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + scale), "lhs {} rhs {}", lhs, rhs);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
