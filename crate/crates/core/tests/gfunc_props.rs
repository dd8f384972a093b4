use phi_inclusion::gfunc::{fenchel_young_gap, gradient_conjugate_bound_check};
use phi_inclusion::{make_family, FamilySpec, GFunction};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = FamilySpec> {
    let p = 1.2f64..6.0;
    prop_oneof![
        (p.clone(), 1usize..4).prop_map(|(p, dim)| FamilySpec::Power { p, dim }),
        (p.clone(), p.clone()).prop_map(|(a, b)| FamilySpec::Block { exponents: vec![a, b], dims: vec![1, 2] }),
        (2.0f64..5.0, 1usize..3).prop_map(|(p, dim)| FamilySpec::LogTempered { p, dim }),
        (p.clone(), 1usize..3).prop_map(|(p, dim)| FamilySpec::LogDampedCompanion { p, dim }),
        (0.5f64..4.0, p).prop_map(|(factor, p)| FamilySpec::Scaled {
            factor,
            inner: Box::new(FamilySpec::Power { p, dim: 2 }),
        }),
    ]
}

fn point(dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, dim)
}

fn with_points(scale: f64) -> impl Strategy<Value = (FamilySpec, Vec<f64>, Vec<f64>)> {
    family().prop_flat_map(move |f| {
        let dim = f.dim();
        (Just(f), point(dim, scale), point(dim, scale))
    })
}

/// `|ξ|^{p'}/p'` with `1/p + 1/p' = 1`.
fn dual_power(p: f64, xi: &[f64]) -> f64 {
    let q = p / (p - 1.0);
    xi.iter().map(|v| v * v).sum::<f64>().sqrt().powf(q) / q
}

fn build(spec: &FamilySpec) -> GFunction {
    make_family(spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_convex_and_zero_at_origin((spec, x, y) in with_points(5.0)) {
        let phi = build(&spec);
        prop_assert_eq!(phi.evaluate(&vec![0.0; x.len()]), 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (fx, fn_) = (phi.evaluate(&x), phi.evaluate(&neg));
        prop_assert!((fx - fn_).abs() <= 1e-12 * fx.max(1.0));
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let fy = phi.evaluate(&y);
        prop_assert!(phi.evaluate(&mid) <= 0.5 * (fx + fy) + 1e-10 * (1.0 + fx + fy));
    }

    #[test]
    fn fenchel_young_gap_is_nonnegative((spec, x, xi) in with_points(3.0)) {
        let phi = build(&spec);
        let gap = fenchel_young_gap(&phi, &x, &xi);
        prop_assert!(gap >= -1e-7 * (1.0 + phi.evaluate(&x)), "gap {}", gap);
    }

    #[test]
    fn gradient_attains_fenchel_equality((spec, x, _y) in with_points(3.0)) {
        let phi = build(&spec);
        let g = phi.gradient(&x);
        let gap = fenchel_young_gap(&phi, &x, &g);
        prop_assert!(gap.abs() <= 1e-6 * (1.0 + phi.evaluate(&x)), "gap {}", gap);
        let (upper, lower) = gradient_conjugate_bound_check(&phi, &x);
        prop_assert!(upper >= -1e-9 * (1.0 + phi.evaluate(&x)));
        prop_assert!(lower >= -1e-6 * (1.0 + phi.evaluate(&x)));
    }

    #[test]
    fn gradient_matches_central_differences((spec, x, _y) in with_points(3.0)) {
        let phi = build(&spec);
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let g = phi.gradient(&x);
        for k in 0..x.len() {
            let h = 1e-6 * (1.0 + x[k].abs());
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let fd = (phi.evaluate(&xp) - phi.evaluate(&xm)) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * (1.0 + g[k].abs()), "k {} fd {} g {}", k, fd, g[k]);
        }
    }

    #[test]
    fn power_conjugate_matches_dual_exponent(p in 1.3f64..6.0, xi in point(2, 10.0)) {
        let phi = build(&FamilySpec::Power { p, dim: 2 });
        let want = dual_power(p, &xi);
        let got = phi.conjugate_numeric(&xi);
        prop_assert!((got - want).abs() <= 1e-6 * want.max(1e-12), "p {} got {} want {}", p, got, want);
    }
}
