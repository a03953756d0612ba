use proptest::prelude::*;
use quarterpinch::composite::{assemble_with, AssembleOptions, Thresholds};
use quarterpinch::pinching::adapted_plane;
use quarterpinch::{
    components, components_sigma_warp, curvature_at, effective_bracket, large_r_limit, make_complex_hyperbolic_polar,
    make_d_fold, make_hyperbolic_polar, make_integrable, reduced_k, scan_extremes, scan_extremes_at, sectional_curvature,
    CurvTensor, MetricSpec, ScanParams, TransitionProfile, TwoPlane, WarpProfile,
};

const FD_STEP: f64 = 1e-4;

fn profiles() -> Vec<WarpProfile<f64>> {
    let rise = TransitionProfile::rising(2.0, 12.0, 1.0, 3.0, 0.5).unwrap();
    let fall = TransitionProfile::falling(5.0, 25.0, 0.0, 1.0, 0.1).unwrap();
    vec![
        WarpProfile::Cosh,
        WarpProfile::Sinh,
        WarpProfile::Sinh2r,
        WarpProfile::DSinh2r { d: 3.0 },
        WarpProfile::constant(1.7),
        WarpProfile::Transition(rise.clone()),
        WarpProfile::Transition(fall),
        WarpProfile::product(WarpProfile::Transition(rise), WarpProfile::Sinh2r),
        WarpProfile::scaled(2.5, WarpProfile::Cosh),
    ]
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn permuted(t: &CurvTensor<f64>, perm: &[usize]) -> CurvTensor<f64> {
    let n = t.dim();
    let mut full = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    full[((a * n + b) * n + c) * n + d] = t.get(perm[a], perm[b], perm[c], perm[d]);
                }
            }
        }
    }
    CurvTensor::from_full(n, full)
}

fn bianchi_ok(t: &CurvTensor<f64>) -> bool {
    t.bianchi_residual() <= 1e-10 * t.max_abs().max(1.0)
}

fn plane_strategy(dim: usize) -> impl Strategy<Value = TwoPlane<f64>> {
    (prop::collection::vec(-1.0..1.0f64, dim), prop::collection::vec(-1.0..1.0f64, dim))
        .prop_filter_map("degenerate plane", |(a, b)| TwoPlane::new(a, b).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn profile_derivatives_match_finite_differences(which in 0usize..9, r in 0.05f64..30.0) {
        let p = &profiles()[which];
        let j = p.eval(r);
        let f = |x: f64| p.value(x);
        let d1 = (f(r + FD_STEP) - f(r - FD_STEP)) / (2.0 * FD_STEP);
        let d2 = (f(r + FD_STEP) - 2.0 * f(r) + f(r - FD_STEP)) / (FD_STEP * FD_STEP);
        let scale = j.value.abs();
        prop_assert!((d1 - j.d1).abs() <= 1e-6 * j.d1.abs().max(scale), "f' at {r}: {d1} vs {}", j.d1);
        prop_assert!((d2 - j.d2).abs() <= 1e-6 * j.d2.abs().max(scale), "f'' at {r}: {d2} vs {}", j.d2);
    }

    #[test]
    fn products_follow_leibniz(i in 0usize..9, k in 0usize..9, r in 0.05f64..20.0) {
        let (f, g) = (profiles()[i].clone(), profiles()[k].clone());
        let (a, b) = (f.eval(r), g.eval(r));
        let p = WarpProfile::product(f, g).eval(r);
        prop_assert_eq!(p.value, a.value * b.value);
        prop_assert_eq!(p.d1, a.d1 * b.value + a.value * b.d1);
        prop_assert_eq!(p.d2, a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2);
    }

    #[test]
    fn log_jet_is_consistent(which in 0usize..9, r in 0.05f64..15.0) {
        let p = &profiles()[which];
        let j = p.eval(r);
        let l = p.log_jet(r);
        prop_assert!((l.ln - j.value.abs().ln()).abs() <= 1e-12 * l.ln.abs().max(1.0));
        prop_assert!((l.d1 - j.d1 / j.value).abs() <= 1e-12 * l.d1.abs().max(1.0));
        prop_assert!((l.d2 - j.d2 / j.value).abs() <= 1e-12 * l.d2.abs().max(1.0));
    }

    #[test]
    fn transitions_verify_and_reverify(
        r_a in 0.1f64..10.0,
        extra in 0.0f64..5.0,
        lo in -2.0f64..2.0,
        span in 0.1f64..3.0,
        delta in 0.01f64..1.0,
        rising in any::<bool>(),
    ) {
        let hi = lo + span;
        let len = quarterpinch::required_length(delta, lo, hi) * (1.0 + extra);
        let t = if rising {
            TransitionProfile::rising(r_a, r_a + len, lo, hi, delta)
        } else {
            TransitionProfile::falling(r_a, r_a + len, lo, hi, delta)
        }.unwrap();
        let first = t.verify().unwrap();
        let second = t.verify().unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert!(first.max_abs_d1 <= delta * (1.0 + 1e-12) && first.max_abs_d2 <= delta * (1.0 + 1e-12));
        let (before, after) = if rising { (lo, hi) } else { (hi, lo) };
        prop_assert_eq!(t.value(r_a - 1.0), before);
        prop_assert_eq!(t.value(r_a + len + 1.0), after);
    }

    #[test]
    fn effective_bracket_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (effective_bracket(lo), effective_bracket(hi));
        prop_assert!(x <= y);
        prop_assert!((0.0..=2.0).contains(&x) && (0.0..=2.0).contains(&y));
    }

    #[test]
    fn complex_family_satisfies_bianchi(
        n in 2usize..5,
        cs in prop::collection::vec(-3.0f64..3.0, 3),
        r in 0.05f64..25.0,
        which in 0usize..3,
    ) {
        let v = match which {
            0 => WarpProfile::Sinh2r,
            1 => WarpProfile::DSinh2r { d: 3.0 },
            _ => WarpProfile::product(WarpProfile::Transition(TransitionProfile::rising(1.0, 9.0, 1.0, 2.0, 0.5).unwrap()), WarpProfile::Sinh2r),
        };
        let spec = MetricSpec::complex(n, WarpProfile::Cosh, v, &cs[..n - 1]).unwrap();
        let t = components(&spec, r);
        prop_assert!(bianchi_ok(&t), "residual {}", t.bianchi_residual());
        prop_assert!(t.symmetry_residual() == 0.0);
    }

    #[test]
    fn other_families_satisfy_bianchi(n in 3usize..7, r in 0.05f64..25.0, c1 in -3.0f64..3.0, c3 in -3.0f64..3.0) {
        prop_assert!(bianchi_ok(&components(&make_hyperbolic_polar::<f64>(n).unwrap(), r)));
        let sigma = TransitionProfile::rising(0.5, 45.0, 1.0, 3.0, 0.1).unwrap();
        prop_assert!(bianchi_ok(&components_sigma_warp(2, &sigma, r)));
        prop_assert!(bianchi_ok(&components_sigma_warp(3, &sigma, r)));
        prop_assert!(bianchi_ok(&large_r_limit(3, &[c1, c3])));
    }

    #[test]
    fn composite_tensors_satisfy_bianchi(s in 0.0f64..1.0) {
        let t = Thresholds { integrable: 0.05, complex: 0.05, slack: 3.0 };
        let cm = assemble_with(2, 3, 0.5, 0.01, t, &AssembleOptions::default()).unwrap();
        let r = 0.05 + s * (cm.radii[3] + 2.0);
        let tensor = curvature_at(&cm, r, 0).unwrap();
        prop_assert!(bianchi_ok(&tensor), "r = {r}: {}", tensor.bianchi_residual());
    }

    #[test]
    fn d_scaling_leaves_curvature_unchanged(d in 2u32..6, r in 0.05f64..25.0, n in 2usize..5) {
        let gi = components(&make_integrable::<f64>(n).unwrap(), r);
        let gd = components(&make_d_fold::<f64>(n, d).unwrap(), r);
        prop_assert!(gi.max_deviation(&gd) <= 1e-12);
        let hyp = MetricSpec::real(n + 1, WarpProfile::Cosh, WarpProfile::scaled(d as f64, WarpProfile::Sinh)).unwrap();
        prop_assert!(components(&hyp, r).max_deviation(&components(&make_hyperbolic_polar::<f64>(n + 1).unwrap(), r)) <= 1e-12);
    }

    #[test]
    fn flipping_every_sign_reverses_theta(
        n in 2usize..5,
        c in prop::collection::vec(-3.0f64..3.0, 3),
        r in 0.05f64..10.0,
    ) {
        let c = &c[..n - 1];
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        let a = components(&MetricSpec::complex(n, WarpProfile::Cosh, WarpProfile::Sinh2r, c).unwrap(), r);
        let b = components(&MetricSpec::complex(n, WarpProfile::Cosh, WarpProfile::Sinh2r, &neg).unwrap(), r);
        let theta = 2 * n - 2;
        let dim = 2 * n;
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let flips = [i, j, k, l].iter().filter(|&&x| x == theta).count();
                        let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
                        // components without a θ slot see only squares and pair products
                        worst = worst.max((a.get(i, j, k, l) - sign * b.get(i, j, k, l)).abs());
                    }
                }
            }
        }
        prop_assert!(worst <= 1e-12 * a.max_abs());
    }

    #[test]
    fn one_pair_sign_flip_swaps_the_pair(c in -3.0f64..3.0, r in 0.05f64..10.0) {
        let a = components(&MetricSpec::complex(2, WarpProfile::Cosh, WarpProfile::Sinh2r, &[c]).unwrap(), r);
        let b = components(&MetricSpec::complex(2, WarpProfile::Cosh, WarpProfile::Sinh2r, &[-c]).unwrap(), r);
        prop_assert!(permuted(&b, &[1, 0, 2, 3]).max_deviation(&a) <= 1e-12 * a.max_abs());
    }

    #[test]
    fn reduced_k_matches_contraction(
        c1 in -3.0f64..3.0,
        c3 in -3.0f64..3.0,
        raw in prop::collection::vec(-1.0f64..1.0, 5),
        flip in any::<bool>(),
    ) {
        prop_assume!(raw.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let a = unit(raw);
        let a: [f64; 5] = a.try_into().unwrap();
        let (b1, b4) = if a[0].hypot(a[3]) > 1e-6 {
            let n = a[0].hypot(a[3]);
            (-a[3] / n, a[0] / n)
        } else {
            (1.0, 0.0)
        };
        let b = if flip { [-b1, -b4] } else { [b1, b4] };
        let k = reduced_k(c1, c3, a, b).unwrap();
        let plane = adapted_plane(a, b).unwrap();
        let full = sectional_curvature(&large_r_limit(3, &[c1, c3]), &plane).unwrap();
        prop_assert!((k - full).abs() <= 1e-9, "{k} vs {full}");
    }

    #[test]
    fn complex_hyperbolic_planes_are_pinched(n in 2usize..4, r in 0.05f64..20.0, seed in any::<u64>()) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t = components(&make_complex_hyperbolic_polar::<f64>(n, &vec![1; n - 1]).unwrap(), r);
        for _ in 0..20 {
            let a: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let plane = TwoPlane::new(a, b).unwrap();
            let k = sectional_curvature(&t, &plane).unwrap();
            prop_assert!((-4.0 - 1e-9..=-1.0 + 1e-9).contains(&k), "K = {k}");
        }
    }

    #[test]
    fn hyperbolic_planes_are_minus_one(n in 3usize..7, r in 0.05f64..20.0, plane in plane_strategy(6)) {
        let t = components(&make_hyperbolic_polar::<f64>(6).unwrap(), r);
        let k = sectional_curvature(&t, &plane).unwrap();
        prop_assert!((k + 1.0).abs() <= 1e-12);
        let small = components(&make_hyperbolic_polar::<f64>(n).unwrap(), r);
        let rep = scan_extremes(&small, &ScanParams { n_samples: 2, ..ScanParams::default() });
        prop_assert!((rep.k_min + 1.0).abs() <= 1e-12 && (rep.k_max + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn witnesses_reproduce_extremes(
        c1 in -3.0f64..3.0,
        c3 in -3.0f64..3.0,
        r in 0.05f64..10.0,
        seed in any::<u64>(),
    ) {
        let spec = MetricSpec::complex(3, WarpProfile::Cosh, WarpProfile::Sinh2r, &[c1, c3]).unwrap();
        let t = components(&spec, r);
        let rep = scan_extremes(&t, &ScanParams { seed, n_samples: 3, ..ScanParams::default() });
        prop_assert!(rep.k_min <= rep.k_max);
        prop_assert!((sectional_curvature(&t, &rep.witness_min).unwrap() - rep.k_min).abs() <= 1e-9);
        prop_assert!((sectional_curvature(&t, &rep.witness_max).unwrap() - rep.k_max).abs() <= 1e-9);
    }
}

#[test]
fn scan_is_deterministic() {
    let spec = MetricSpec::complex(3, WarpProfile::Cosh, WarpProfile::Sinh2r, &[1.3, -0.4]).unwrap();
    let t = components(&spec, 0.7);
    let p = ScanParams::default();
    assert_eq!(scan_extremes_at(&t, &p, 0.7), scan_extremes_at(&t, &p, 0.7));
}

#[test]
fn single_precision_complex_hyperbolic() {
    let spec = make_complex_hyperbolic_polar::<f32>(2, &[1]).unwrap();
    for r in [0.3_f32, 1.0, 4.0] {
        let t = components(&spec, r);
        assert!((t.get(0, 1, 0, 1) + 4.0).abs() < 1e-4);
        assert!((t.get(0, 2, 0, 2) + 1.0).abs() < 1e-4);
        assert!((t.get(2, 3, 2, 3) + 4.0).abs() < 1e-4);
    }
}
