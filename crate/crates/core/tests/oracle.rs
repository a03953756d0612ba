use quarterpinch::oracle::{
    chart_n2, chart_real, coordinate_symmetry_residual, fd_riemann_raw, oracle_tensor, BaseModel, ConnectionForm,
    DEFAULT_STEP,
};
use quarterpinch::{
    components, make_hyperbolic_polar, MetricSpec, TransitionProfile, WarpProfile,
};

const BASE_POINTS: [[f64; 2]; 5] = [[0.1, -0.2], [0.0, 0.0], [0.4, 0.3], [-0.5, 0.2], [0.2, 0.6]];
const RADII: [f64; 5] = [0.3, 0.5, 1.0, 1.5, 2.0];

fn sigma() -> TransitionProfile<f64> {
    TransitionProfile::rising(0.2, 2.8, 1.0, 2.0, 5.0).unwrap()
}

fn triples() -> Vec<(WarpProfile<f64>, WarpProfile<f64>, f64)> {
    let sigma_v = WarpProfile::product(WarpProfile::Transition(sigma()), WarpProfile::Sinh2r);
    vec![
        (WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0),
        (WarpProfile::Cosh, WarpProfile::Sinh2r, 1.0),
        (WarpProfile::Cosh, WarpProfile::Sinh2r, 0.0),
        (WarpProfile::Cosh, sigma_v.clone(), 0.0),
        (WarpProfile::Cosh, sigma_v, 2.0),
        (WarpProfile::Cosh, WarpProfile::DSinh2r { d: 3.0 }, 0.0),
        (WarpProfile::scaled(1.5, WarpProfile::Cosh), WarpProfile::Sinh, -1.3),
    ]
}

#[test]
fn n2_chart_matches_closed_forms() {
    let mut worst: f64 = 0.0;
    for (h, v, c) in triples() {
        let spec = MetricSpec::complex(2, h.clone(), v.clone(), &[c]).unwrap();
        let chart = chart_n2(h, v, c);
        for x in BASE_POINTS {
            for r in RADII {
                let fd = oracle_tensor(&chart, &[x[0], x[1], 0.3, r], DEFAULT_STEP).unwrap();
                let cf = components(&spec, r);
                let dev = fd.max_deviation(&cf);
                worst = worst.max(dev);
                assert!(dev <= 1e-4, "c = {c}, x = {x:?}, r = {r}: deviation {dev}");
            }
        }
    }
    eprintln!("n=2 chart worst deviation {worst:e}");
}

#[test]
fn complex_hyperbolic_chart_constants() {
    let chart = chart_n2(WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0);
    let t = oracle_tensor(&chart, &[0.1, -0.2, 0.0, 1.0], DEFAULT_STEP).unwrap();
    assert!((t.get(0, 1, 0, 1) + 4.0).abs() < 1e-4);
    assert!((t.get(0, 2, 0, 2) + 1.0).abs() < 1e-4);
    assert!((t.get(0, 1, 2, 3) + 2.0).abs() < 1e-4);
}

#[test]
fn real_chart_is_hyperbolic() {
    for n in [3, 4, 6] {
        for v in [WarpProfile::Sinh, WarpProfile::scaled(3.0, WarpProfile::Sinh)] {
            let chart = chart_real(WarpProfile::Cosh, v.clone(), n);
            let spec = MetricSpec::real(n, WarpProfile::Cosh, v).unwrap();
            let mut p = vec![0.1; n - 2];
            p.push(0.4);
            p.push(1.1);
            let fd = oracle_tensor(&chart, &p, DEFAULT_STEP).unwrap();
            for a in 0..n {
                for b in a + 1..n {
                    assert!((fd.get(a, b, a, b) + 1.0).abs() < 1e-4);
                }
            }
            assert!(fd.max_deviation(&components(&spec, 1.1)) < 1e-4);
        }
    }
    let _ = make_hyperbolic_polar::<f64>(3).unwrap();
}

#[test]
fn chart_is_homogeneous() {
    let chart = chart_n2(WarpProfile::Cosh, WarpProfile::Sinh2r, 1.0);
    let a = oracle_tensor(&chart, &[0.0, 0.0, 0.0, 0.8], DEFAULT_STEP).unwrap();
    let b = oracle_tensor(&chart, &[-0.4, 0.5, 2.0, 0.8], DEFAULT_STEP).unwrap();
    assert!(a.max_deviation(&b) < 1e-4);
}

#[test]
fn symmetry_residual_shrinks_quadratically() {
    let chart = chart_n2(WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0);
    let p = [0.2, -0.1, 0.0, 1.0];
    let coarse = coordinate_symmetry_residual(&fd_riemann_raw(&chart, &p, 0.04).unwrap(), 4);
    let fine = coordinate_symmetry_residual(&fd_riemann_raw(&chart, &p, 0.02).unwrap(), 4);
    let ratio = coarse / fine;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn disk_connection_has_bracket_c() {
    let form = ConnectionForm { coefficients: vec![2.0], kappa: 1.0 };
    for x in BASE_POINTS {
        let c = form.measured_bracket(&BaseModel::Disk, &x, 0, 1).unwrap();
        assert!((c - 2.0).abs() < 1e-6);
    }
}

#[cfg(feature = "n3-chart")]
mod n3 {
    use super::*;
    use quarterpinch::oracle::{chart_n3, BaseChart};

    #[test]
    fn base_is_complex_hyperbolic() {
        let chart = chart_n3(WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0, 2.0).unwrap();
        let base = BaseChart(chart.base.clone());
        for x in [[0.0; 4], [0.2, -0.1, 0.3, 0.1]] {
            let t = oracle_tensor(&base, &x, DEFAULT_STEP).unwrap();
            assert!((t.get(0, 1, 0, 1) + 4.0).abs() < 1e-3, "holomorphic {}", t.get(0, 1, 0, 1));
            assert!((t.get(0, 2, 0, 2) + 1.0).abs() < 1e-3, "totally real {}", t.get(0, 2, 0, 2));
            assert!((t.get(0, 1, 2, 3) + 2.0).abs() < 1e-3, "mixed {}", t.get(0, 1, 2, 3));
        }
    }

    #[test]
    fn brackets_are_measured() {
        let chart = chart_n3(WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0, 2.0).unwrap();
        let form = chart.connection.clone().unwrap();
        for x in [[0.0; 4], [0.2, -0.1, 0.3, 0.1], [-0.4, 0.2, 0.0, 0.3]] {
            assert!((form.measured_bracket(&chart.base, &x, 0, 1).unwrap() - 2.0).abs() < 1e-6);
            assert!((form.measured_bracket(&chart.base, &x, 2, 3).unwrap() - 2.0).abs() < 1e-6);
            assert!(form.measured_bracket(&chart.base, &x, 0, 2).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn two_pair_product_term() {
        for (c1, c3) in [(2.0, 2.0), (2.0, 0.0), (1.0, -2.0)] {
            let chart = chart_n3(WarpProfile::Cosh, WarpProfile::Sinh2r, c1, c3).unwrap();
            let spec = MetricSpec::complex(3, WarpProfile::Cosh, WarpProfile::Sinh2r, &[c1, c3]).unwrap();
            let points: Vec<[f64; 4]> = if c1 == c3 {
                vec![[0.0; 4], [0.2, -0.1, 0.3, 0.1]]
            } else {
                vec![[0.0; 4]]
            };
            for x in points {
                for r in [0.5, 1.0, 2.0] {
                    let p = [x[0], x[1], x[2], x[3], 0.2, r];
                    let fd = oracle_tensor(&chart, &p, DEFAULT_STEP).unwrap();
                    let cf = components(&spec, r);
                    let dev = fd.max_deviation(&cf);
                    assert!(dev <= 1e-3, "c = ({c1}, {c3}), x = {x:?}, r = {r}: deviation {dev}");
                    let h = r.cosh();
                    let v = (2.0 * r).sinh();
                    let expected = -2.0 / (h * h) - c1 * c3 * v * v / (8.0 * h.powi(4));
                    assert!((fd.get(0, 1, 2, 3) - expected).abs() <= 1e-3);
                }
            }
        }
    }
}
