use std::sync::Arc;

use pcp_core::levelset;
use pcp_core::linalg::condition_number;
use pcp_core::polyreg::{fit, regression_matrix, BasisKind, BasisSpec, LocalFrame, RegressionPoly};
use pcp_core::{Domain, Vector};
use proptest::prelude::*;

fn monomial_value<const D: usize>(exponents: &[[u8; D]], coeffs: &[f64], x: &Vector<D>) -> f64 {
    exponents.iter().zip(coeffs).map(|(a, c)| c * (0..D).map(|i| x[i].powi(a[i] as i32)).product::<f64>()).sum()
}

fn spec<const D: usize>(kind: BasisKind, degree: usize) -> Arc<BasisSpec<D>> {
    Arc::new(BasisSpec::new(kind, degree).unwrap())
}

fn kinds() -> impl Strategy<Value = BasisKind> {
    prop_oneof![Just(BasisKind::NewtonLagrange), Just(BasisKind::Monomial)]
}

fn reproduce<const D: usize>(kind: BasisKind, degree: usize, coeffs: &[f64], pts: &[Vector<D>], tests: &[Vector<D>]) {
    let exps = spec::<D>(BasisKind::Monomial, degree).exponents().to_vec();
    let vals: Vec<f64> = pts.iter().map(|p| monomial_value(&exps, coeffs, p)).collect();
    let p = fit(pts, &vals, &spec(kind, degree), LocalFrame::identity()).unwrap();
    let truth: Vec<f64> = tests.iter().map(|q| monomial_value(&exps, coeffs, q)).collect();
    let scale = truth.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (q, t) in tests.iter().zip(&truth) {
        let e = (p.eval(q) - t).abs();
        assert!(e <= 1e-9 * scale, "{kind:?} degree {degree}: error {e:e} at {q:?}");
    }
}

fn cube_points<const D: usize>(n: usize) -> impl Strategy<Value = Vec<Vector<D>>> {
    prop::collection::vec(prop::array::uniform(-1.0..1.0f64), n..n + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_reproduces_polynomials_2d(
        kind in kinds(),
        degree in 0usize..=4,
        coeffs in prop::collection::vec(-1.0..1.0f64, 15),
        pts in cube_points::<2>(40),
        tests in cube_points::<2>(100),
    ) {
        let nc = spec::<2>(kind, degree).coeff_count();
        reproduce(kind, degree, &coeffs[..nc], &pts, &tests);
    }

    #[test]
    fn fit_reproduces_polynomials_3d(
        kind in kinds(),
        degree in 0usize..=4,
        coeffs in prop::collection::vec(-1.0..1.0f64, 35),
        pts in cube_points::<3>(90),
        tests in cube_points::<3>(100),
    ) {
        let nc = spec::<3>(kind, degree).coeff_count();
        reproduce(kind, degree, &coeffs[..nc], &pts, &tests);
    }

    #[test]
    fn derivatives_match_finite_differences(
        kind in kinds(),
        pts in cube_points::<2>(30),
        vals in prop::collection::vec(-1.0..1.0f64, 30),
        q in prop::array::uniform2(-0.8..0.8f64),
    ) {
        let p = fit(&pts, &vals, &spec(kind, 4), LocalFrame::new([0.1, -0.2], 1.0)).unwrap();
        let step = 1e-5;
        let (_, g, h) = p.eval_all(&q);
        let gscale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let hscale = h.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            let mut a = q;
            let mut b = q;
            a[i] += step;
            b[i] -= step;
            let fd = (p.eval(&a) - p.eval(&b)) / (2.0 * step);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * gscale, "grad {i}: {fd} vs {}", g[i]);
            let (ga, gb) = (p.grad(&a), p.grad(&b));
            for j in 0..2 {
                let fd = (ga[j] - gb[j]) / (2.0 * step);
                prop_assert!((fd - h[i][j]).abs() <= 1e-6 * hscale, "hess {i}{j}: {fd} vs {}", h[i][j]);
            }
        }
        prop_assert_eq!(h[0][1], h[1][0]);
    }

    #[test]
    fn bases_agree_on_well_conditioned_sets(
        pts in cube_points::<2>(60),
        tests in cube_points::<2>(50),
        freq in 0.5..3.0f64,
    ) {
        let vals: Vec<f64> = pts.iter().map(|p| (freq * p[0]).sin() * (p[1] + 0.3).exp()).collect();
        let frame = LocalFrame::identity();
        let a = fit(&pts, &vals, &spec(BasisKind::NewtonLagrange, 4), frame).unwrap();
        let b = fit(&pts, &vals, &spec(BasisKind::Monomial, 4), frame).unwrap();
        for q in &tests {
            prop_assert!((a.eval(q) - b.eval(q)).abs() < 1e-8);
        }
    }

    #[test]
    fn translation_leaves_fit_unchanged(
        kind in kinds(),
        pts in cube_points::<3>(60),
        tests in cube_points::<3>(30),
        shift in prop::array::uniform3(-5.0..5.0f64),
    ) {
        let vals: Vec<f64> = pts.iter().map(|p| p[0] * p[1] - p[2].cos() + 0.5 * p[0].powi(3)).collect();
        let basis = spec::<3>(kind, 4);
        let center = [0.05, -0.1, 0.2];
        let a = fit(&pts, &vals, &basis, LocalFrame::new(center, 1.0)).unwrap();
        let moved: Vec<Vector<3>> = pts.iter().map(|p| core::array::from_fn(|i| p[i] + shift[i])).collect();
        let b = fit(&moved, &vals, &basis, LocalFrame::new(core::array::from_fn(|i| center[i] + shift[i]), 1.0)).unwrap();
        for q in &tests {
            let qm: Vector<3> = core::array::from_fn(|i| q[i] + shift[i]);
            prop_assert!((a.eval(q) - b.eval(&qm)).abs() < 1e-10);
        }
    }
}

#[test]
fn fifteen_random_points_reproduce_degree_four() {
    let exps = spec::<2>(BasisKind::Monomial, 4).exponents().to_vec();
    let coeffs: Vec<f64> = (0..15).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let pts = levelset::perturbed_grid(0.5, 0.4, &Domain::open([-1.0, -1.0], [1.0, 1.0]), 7).unwrap();
    assert!(pts.len() >= 15);
    let vals: Vec<f64> = pts.iter().map(|p| monomial_value(&exps, &coeffs, p)).collect();
    for kind in [BasisKind::NewtonLagrange, BasisKind::Monomial] {
        let p = fit(&pts, &vals, &spec(kind, 4), LocalFrame::identity()).unwrap();
        for q in &pts {
            assert!((p.eval(q) - monomial_value(&exps, &coeffs, q)).abs() < 1e-10);
        }
    }
}

#[test]
fn newton_lagrange_better_conditioned_at_high_shift() {
    for (h, seed) in [(1.0 / 64.0, 1u64), (1.0 / 128.0, 2), (1.0 / 256.0, 3)] {
        let domain = Domain::open([-0.2, -0.2], [0.2, 0.2]);
        let pts = levelset::perturbed_grid(h, 0.45, &domain, seed).unwrap();
        let rc = 2.5 * h;
        for center in [[0.0, 0.0], [0.05, -0.07], [-0.1, 0.1]] {
            let seed_pt = *pts.iter().min_by(|a, b| dist2(a, &center).total_cmp(&dist2(b, &center))).unwrap();
            let hood: Vec<Vector<2>> = pts.iter().copied().filter(|p| dist2(p, &seed_pt) <= rc * rc).collect();
            let cond = |kind| {
                let basis = spec::<2>(kind, 4);
                condition_number(&regression_matrix(&hood, &basis, &LocalFrame::for_regression(kind, seed_pt, rc)))
            };
            let (nl, mono) = (cond(BasisKind::NewtonLagrange), cond(BasisKind::Monomial));
            assert!(nl < mono, "h = {h}: {nl:e} vs {mono:e}");
        }
    }
}

#[test]
fn from_coefficients_matches_fit() {
    let basis = spec::<2>(BasisKind::NewtonLagrange, 3);
    let pts: Vec<Vector<2>> = (0..25).map(|k| [(k % 5) as f64 * 0.4 - 0.8, (k / 5) as f64 * 0.4 - 0.8]).collect();
    let vals: Vec<f64> = pts.iter().map(|p| p[0] * p[0] * p[1] - p[1]).collect();
    let frame = LocalFrame::new([0.1, 0.0], 0.9);
    let a = fit(&pts, &vals, &basis, frame).unwrap();
    let b = RegressionPoly::from_coefficients(basis, frame, a.coefficients().to_vec()).unwrap();
    for q in &pts {
        assert_eq!(a.eval_all(q), b.eval_all(q));
    }
}

fn dist2(a: &Vector<2>, b: &Vector<2>) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
