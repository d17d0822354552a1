use std::sync::Arc;

use nalgebra::DVector;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radwave::critsearch::certify::weak_residual;
use radwave::critsearch::geometry::estimate_geometry;
use radwave::critsearch::scan::dense_scan;
use radwave::critsearch::{solve, DenseScan, Landscape, PointKind, PointStatus, Precision, SearchOptions};
use radwave::exec::Exec;
use radwave::functional::{ArctanNonlinearity, Functional, LinearNonlinearity, Nonlinearity, ZeroNonlinearity};
use radwave::space::{Label, Space};
use radwave::spectrum::{build_spectrum, ProblemConfig};

fn landscape(nl: Arc<dyn Nonlinearity>, opts: &SearchOptions) -> Landscape {
    let space = Arc::new(Space::new(Arc::new(build_spectrum(&ProblemConfig::reference()).unwrap())).unwrap());
    Landscape::new(Functional::new(space, nl), opts).unwrap()
}

fn quick() -> SearchOptions {
    SearchOptions { seed: 11, scan_points: 61, min_starts: 4, max_starts: 4, ..Default::default() }
}

#[test]
fn reduced_functional_is_even_for_odd_f() {
    let land = landscape(Arc::new(ArctanNonlinearity::new(6.0)), &quick());
    for (a, b) in [(3.0, -1.0), (9.5, 4.25), (-14.0, 20.0)] {
        let x = DVector::from_vec(vec![a, b]);
        let p = land.sample(&x, None, Precision::Fine).unwrap();
        let m = land.sample(&-x, None, Precision::Fine).unwrap();
        assert_eq!(p.value, m.value);
        assert_eq!(p.grad, -m.grad);
    }
}

#[test]
fn reference_geometry() {
    let opts = quick();
    let land = landscape(Arc::new(ArctanNonlinearity::new(6.0)), &opts);
    let out = estimate_geometry(&land, &opts).unwrap();
    let g = out.estimate.unwrap();
    let zero = land.sample(&DVector::zeros(2), None, Precision::Fine).unwrap();
    assert_eq!(zero.value, 0.0);
    assert!(zero.value <= 0.0 && 0.0 < g.tau);
    assert!(g.tau <= g.ring_min && g.r_bar < g.r0);
    assert!(g.b_hat <= 0.0 && g.m_hat >= g.tau);
    // every sampled ring at or beyond R0 is non-positive
    for (r, hi) in out.ladder.radii.iter().zip(&out.ladder.ring_max) {
        if *r >= g.r0 {
            assert!(*hi <= 0.0, "ring {r} reaches {hi}");
        }
    }
}

#[test]
fn zero_nonlinearity_fails_geometry_but_reports_min_and_max() {
    let cfg = ProblemConfig::reference();
    let opts = SearchOptions { max_radius: 50.0, scan_points: 21, certify_scale: 1.0, ..quick() };
    let report = solve(&cfg, Arc::new(ZeroNonlinearity), &opts).unwrap();
    assert!(report.geometry.estimate.is_err());
    assert!(report.flags.iter().any(|f| f.starts_with("geometry_failure")));
    let min = report.find(PointKind::MinInBall).unwrap();
    assert!(min.trivial && min.status == PointStatus::Critical);
    let max = report.find(PointKind::GlobalMax).unwrap();
    assert_eq!(max.status, PointStatus::Unbounded);
    assert!(report.find(PointKind::MountainPass).is_none());
    assert!(!report.ordering.holds);
}

#[test]
fn linear_critical_points_have_zero_residual() {
    // c = λ − μ on E2 makes every u ∈ E2 critical with h = 0
    let opts = quick();
    let land = landscape(Arc::new(LinearNonlinearity { c: 3.5 }), &opts);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let u = land.space().random_field(&mut rng, Label::E2, 7.0);
        let s = land.sample(&land.chart().coords(&u), None, Precision::Fine).unwrap();
        assert!(s.eval.h.is_zero());
        assert!(weak_residual(land.functional(), &s.eval.point()) <= 1e-10);
    }
}

#[test]
fn stationary_cells_on_an_analytic_landscape() {
    let n = 41;
    let axis: Vec<f64> = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| (axis[i] - 0.33).powi(2) - (axis[j] + 0.21).powi(2));
    let scan = DenseScan { half_width: 2.0, axis, values, mirrored: false };
    assert!(scan.match_point(&[0.33, -0.21]).matched);
    assert!(!scan.match_point(&[1.2, 0.9]).matched);
    assert!(!scan.match_point(&[0.33, 1.0]).matched);
}

#[test]
fn scan_is_policy_independent() {
    let opts = quick();
    let land = landscape(Arc::new(ArctanNonlinearity::new(6.0)), &opts);
    let seq = dense_scan(&land, 20.0, 9, &SearchOptions { exec: Exec::Sequential, ..opts }).unwrap();
    let par = dense_scan(&land, 20.0, 9, &SearchOptions { exec: Exec::Parallel, ..opts }).unwrap();
    assert_eq!(seq, par);
    // mirrored half agrees with direct evaluation
    let direct = land.sample(&DVector::from_vec(vec![seq.axis[8], seq.axis[1]]), None, Precision::Coarse).unwrap();
    assert!((direct.value - seq.values[(8, 1)]).abs() <= 1e-9);
}

#[test]
fn reference_three_critical_points() {
    let report = solve(&ProblemConfig::reference(), Arc::new(ArctanNonlinearity::new(6.0)), &quick()).unwrap();
    let o = &report.ordering;
    assert!(o.holds, "{o:?}");
    let min = report.find(PointKind::MinInBall).unwrap();
    let max = report.find(PointKind::GlobalMax).unwrap();
    let pass = report.find(PointKind::MountainPass).unwrap();
    assert!(min.trivial && min.weak_residual == 0.0);
    for p in [min, max, pass] {
        assert!(p.is_critical(1e-6));
        assert!(p.scan_match.as_ref().unwrap().matched);
        assert!(p.certification.as_ref().unwrap().study.as_ref().unwrap().decreased);
    }
    assert_eq!(pass.morse_index, 1);
    assert!(max.hessian_eigenvalues.iter().all(|&l| l < 0.0));
    assert!(report.distinct_critical >= 3);
    let g = report.geometry.estimate.as_ref().unwrap();
    let dist = |a: &radwave::critsearch::CriticalPointReport, b: &radwave::critsearch::CriticalPointReport| {
        report.distances[report.points.iter().position(|p| std::ptr::eq(p, a)).unwrap()]
            [report.points.iter().position(|p| std::ptr::eq(p, b)).unwrap()]
    };
    assert!(dist(min, max) >= g.r_bar - 1e-6);
    assert!(dist(max, pass) >= 1e-3);
    // accepted iterates are monotone
    assert!(max.history.windows(2).all(|w| w[1] >= w[0]));
    for p in report.points.iter().filter(|p| p.kind == PointKind::MinInBall) {
        assert!(p.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
