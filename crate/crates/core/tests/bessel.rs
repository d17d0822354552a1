use std::f64::consts::PI;

use proptest::prelude::*;
use radwave::bessel::{eval_j, eval_j_prime, eval_j_scaled, mcmahon_guess, zeros, BesselOrder};

fn order(nu: f64) -> BesselOrder {
    BesselOrder::new(nu).unwrap()
}

/// Bessel's integral J_n(x) = (1/2π)∫ cos(nτ − x sin τ) dτ over a full period,
/// evaluated with the trapezoid rule (spectrally accurate for periodic integrands).
fn integral_oracle(n: u32, x: f64) -> f64 {
    let m = (2.0 * x) as usize + 64;
    let h = 2.0 * PI / m as f64;
    let s: f64 = (0..m)
        .map(|i| {
            let t = i as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum();
    s / m as f64
}

/// Plain power series Σ (−1)^m (x/2)^{2m+n} / (m!(m+n)!) for integer n.
fn series_oracle(n: u32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..80 {
        term *= -(0.25 * x * x) / (m as f64 * (m + n) as f64);
        sum += term;
    }
    sum
}

/// Spherical closed form via upward recurrence from J_{±1/2}.
fn half_integer_oracle(l: u32, x: f64) -> f64 {
    let c = (2.0 / (PI * x)).sqrt();
    let (mut a, mut b) = (c * x.cos(), c * x.sin());
    for i in 0..l {
        let nu = 0.5 + i as f64;
        let next = 2.0 * nu / x * b - a;
        a = b;
        b = next;
    }
    b
}

#[test]
fn integer_orders_match_the_integral_oracle() {
    let mut xs: Vec<f64> = (1..400).map(|i| i as f64 * 0.173).collect();
    xs.extend([100.0, 317.3, 1000.0, 4321.5, 10_000.0]);
    for n in 0..=3u32 {
        for &x in &xs {
            let got = eval_j(order(n as f64), x).unwrap();
            let want = integral_oracle(n, x);
            assert!((got - want).abs() <= 1e-12, "J_{n}({x}) = {got}, oracle {want}");
        }
    }
}

#[test]
fn half_integer_orders_match_closed_forms() {
    // upward recurrence is stable only above the order, so stay at x ≥ 5
    for l in 0..=3u32 {
        for i in 0..500 {
            let x = 5.0 + i as f64 * 0.731;
            let got = eval_j(order(0.5 + l as f64), x).unwrap();
            let want = half_integer_oracle(l, x);
            assert!((got - want).abs() <= 1e-12, "J_{}({x})", 0.5 + l as f64);
        }
    }
    let x = 9_876.5;
    assert!((eval_j(order(-0.5), x).unwrap() - (2.0 / (PI * x)).sqrt() * x.cos()).abs() <= 1e-15);
}

#[test]
fn spec_evaluation_examples() {
    assert!(eval_j(order(-0.5), PI / 2.0).unwrap().abs() <= 1e-15);
    assert!(eval_j(order(0.5), PI).unwrap().abs() <= 1e-15);
    assert_eq!(eval_j(order(0.0), 0.0).unwrap(), 1.0);
    assert!(eval_j(order(-0.5), 0.0).is_err());
    assert!(eval_j(order(0.0), -0.1).is_err());
    assert!(eval_j_prime(order(0.0), 0.0).is_err());
}

#[test]
fn derivative_of_j0_is_minus_j1() {
    let d = eval_j_prime(order(0.0), 1.0).unwrap();
    let j1 = series_oracle(1, 1.0);
    assert!((d + j1).abs() <= 1e-14 * j1.abs(), "{d} vs {}", -j1);
}

fn central_difference(nu: f64, x: f64) -> f64 {
    let h = 1e-5 * x.max(1.0);
    (eval_j(order(nu), x + h).unwrap() - eval_j(order(nu), x - h).unwrap()) / (2.0 * h)
}

#[test]
fn derivative_matches_finite_differences_at_examples() {
    for &(nu, x) in &[(-0.5, PI / 2.0), (0.5, PI), (0.0, 1.0), (1.5, 20.0)] {
        let d = eval_j_prime(order(nu), x).unwrap();
        let fd = central_difference(nu, x);
        assert!((d - fd).abs() <= 1e-6 * d.abs(), "nu={nu} x={x}: {d} vs {fd}");
    }
}

#[test]
fn zero_examples() {
    assert!((zeros(order(-0.5), 1).unwrap().get(1).unwrap() - PI / 2.0).abs() <= 1e-15);
    assert!((zeros(order(0.5), 2).unwrap().get(2).unwrap() - 2.0 * PI).abs() <= 1e-14);
    // bisection on the power-series oracle
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if series_oracle(0, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = zeros(order(0.0), 1).unwrap().get(1).unwrap();
    assert!((z - lo).abs() <= 1e-14);
    assert!((z - 2.404825557695773).abs() <= 1e-14);
}

#[test]
fn zero_tables_satisfy_their_invariants() {
    for &nu in &[-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let t = zeros(order(nu), 200).unwrap();
        let z = t.as_slice();
        assert_eq!(z.len(), 200);
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        for &g in z {
            assert!(eval_j(order(nu), g).unwrap().abs() <= 1e-12);
        }
        let dev: Vec<f64> = (1..=200).map(|j| (z[j - 1] - mcmahon_guess(order(nu), j)).abs()).collect();
        assert!(dev.iter().all(|&d| d <= 1.0), "nu={nu}");
        assert!(dev[1..].windows(2).all(|w| w[1] <= w[0] + 1e-12), "nu={nu}: McMahon deviation not decreasing");
    }
}

#[test]
fn zeros_interlace_with_next_order() {
    for &nu in &[-0.5, 0.0, 0.5, 1.0, 1.5] {
        let a = zeros(order(nu), 150).unwrap();
        let b = zeros(order(nu + 1.0), 150).unwrap();
        for j in 1..150 {
            let (x, y, x2) = (a.get(j).unwrap(), b.get(j).unwrap(), a.get(j + 1).unwrap());
            assert!(x < y && y < x2, "nu={nu} j={j}");
        }
    }
}

#[test]
fn half_integer_zeros_are_exact() {
    let m = zeros(order(-0.5), 400).unwrap();
    let p = zeros(order(0.5), 400).unwrap();
    for j in 1..=400 {
        let a = (2 * j - 1) as f64 * PI / 2.0;
        let b = j as f64 * PI;
        assert!((m.get(j).unwrap() - a).abs() <= 1e-12 * a);
        assert!((p.get(j).unwrap() - b).abs() <= 1e-12 * b);
    }
}

proptest! {
    #[test]
    fn derivative_agrees_with_finite_differences(nu in -0.5f64..3.0, x in 0.5f64..200.0) {
        let d = eval_j_prime(order(nu), x).unwrap();
        let fd = central_difference(nu, x);
        // skip points where the derivative itself nearly vanishes
        prop_assume!(d.abs() > 1e-3);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs(), "{} vs {}", d, fd);
    }

    #[test]
    fn three_term_recurrence_holds(nu in -0.5f64..3.0, x in 0.5f64..500.0) {
        let j = |v: f64| eval_j(order(v), x).unwrap();
        let lhs = j(nu) + j(nu + 2.0);
        let rhs = 2.0 * (nu + 1.0) / x * j(nu + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()));
    }

    #[test]
    fn scaled_form_is_consistent(nu in -0.5f64..3.0, x in 0.01f64..50.0) {
        let s = eval_j_scaled(order(nu), x).unwrap();
        let j = eval_j(order(nu), x).unwrap();
        prop_assert!((s * x.powf(nu) - j).abs() <= 1e-13 * (1.0 + j.abs()));
    }
}
