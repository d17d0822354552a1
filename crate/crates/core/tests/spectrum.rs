use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use radwave::exec::Exec;
use radwave::spectrum::arithmetic::pair_satisfies_dichotomy;
use radwave::spectrum::{build_spectrum, gap_audit, ArithmeticProfile, ProblemConfig, SpectrumError, Subspace};

fn config(n: u32, mu: f64, beta: f64, j_max: usize, k_max: usize) -> ProblemConfig {
    let mut c = ProblemConfig::reference();
    c.n = n;
    c.mu = mu;
    c.beta = beta;
    c.truncation.j_max = j_max;
    c.truncation.k_max = k_max;
    c
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[test]
fn closed_form_spectra_for_odd_dimensions() {
    let t1 = build_spectrum(&config(1, 1.5, 6.0, 200, 200)).unwrap();
    let t3 = build_spectrum(&config(3, 0.3, 3.5, 200, 200)).unwrap();
    for j in 1..=200usize {
        for k in 0..=200usize {
            let (jf, kf) = (j as f64, k as f64);
            let e1 = (2.0 * jf - 1.0).powi(2) - kf * kf;
            let e3 = 4.0 * jf * jf - kf * kf;
            assert!((t1.mode(j, k).lambda - e1).abs() <= 1e-10, "n=1 ({j},{k})");
            assert!((t3.mode(j, k).lambda - e3).abs() <= 1e-10, "n=3 ({j},{k})");
        }
    }
}

#[test]
fn spec_eigenvalue_examples() {
    let t1 = build_spectrum(&ProblemConfig::reference()).unwrap();
    assert!((t1.mode(2, 2).lambda - 5.0).abs() < 1e-12);
    assert!(t1.mode(1, 1).lambda.abs() < 1e-12 && t1.mode(1, 1).resonant);
    let t3 = build_spectrum(&config(3, 0.3, 3.5, 20, 40)).unwrap();
    assert!(t3.mode(1, 2).lambda.abs() < 1e-12 && t3.mode(1, 2).resonant);
}

#[test]
fn resonant_sets_in_moderate_boxes() {
    let r = rat(1, 2);
    let t = rat(2, 1);
    let p1 = ArithmeticProfile::new(1, &r, &t).unwrap();
    let p2 = ArithmeticProfile::new(2, &r, &t).unwrap();
    let p3 = ArithmeticProfile::new(3, &r, &t).unwrap();
    let p5 = ArithmeticProfile::new(5, &r, &t).unwrap();
    let a1 = gap_audit(&p1, 800, 800, Exec::Parallel);
    let a2 = gap_audit(&p2, 800, 800, Exec::Parallel);
    let a3 = gap_audit(&p3, 100, 100, Exec::Parallel);
    let a5 = gap_audit(&p5, 300, 300, Exec::Parallel);
    for a in [&a1, &a2, &a3, &a5] {
        assert!(a.passed());
        assert!(a.min_nonzero_gap.as_ref().unwrap().gap_over_pi_f64 >= 0.25);
    }
    assert!(a1.resonant_pairs.iter().all(|&(j, k)| k == 2 * j - 1));
    assert_eq!(a1.resonant_count, (1..=800u64).filter(|j| 2 * j - 1 <= 800).count() as u64);
    assert_eq!(a2.resonant_count, 0);
    assert!(!p2.resonant_case);
    let want3: Vec<(u64, u64)> = (1..=50).map(|j| (j, 2 * j)).collect();
    assert_eq!(a3.resonant_pairs, want3);
    assert!(a5.resonant_pairs.iter().all(|&(j, k)| k == 2 * j + 1));
}

#[test]
fn dichotomy_holds_for_other_rational_ratios() {
    for &(n, rp, rq, tp, tq) in &[(1, 3, 4, 5, 3), (2, 2, 3, 7, 2), (4, 1, 1, 3, 1), (7, 5, 6, 1, 1)] {
        let p = ArithmeticProfile::new(n, &rat(rp, rq), &rat(tp, tq)).unwrap();
        let audit = gap_audit(&p, 200, 200, Exec::Sequential);
        assert!(audit.passed());
        assert_eq!(audit.resonant_count > 0, p.resonant_case, "n={n}");
        for &(j, k) in audit.resonant_pairs.iter().take(20) {
            assert_eq!(p.beta_j(j), p.tau_k(k));
        }
        for j in (1..200).step_by(17) {
            for k in (0..200).step_by(13) {
                assert!(pair_satisfies_dichotomy(&p, j, k));
            }
        }
    }
}

#[test]
fn resonant_eigenvalues_accumulate_at_lambda0() {
    let t3 = build_spectrum(&config(3, 0.3, 3.5, 60, 130)).unwrap();
    let l0 = t3.profile().lambda0;
    assert!(t3.modes().iter().filter(|m| m.resonant).all(|m| (m.lambda - l0).abs() < 1e-3));

    let t5 = build_spectrum(&config(5, 1.0, 5.0, 60, 130)).unwrap();
    let l0 = t5.profile().lambda0;
    assert!((l0 + 8.0 / std::f64::consts::PI.powi(2)).abs() < 1e-14);
    let mut res: Vec<_> = t5.modes().iter().filter(|m| m.resonant).collect();
    res.sort_by_key(|m| m.j);
    let dev: Vec<f64> = res.iter().map(|m| (m.lambda - l0).abs()).collect();
    assert!(dev.len() >= 50);
    assert!(dev[5..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*dev.last().unwrap() < 1e-3);
    assert!(res.iter().all(|m| m.k == 2 * m.j + 1));
}

#[test]
fn non_resonant_eigenvalues_escape() {
    let t = build_spectrum(&config(1, 1.5, 6.0, 200, 200)).unwrap();
    for m in t.modes().iter().filter(|m| !m.resonant) {
        // |λ| ≥ (2j−1+k) for n = 1, so only finitely many stay below 10³
        if 2 * m.j - 1 + m.k > 1000 {
            assert!(m.lambda.abs() > 1e3);
        }
    }
    let small = t.modes().iter().filter(|m| !m.resonant && m.lambda.abs() <= 1e3).count();
    assert!(small < 5000);
}

#[test]
fn labels_partition_modes() {
    let t = build_spectrum(&ProblemConfig::reference()).unwrap();
    let (mu, beta) = (t.mu(), t.beta());
    for m in t.modes() {
        let expected = if m.lambda < mu {
            Subspace::E1
        } else if m.lambda < beta {
            Subspace::E2
        } else {
            Subspace::E3
        };
        assert_eq!(m.subspace, expected);
        assert!((m.lambda - mu).abs() >= t.constants().delta);
    }
    let total: usize = [Subspace::E1, Subspace::E2, Subspace::E3].iter().map(|&s| t.count_in(s)).sum();
    assert_eq!(total, t.j_max() * (2 * t.k_max() + 1));
}

#[test]
fn validation_failures() {
    let err = build_spectrum(&config(1, 1.0, 6.0, 12, 24)).unwrap_err();
    assert_eq!(err.to_string(), "mu is within delta_min of eigenvalue 1");
    let err = build_spectrum(&config(1, 1.5, 5.0, 12, 24)).unwrap_err();
    assert!(matches!(err, SpectrumError::NearEigenvalue { which: "beta", .. }));
    // (5.5, 6) holds no eigenvalue
    let err = build_spectrum(&config(1, 5.5, 6.0, 12, 24)).unwrap_err();
    assert!(matches!(err, SpectrumError::EmptyWindow { .. }));
    // μ = 2.5 ≥ β⁺ − β = 2
    let err = build_spectrum(&config(1, 2.5, 6.0, 12, 24)).unwrap_err();
    assert!(matches!(err, SpectrumError::MuOutOfRange { .. }));
}

#[test]
fn midpoint_mu_has_half_gap() {
    // adjacent eigenvalues 0 and 1
    let t = build_spectrum(&config(1, 0.5, 3.0, 12, 24)).unwrap();
    assert!((t.constants().delta - 0.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn random_mu_beta_configs_are_consistent(mu in 0.05f64..3.0, beta in 3.0f64..20.0) {
        if let Ok(t) = build_spectrum(&config(1, mu, beta, 14, 28)) {
            let c = t.constants();
            prop_assert!(c.beta_minus < beta && beta < c.beta_plus);
            prop_assert!(c.mu0 > beta);
            prop_assert!(c.gamma1 > 0.0 && c.gamma2 > 0.0 && c.delta > 0.0);
            prop_assert!(t.count_in(Subspace::E2) > 0);
        }
    }
}
