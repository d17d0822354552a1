use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radwave::functional::{
    audit_nonlinearity, ArctanNonlinearity, Functional, LinearNonlinearity, Nonlinearity, ZeroNonlinearity,
};
use radwave::space::{CoefficientField, Label, ModeIndex, Space};
use radwave::spectrum::{build_spectrum, ProblemConfig};

fn space_for(cfg: &ProblemConfig) -> Arc<Space> {
    Arc::new(Space::new(Arc::new(build_spectrum(cfg).unwrap())).unwrap())
}

fn reference_functional() -> Functional {
    let cfg = ProblemConfig::reference();
    Functional::new(space_for(&cfg), Arc::new(ArctanNonlinearity::new(cfg.beta)))
}

fn random_mixed(s: &Space, rng: &mut ChaCha8Rng, e2: f64, rest: f64) -> CoefficientField {
    s.random_field(rng, Label::E2, e2).add(&s.random_field(rng, Label::E13, rest))
}

#[test]
fn trivial_values() {
    let phi = reference_functional();
    let s = phi.space().clone();
    assert_eq!(phi.phi(&s.zeros()), 0.0);
    assert!(phi.phi_grad(&s.zeros()).is_zero());
    let zero = Functional::new(s.clone(), Arc::new(ZeroNonlinearity));
    for md in [ModeIndex::cos(2, 2), ModeIndex::sin(5, 3), ModeIndex::cos(1, 0)] {
        let lam = s.table().mode(md.j, md.k).lambda;
        let u = s.unit(md).scaled(0.7);
        assert!((zero.phi(&u) - 0.5 * (lam - 1.5) * 0.49).abs() < 1e-12);
    }
}

#[test]
fn phi_matches_refined_quadrature() {
    let phi = reference_functional();
    let mut cfg = ProblemConfig::reference();
    cfg.truncation.nt *= 2;
    cfg.truncation.nr *= 2;
    let fine = Functional::new(space_for(&cfg), Arc::new(ArctanNonlinearity::new(6.0)));
    let u = phi.space().unit(ModeIndex::cos(2, 2)).scaled(0.1);
    let (a, b) = (phi.phi(&u), fine.phi(&u));
    assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
}

#[test]
fn gradient_matches_central_differences() {
    let phi = reference_functional();
    let s = phi.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-5;
    for _ in 0..20 {
        let u = random_mixed(&s, &mut rng, 8.0, 3.0);
        let v = random_mixed(&s, &mut rng, 1.0, 1.0);
        let analytic = phi.phi_grad(&u).dot(&v);
        let fd = (phi.phi(&u.axpy(h, &v)) - phi.phi(&u.axpy(-h, &v))) / (2.0 * h);
        assert!((analytic - fd).abs() <= 1e-6 * analytic.abs(), "{analytic} vs {fd}");
    }
}

#[test]
fn hessian_matches_second_differences() {
    let phi = reference_functional();
    let s = phi.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let h = 1e-3;
    for _ in 0..10 {
        let u = random_mixed(&s, &mut rng, 8.0, 3.0);
        let v = random_mixed(&s, &mut rng, 1.0, 1.0);
        let analytic = phi.hessian_form(&u, &v);
        let p0 = phi.phi(&u);
        let fd = (phi.phi(&u.axpy(h, &v)) - 2.0 * p0 + phi.phi(&u.axpy(-h, &v))) / (h * h);
        assert!((analytic - fd).abs() <= 1e-5 * analytic.abs(), "{analytic} vs {fd}");
        let applied = phi.hessian_apply(&u, &v).dot(&v);
        assert!((applied - analytic).abs() <= 1e-10 * analytic.abs().max(1.0));
    }
}

#[test]
fn linear_instance_is_diagonal() {
    let s = reference_functional().space().clone();
    let lin = Functional::new(s.clone(), Arc::new(LinearNonlinearity { c: 2.0 }));
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let u = random_mixed(&s, &mut rng, 2.0, 2.0);
    let g = lin.phi_grad(&u);
    for md in s.modes() {
        let lam = s.table().mode(md.j, md.k).lambda;
        assert_eq!(g.get(md), (lam - 1.5 - 2.0) * u.get(md));
    }
}

#[test]
fn hessian_sign_structure() {
    let phi = reference_functional();
    let s = phi.space().clone();
    let c = *s.table().constants();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let u = random_mixed(&s, &mut rng, 10.0, 5.0);
        let v3 = s.random_field(&mut rng, Label::E3, 1.0);
        let v1 = s.random_field(&mut rng, Label::E1, 1.0);
        let eta_ratio = s.table().config().eta / c.mu0;
        assert!(phi.hessian_form(&u, &v3) >= eta_ratio * s.e_norm_sq(&v3) * (1.0 - 1e-10));
        assert!(phi.hessian_form(&u, &v1) <= -s.e_norm_sq(&v1) * (1.0 - 1e-10));
    }
    let v = s.random_field(&mut rng, Label::E13, 1.0);
    assert!((phi.hessian_form(&s.zeros(), &v) - s.quadratic_form(&v)).abs() < 1e-14);
}

#[test]
fn gradient_monotonicity_on_e1_and_e3() {
    let phi = reference_functional();
    let s = phi.space().clone();
    let gamma = s.table().constants().gamma;
    assert!((gamma - 1.0 / 13.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..200 {
        let base23 = s.random_field(&mut rng, Label::E2, 10.0).add(&s.random_field(&mut rng, Label::E3, 3.0));
        let v = s.random_field(&mut rng, Label::E1, 3.0);
        let w = s.random_field(&mut rng, Label::E1, 3.0);
        let d = v.sub(&w);
        let lhs = phi.phi_grad(&base23.add(&v)).sub(&phi.phi_grad(&base23.add(&w))).dot(&d);
        assert!(lhs <= -gamma * (1.0 - 1e-8) * s.e_norm_sq(&d));

        let mut p = s.random_field(&mut rng, Label::E2, 10.0);
        p = p.add(&s.random_field(&mut rng, Label::E1, 3.0));
        let v = s.random_field(&mut rng, Label::E3, 3.0);
        let w = s.random_field(&mut rng, Label::E3, 3.0);
        let d = v.sub(&w);
        let lhs = phi.phi_grad(&p.add(&v)).sub(&phi.phi_grad(&p.add(&w))).dot(&d);
        assert!(lhs >= gamma * (1.0 - 1e-8) * s.e_norm_sq(&d));
    }
}

#[test]
fn phi_decreases_along_negative_gradient() {
    let phi = reference_functional();
    let s = phi.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..50 {
        let u = random_mixed(&s, &mut rng, 6.0, 2.0);
        let (p0, g) = phi.phi_and_grad(&u);
        let step = 1e-4 / g.l2_norm().max(1.0);
        assert!(phi.phi(&u.axpy(-step, &g)) < p0);
    }
}

#[test]
fn nonlinearity_audit() {
    let s = reference_functional().space().clone();
    let cfg = s.table().config().clone();
    let c = *s.table().constants();
    let nl = ArctanNonlinearity::new(cfg.beta);
    let ok = audit_nonlinearity(&nl, &c, cfg.eta, s.radius(), s.period());
    assert!(ok.passed, "{ok:?}");
    assert!(ok.df_max < 6.0 && ok.df_max > 5.99);
    assert!(nl.is_odd());
    // η = μ₀ leaves no margin for ∂f/∂u
    let bad = audit_nonlinearity(&nl, &c, c.mu0, s.radius(), s.period());
    assert!(!bad.passed);
    let lin = audit_nonlinearity(&LinearNonlinearity { c: 2.0 }, &c, cfg.eta, s.radius(), s.period());
    assert!(!lin.contract_instance);
}
