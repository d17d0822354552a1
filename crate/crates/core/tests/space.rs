use std::sync::Arc;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radwave::space::{CoefficientField, GridSampling, Label, ModeIndex, Space};
use radwave::spectrum::{build_spectrum, ProblemConfig};

fn space_for(cfg: &ProblemConfig) -> Space {
    Space::new(Arc::new(build_spectrum(cfg).unwrap())).unwrap()
}

fn reference() -> Space {
    space_for(&ProblemConfig::reference())
}

#[test]
fn gram_matrix_is_identity() {
    let s = reference();
    let modes = s.modes();
    let mut worst = 0.0f64;
    for (i, &mi) in modes.iter().enumerate() {
        let col = s.analyze(&s.synthesize(&s.unit(mi)));
        for (jx, &mj) in modes.iter().enumerate() {
            let want = if i == jx { 1.0 } else { 0.0 };
            worst = worst.max((col.get(mj) - want).abs());
        }
    }
    assert!(worst <= 1e-8, "max Gram defect {worst:e}");
}

#[test]
fn quadrature_exactness() {
    for n in 1..=5u32 {
        let g = GridSampling::new(n, 1.3, 2.0, 8, 10).unwrap();
        for p in 0..=(2 * 10 - 1 - (n as i32 - 1)) {
            let got: f64 = g.r.iter().zip(&g.wr).map(|(r, w)| w * r.powi(p)).sum();
            let want = 1.3f64.powi(p + n as i32) / f64::from(p as u32 + n);
            assert!((got - want).abs() <= 1e-13 * want.max(1.0), "n={n} p={p}");
        }
    }
    let g = GridSampling::new(1, 1.0, 2.0 * std::f64::consts::PI, 16, 4).unwrap();
    for freq in 1..8 {
        let s: f64 = g.t.iter().map(|t| (freq as f64 * t).cos() * (3.0 * t).cos()).sum::<f64>() * g.wt;
        let want = if freq == 3 { std::f64::consts::PI } else { 0.0 };
        assert_abs_diff_eq!(s, want, epsilon = 1e-13);
    }
}

#[test]
fn eigenfunctions_are_normalised_pointwise() {
    let s = reference();
    let g = s.grid();
    for &mode in &[ModeIndex::cos(1, 0), ModeIndex::cos(2, 2), ModeIndex::sin(7, 13), ModeIndex::cos(12, 24)] {
        let mut acc = 0.0;
        for &t in &g.t {
            for (r, w) in g.r.iter().zip(&g.wr) {
                acc += s.eigenfunction_value(mode, t, *r).unwrap().powi(2) * w * g.wt;
            }
        }
        assert!((acc - 1.0).abs() <= 1e-8, "{mode:?}: {acc}");
        for &t in &[0.0, 1.0, s.period()] {
            assert!(s.eigenfunction_value(mode, t, s.radius()).unwrap().abs() <= 1e-12);
        }
    }
    assert!(s.eigenfunction_value(ModeIndex::cos(1, 0), -0.1, 0.5).is_err());
    assert!(s.eigenfunction_value(ModeIndex::cos(1, 0), 0.1, 2.0).is_err());
    assert!(s.eigenfunction_value(ModeIndex::sin(1, 0), 0.1, 0.5).is_err());
}

#[test]
fn three_dimensional_radial_factor_is_sinc() {
    let mut cfg = ProblemConfig::reference();
    cfg.n = 3;
    cfg.mu = 0.3;
    cfg.beta = 3.5;
    let s = space_for(&cfg);
    let mode = ModeIndex::cos(1, 0);
    let c = s.eigenfunction_value(mode, 0.0, 0.0).unwrap() / 2.0;
    for i in 1..20 {
        let r = i as f64 * s.radius() / 20.0;
        let want = c * (2.0 * r).sin() / r;
        assert!((s.eigenfunction_value(mode, 0.0, r).unwrap() - want).abs() < 1e-12);
    }
    assert!(s.eigenfunction_value(mode, 0.3, s.radius()).unwrap().abs() < 1e-12);
}

#[test]
fn synthesis_and_analysis_round_trip() {
    let s = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let u = s.random_field(&mut rng, Label::E13, 3.0).add(&s.random_field(&mut rng, Label::E2, 1.0));
        let back = s.analyze(&s.synthesize(&u));
        assert!(back.sub(&u).max_abs() <= 1e-10);
    }
    assert!(s.synthesize(&s.zeros()).iter().all(|&v| v == 0.0));
    assert!(s.analyze(&s.synthesize(&s.zeros())).is_zero());
    let e = ModeIndex::sin(3, 5);
    let v = s.synthesize(&s.unit(e));
    let (a, b) = (5, 17);
    let want = s.eigenfunction_value(e, s.grid().t[a], s.grid().r[b]).unwrap();
    assert!((v[(a, b)] - want).abs() < 1e-13);
}

#[test]
fn nonlinear_analysis_matches_refined_quadrature() {
    let s = reference();
    let mut cfg = ProblemConfig::reference();
    cfg.truncation.nt *= 2;
    cfg.truncation.nr *= 2;
    let fine = space_for(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = s.random_field(&mut rng, Label::E2, 0.5).add(&s.random_field(&mut rng, Label::E13, 0.2));
    let f = |x: f64| 6.0 * (x - x.atan());
    let coarse = s.analyze(&s.synthesize(&u).mapv(f));
    let refined = fine.analyze(&fine.synthesize(&u).mapv(f));
    let d = coarse.sub(&refined).max_abs();
    assert!(d <= 1e-7, "aliasing defect {d:e}");
}

#[test]
fn projections() {
    let s = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = s.random_field(&mut rng, Label::E13, 1.0).add(&s.random_field(&mut rng, Label::E2, 1.0));
    let p: Vec<CoefficientField> = [Label::E1, Label::E2, Label::E3].iter().map(|&l| s.project(&u, l)).collect();
    assert_eq!(p[0].add(&p[1]).add(&p[2]), u);
    for (i, l) in [Label::E1, Label::E2, Label::E3, Label::E0, Label::E13].iter().enumerate() {
        let once = s.project(&u, *l);
        assert_eq!(s.project(&once, *l), once, "label #{i}");
    }
    assert!(s.project(&p[2], Label::E1).is_zero());
    assert_eq!(p[0].dot(&p[2]), 0.0);
    let total = s.e_norm_sq(&u);
    let parts: f64 = p.iter().map(|x| s.e_norm_sq(x)).sum();
    assert!((total - parts).abs() <= 1e-14 * total);
    let e2 = s.unit(ModeIndex::cos(2, 2));
    assert_eq!(s.project(&e2, Label::E2), e2);
    assert_eq!(s.project(&u, Label::E13), p[0].add(&p[2]));
    // resonant modes of the reference setting: k = 2j − 1, eigenvalue 0, inside E1
    let e0 = s.project(&u, Label::E0);
    assert!(s.project(&e0, Label::E1) == e0 && !e0.is_zero());
}

#[test]
fn norms_of_single_modes() {
    let s = reference();
    let n = s.norms(&s.unit(ModeIndex::cos(2, 2)));
    assert!((n.e_norm - 3.5f64.sqrt()).abs() < 1e-12);
    assert!((n.l2_norm - 1.0).abs() < 1e-15);
    for md in [ModeIndex::cos(1, 0), ModeIndex::sin(4, 9)] {
        let lam = s.table().mode(md.j, md.k).lambda;
        assert!((s.e_norm(&s.unit(md)) - (lam - 1.5).abs().sqrt()).abs() < 1e-12);
    }
}

#[test]
fn embedding_inequality_on_random_fields() {
    let s = reference();
    let delta = s.table().constants().delta;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let u = s.random_field(&mut rng, Label::E13, 1.0).add(&s.random_field(&mut rng, Label::E2, 1.0));
        let n = s.norms(&u);
        assert!(n.l2_norm <= n.e_norm / delta.sqrt());
        // Cauchy–Schwarz with |Ω|_ρ = T·R for n = 1
        assert!(n.l1_norm_estimate <= n.l2_norm * (s.period() * s.radius()).sqrt() * (1.0 + 1e-12));
    }
}

#[test]
fn quadratic_form_identities_and_splitting_constants() {
    let s = reference();
    let c = *s.table().constants();
    let beta = s.table().beta();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let u1 = s.random_field(&mut rng, Label::E1, 1.0);
        let u23 = s.random_field(&mut rng, Label::E2, 1.0).add(&s.random_field(&mut rng, Label::E3, 1.0));
        assert_eq!(s.quadratic_form(&u1), -s.e_norm_sq(&u1));
        assert_eq!(s.quadratic_form(&u23), s.e_norm_sq(&u23));

        let u12 = u1.add(&s.project(&u23, Label::E2));
        let u3 = s.project(&u23, Label::E3);
        let shifted_form = |u: &CoefficientField| s.quadratic_form(u) - beta * u.dot(u);
        assert!(shifted_form(&u12) <= -c.gamma1 * s.e_norm_sq(&u12));
        assert!(shifted_form(&u3) >= c.gamma2 * s.e_norm_sq(&u3));
    }
}

proptest! {
    #[test]
    fn embed_preserves_shared_coefficients(seed in 0u64..1000) {
        let s = reference();
        let mut cfg = ProblemConfig::reference();
        cfg.truncation = cfg.truncation.scaled(2.0);
        let big = space_for(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = s.random_field(&mut rng, Label::E13, 1.0);
        let e = big.embed(&u);
        prop_assert!((big.e_norm(&e) - s.e_norm(&u)).abs() <= 1e-12);
        prop_assert_eq!(s.embed(&e), u);
    }
}
