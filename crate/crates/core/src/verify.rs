//! Property suites behind `radwave verify`.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::audit_zero_table;
use crate::exec::Exec;
use crate::functional::{audit_nonlinearity, Functional, LinearNonlinearity, Nonlinearity};
use crate::reduction::{Reduction, ReductionOptions};
use crate::space::{CoefficientField, Label, Space};
use crate::spectrum::arithmetic::gap_audit;
use crate::spectrum::SpectrumTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub seed: u64,
    pub gap_j_max: u64,
    pub gap_k_max: u64,
    pub gradient_fields: usize,
    pub hessian_pairs: usize,
    pub constant_fields: usize,
    pub monotonicity_samples: usize,
    pub reduction_samples: usize,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            gap_j_max: 10_000,
            gap_k_max: 10_000,
            gradient_fields: 20,
            hessian_pairs: 10,
            constant_fields: 200,
            monotonicity_samples: 200,
            reduction_samples: 10,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the suite's figure of merit.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &str, passed: bool, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, worst, tolerance, detail: detail.into() }
    }
}

fn exact(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap_or_else(BigRational::zero)
}

/// `Σ (λ_m − μ − β) c_m²` against `s·Σ |λ_m − μ| c_m²`, both in exact
/// rational arithmetic on the stored floats; returns `lhs − s·rhs`.
pub fn exact_form_margin(space: &Space, u: &CoefficientField, s: f64) -> BigRational {
    let beta = exact(space.table().beta());
    let s = exact(s);
    let mut acc = BigRational::zero();
    for ((i, m), &c) in u.coeffs().indexed_iter() {
        if c == 0.0 {
            continue;
        }
        let d = space.shifted()[(i, m)];
        let c2 = exact(c) * exact(c);
        acc += (exact(d) - &beta - &s * exact(d.abs())) * c2;
    }
    acc
}

/// For `n = 1` and `n = 3` the zeros are `(j − ½)π` and `jπ`, so every
/// `λ_jk` has a closed form.
fn closed_form(table: &SpectrumTable) -> Option<SuiteResult> {
    let cfg = table.config();
    let offset = match cfg.n {
        1 => 0.5,
        3 => 0.0,
        _ => return None,
    };
    let (r, t) = (cfg.radius(), cfg.period());
    let worst = table
        .modes()
        .iter()
        .map(|m| {
            let g = (m.j as f64 - offset) * std::f64::consts::PI;
            let want = (g / r).powi(2) - (2.0 * m.k as f64 * std::f64::consts::PI / t).powi(2);
            (m.lambda - want).abs()
        })
        .fold(0.0, f64::max);
    Some(SuiteResult::new("closed_form_spectrum", worst <= 1e-10, worst, 1e-10, format!("{} modes", table.modes().len())))
}

fn gram(space: &Space) -> SuiteResult {
    let mut worst = 0.0f64;
    for md in space.modes() {
        let col = space.analyze(&space.synthesize(&space.unit(md)));
        for (idx, &v) in col.coeffs().indexed_iter() {
            let target = if idx == (md.j - 1, md.column()) { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    SuiteResult::new("gram", worst <= 1e-8, worst, 1e-8, format!("{} modes", space.dim()))
}

fn gaps(table: &SpectrumTable, opts: &VerifyOptions) -> SuiteResult {
    let audit = gap_audit(table.profile(), opts.gap_j_max, opts.gap_k_max, opts.exec);
    let detail = format!(
        "{} pairs, {} resonant, min nonzero gap {}·π",
        audit.pairs,
        audit.resonant_count,
        audit.min_nonzero_gap.as_ref().map_or("-".into(), |g| g.gap_over_pi.clone())
    );
    SuiteResult::new("gap_audit", audit.passed(), audit.violations as f64, 0.0, detail)
}

fn random_mixed(s: &Space, rng: &mut ChaCha8Rng, e2: f64, rest: f64) -> CoefficientField {
    s.random_field(rng, Label::E2, e2).add(&s.random_field(rng, Label::E13, rest))
}

fn gradient_fd(phi: &Functional, opts: &VerifyOptions) -> SuiteResult {
    let s = phi.space();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4744);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..opts.gradient_fields {
        let u = random_mixed(s, &mut rng, 8.0, 3.0);
        let v = random_mixed(s, &mut rng, 1.0, 1.0);
        let analytic = phi.phi_grad(&u).dot(&v);
        let fd = (phi.phi(&u.axpy(h, &v)) - phi.phi(&u.axpy(-h, &v))) / (2.0 * h);
        worst = worst.max((analytic - fd).abs() / analytic.abs());
    }
    SuiteResult::new("gradient_fd", worst <= 1e-6, worst, 1e-6, format!("{} fields", opts.gradient_fields))
}

fn hessian_fd(phi: &Functional, opts: &VerifyOptions) -> SuiteResult {
    let s = phi.space();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4844);
    let h = 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..opts.hessian_pairs {
        let u = random_mixed(s, &mut rng, 8.0, 3.0);
        let v = random_mixed(s, &mut rng, 1.0, 1.0);
        let analytic = phi.hessian_form(&u, &v);
        let fd = (phi.phi(&u.axpy(h, &v)) - 2.0 * phi.phi(&u) + phi.phi(&u.axpy(-h, &v))) / (h * h);
        worst = worst.max((analytic - fd).abs() / analytic.abs());
    }
    SuiteResult::new("hessian_fd", worst <= 1e-5, worst, 1e-5, format!("{} pairs", opts.hessian_pairs))
}

fn constants(space: &Space, opts: &VerifyOptions) -> SuiteResult {
    let c = space.table().constants();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4b43);
    let mut failures = 0usize;
    for _ in 0..opts.constant_fields {
        let u12 = space.random_field(&mut rng, Label::E1, 1.0).add(&space.random_field(&mut rng, Label::E2, 1.0));
        let u3 = space.random_field(&mut rng, Label::E3, 1.0);
        // Q(u) − β|u|² ≤ −γ₁‖u‖² on E₁⊕E₂ and ≥ γ₂‖u‖² on E₃
        if exact_form_margin(space, &u12, -c.gamma1) > BigRational::zero() {
            failures += 1;
        }
        if exact_form_margin(space, &u3, c.gamma2) < BigRational::zero() {
            failures += 1;
        }
    }
    SuiteResult::new(
        "splitting_constants",
        failures == 0,
        failures as f64,
        0.0,
        format!("gamma1 = {}, gamma2 = {}, {} fields", c.gamma1, c.gamma2, opts.constant_fields),
    )
}

fn monotonicity(phi: &Functional, opts: &VerifyOptions) -> SuiteResult {
    let s = phi.space();
    let gamma = s.table().constants().gamma;
    let slack = 1.0 - 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4d4f);
    let mut worst = f64::INFINITY;
    for _ in 0..opts.monotonicity_samples {
        let base = s.random_field(&mut rng, Label::E2, 10.0).add(&s.random_field(&mut rng, Label::E3, 3.0));
        let (v, w) = (s.random_field(&mut rng, Label::E1, 3.0), s.random_field(&mut rng, Label::E1, 3.0));
        let d = v.sub(&w);
        let lhs = phi.phi_grad(&base.add(&v)).sub(&phi.phi_grad(&base.add(&w))).dot(&d);
        worst = worst.min(-lhs / (gamma * s.e_norm_sq(&d)));

        let base = s.random_field(&mut rng, Label::E2, 10.0).add(&s.random_field(&mut rng, Label::E1, 3.0));
        let (v, w) = (s.random_field(&mut rng, Label::E3, 3.0), s.random_field(&mut rng, Label::E3, 3.0));
        let d = v.sub(&w);
        let lhs = phi.phi_grad(&base.add(&v)).sub(&phi.phi_grad(&base.add(&w))).dot(&d);
        worst = worst.min(lhs / (gamma * s.e_norm_sq(&d)));
    }
    // `worst` is the smallest ratio to the bound γ‖v − w‖²
    SuiteResult::new("gradient_monotonicity", worst >= slack, worst, slack, format!("gamma = {gamma}"))
}

fn nonlinearity(nl: &dyn Nonlinearity, space: &Space) -> SuiteResult {
    let t = space.table();
    let a = audit_nonlinearity(nl, t.constants(), t.config().eta, space.radius(), space.period());
    let detail = format!("df in [{:e}, {:e}], bound mu0 - eta = {}", a.df_min, a.df_max, a.df_upper_bound);
    SuiteResult::new("nonlinearity_contract", a.passed, a.df_max, a.df_upper_bound, detail)
}

fn reduction(space: &Arc<Space>, nl: &Arc<dyn Nonlinearity>, opts: &VerifyOptions) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5244);
    let mu = space.table().mu();
    let lin_c = 1.0;
    let ropts = ReductionOptions { tol_inner: space.table().config().tolerances.tol_inner, ..Default::default() };
    let lin = Reduction::new(Functional::new(space.clone(), Arc::new(LinearNonlinearity { c: lin_c })), ropts);
    let base = Reduction::new(Functional::new(space.clone(), nl.clone()), ropts);
    let (lin, base) = match (lin, base) {
        (Ok(l), Ok(b)) => (l, b),
        (Err(e), _) | (_, Err(e)) => return vec![SuiteResult::new("reduction", false, f64::NAN, 0.0, e.to_string())],
    };
    let tighter = base.with_options(ReductionOptions { tol_inner: base.options().tol_inner / 10.0, ..*base.options() });
    let (mut lin_worst, mut resid, mut stab, mut fd_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failure = None;
    for _ in 0..opts.reduction_samples {
        let u = space.random_field(&mut rng, Label::E2, 4.0);
        let v = space.random_field(&mut rng, Label::E2, 1.0);
        let closed: f64 = space
            .modes_in(crate::spectrum::Subspace::E2)
            .iter()
            .map(|&m| 0.5 * (space.table().mode(m.j, m.k).lambda - mu - lin_c) * u.get(m).powi(2))
            .sum();
        let mut run = || -> Result<(), crate::reduction::ReductionError> {
            let e = lin.solve_h(&u, None)?;
            lin_worst = lin_worst.max(if e.h.is_zero() { (e.phi_hat - closed).abs() } else { f64::INFINITY });
            let e = base.solve_h(&u, None)?;
            resid = resid.max(e.inner_residual);
            stab = stab.max((tighter.solve_h(&u, None)?.phi_hat - e.phi_hat).abs());
            let step = 1e-5;
            let plus = base.solve_h(&u.axpy(step, &v), Some(&e.h))?.phi_hat;
            let minus = base.solve_h(&u.axpy(-step, &v), Some(&e.h))?.phi_hat;
            let analytic = e.reduced_grad.dot(&v);
            fd_worst = fd_worst.max(((plus - minus) / (2.0 * step) - analytic).abs() / analytic.abs());
            Ok(())
        };
        if let Err(e) = run() {
            failure = Some(e.to_string());
            break;
        }
    }
    if let Some(e) = failure {
        return vec![SuiteResult::new("reduction", false, f64::NAN, 0.0, e)];
    }
    vec![
        SuiteResult::new("reduction_linear_oracle", lin_worst <= 1e-10, lin_worst, 1e-10, "h = 0 and closed-form value"),
        SuiteResult::new("reduction_inner_residual", resid <= 1e-9, resid, 1e-9, "dual E-norm"),
        SuiteResult::new("reduction_resolve_stability", stab <= 1e-8, stab, 1e-8, "tol_inner -> tol_inner/10"),
        SuiteResult::new("reduction_fd_consistency", fd_worst <= 1e-5, fd_worst, 1e-5, "relative"),
    ]
}

/// Runs every suite on `space` with nonlinearity `nl`.
pub fn run_suites(space: &Arc<Space>, nl: &Arc<dyn Nonlinearity>, opts: &VerifyOptions) -> Vec<SuiteResult> {
    let table = space.table();
    let phi = Functional::new(space.clone(), nl.clone());
    let zeros = match audit_zero_table(table.zeros()) {
        Ok(()) => SuiteResult::new("bessel_zeros", true, 0.0, 0.0, format!("{} zeros", table.zeros().len())),
        Err(e) => SuiteResult::new("bessel_zeros", false, 1.0, 0.0, e.to_string()),
    };
    let mut out = vec![
        zeros,
        gaps(table, opts),
        gram(space),
        gradient_fd(&phi, opts),
        hessian_fd(&phi, opts),
        constants(space, opts),
        monotonicity(&phi, opts),
        nonlinearity(nl.as_ref(), space),
    ];
    out.extend(closed_form(table));
    out.extend(reduction(space, nl, opts));
    out
}
