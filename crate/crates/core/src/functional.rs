//! Nonlinearity contract and the energy functional
//!
//! ```text
//! Φ(u) = ½ Σ (λ_m − μ) c_m² − ∬ F(t, r, u) ρ dt dr
//! ```
//!
//! with its `L²`-represented gradient and Hessian quadratic form, all
//! evaluated pseudo-spectrally on the space-time grid.

use std::fmt::Debug;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::space::{CoefficientField, GridSampling, Space};
use crate::spectrum::SpectralConstants;

/// Pointwise nonlinearity `f(t, r, u)` with primitive `F` (`F(·,·,0) = 0`).
pub trait Nonlinearity: Debug + Send + Sync {
    fn id(&self) -> &'static str;
    fn f(&self, t: f64, r: f64, u: f64) -> f64;
    fn df_du(&self, t: f64, r: f64, u: f64) -> f64;
    fn primitive(&self, t: f64, r: f64, u: f64) -> f64;
    /// Asymptotic slope `β` in `f ≈ βu` as `|u| → ∞`.
    fn beta(&self) -> f64;
    /// Declared `sup ∂f/∂u`.
    fn sup_df_du(&self) -> f64;
    /// Declared `C_f` with `|f(t,r,u) − βu| ≤ C_f`.
    fn defect_bound(&self) -> f64;
    /// Exponent `p > 1` of the small-`u` bound `|f| ≤ ε|u| + C|u|^p`.
    fn growth_exponent(&self) -> f64;

    fn is_autonomous(&self) -> bool {
        true
    }

    /// `f(t, r, −u) = −f(t, r, u)`.
    fn is_odd(&self) -> bool {
        false
    }

    /// False for test-only instances that violate the small-`u` contract.
    fn satisfies_contract(&self) -> bool {
        true
    }

    /// `Some(c)` when `f = c·u`; its Galerkin projection is then exactly `c·u`.
    fn linear_slope(&self) -> Option<f64> {
        None
    }

    fn apply_f(&self, grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        map_grid(grid, u, |t, r, v| self.f(t, r, v))
    }

    fn apply_df(&self, grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        map_grid(grid, u, |t, r, v| self.df_du(t, r, v))
    }

    fn apply_primitive(&self, grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        map_grid(grid, u, |t, r, v| self.primitive(t, r, v))
    }
}

fn map_grid(grid: &GridSampling, u: &Array2<f64>, g: impl Fn(f64, f64, f64) -> f64) -> Array2<f64> {
    let mut out = u.clone();
    for ((a, b), v) in out.indexed_iter_mut() {
        *v = g(grid.t[a], grid.r[b], *v);
    }
    out
}

/// `f(u) = β(u − arctan u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArctanNonlinearity {
    pub beta: f64,
}

impl ArctanNonlinearity {
    pub fn new(beta: f64) -> Self {
        Self { beta }
    }

    fn value(&self, u: f64) -> f64 {
        if u.abs() < 0.1 {
            // u − arctan u = Σ_{m≥1} (−1)^{m+1} u^{2m+1}/(2m+1)
            let u2 = u * u;
            let mut pow = u * u2;
            let mut s = 0.0;
            for m in 1..=9 {
                let term = pow / (2 * m + 1) as f64;
                s += if m % 2 == 1 { term } else { -term };
                pow *= u2;
            }
            self.beta * s
        } else {
            self.beta * (u - u.atan())
        }
    }

    fn prim(&self, u: f64) -> f64 {
        if u.abs() < 0.1 {
            // Σ_{m≥2} (−1)^m u^{2m} / ((2m−1)·2m)
            let u2 = u * u;
            let mut pow = u2 * u2;
            let mut s = 0.0;
            for m in 2..=10 {
                let term = pow / ((2 * m - 1) * 2 * m) as f64;
                s += if m % 2 == 0 { term } else { -term };
                pow *= u2;
            }
            self.beta * s
        } else {
            self.beta * (0.5 * u * u - u * u.atan() + 0.5 * u.mul_add(u, 1.0).ln())
        }
    }
}

impl Nonlinearity for ArctanNonlinearity {
    fn id(&self) -> &'static str {
        "arctan"
    }

    fn f(&self, _t: f64, _r: f64, u: f64) -> f64 {
        self.value(u)
    }

    fn df_du(&self, _t: f64, _r: f64, u: f64) -> f64 {
        let u2 = u * u;
        self.beta * u2 / (1.0 + u2)
    }

    fn primitive(&self, _t: f64, _r: f64, u: f64) -> f64 {
        self.prim(u)
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn sup_df_du(&self) -> f64 {
        self.beta
    }

    fn defect_bound(&self) -> f64 {
        self.beta * std::f64::consts::FRAC_PI_2
    }

    fn growth_exponent(&self) -> f64 {
        3.0
    }

    fn is_odd(&self) -> bool {
        true
    }

    fn apply_f(&self, _grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        u.mapv(|v| self.value(v))
    }

    fn apply_df(&self, _grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        u.mapv(|v| {
            let v2 = v * v;
            self.beta * v2 / (1.0 + v2)
        })
    }

    fn apply_primitive(&self, _grid: &GridSampling, u: &Array2<f64>) -> Array2<f64> {
        u.mapv(|v| self.prim(v))
    }
}

/// `f ≡ 0` (test-only).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroNonlinearity;

impl Nonlinearity for ZeroNonlinearity {
    fn id(&self) -> &'static str {
        "zero"
    }

    fn f(&self, _t: f64, _r: f64, _u: f64) -> f64 {
        0.0
    }

    fn df_du(&self, _t: f64, _r: f64, _u: f64) -> f64 {
        0.0
    }

    fn primitive(&self, _t: f64, _r: f64, _u: f64) -> f64 {
        0.0
    }

    fn beta(&self) -> f64 {
        0.0
    }

    fn sup_df_du(&self) -> f64 {
        0.0
    }

    fn defect_bound(&self) -> f64 {
        0.0
    }

    fn growth_exponent(&self) -> f64 {
        2.0
    }

    fn is_odd(&self) -> bool {
        true
    }

    fn satisfies_contract(&self) -> bool {
        false
    }

    fn linear_slope(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `f = c·u` (test-only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearNonlinearity {
    pub c: f64,
}

impl Nonlinearity for LinearNonlinearity {
    fn id(&self) -> &'static str {
        "linear"
    }

    fn f(&self, _t: f64, _r: f64, u: f64) -> f64 {
        self.c * u
    }

    fn df_du(&self, _t: f64, _r: f64, _u: f64) -> f64 {
        self.c
    }

    fn primitive(&self, _t: f64, _r: f64, u: f64) -> f64 {
        0.5 * self.c * u * u
    }

    fn beta(&self) -> f64 {
        self.c
    }

    fn sup_df_du(&self) -> f64 {
        self.c
    }

    fn defect_bound(&self) -> f64 {
        0.0
    }

    fn growth_exponent(&self) -> f64 {
        2.0
    }

    fn is_odd(&self) -> bool {
        true
    }

    fn satisfies_contract(&self) -> bool {
        false
    }

    fn linear_slope(&self) -> Option<f64> {
        Some(self.c)
    }
}

/// Config-level selector for the built-in instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Arctan,
    Zero,
    Linear { c: f64 },
}

impl NonlinearitySpec {
    /// `Arctan` takes its slope from the problem's `β`.
    pub fn build(self, beta: f64) -> Arc<dyn Nonlinearity> {
        match self {
            NonlinearitySpec::Arctan => Arc::new(ArctanNonlinearity::new(beta)),
            NonlinearitySpec::Zero => Arc::new(ZeroNonlinearity),
            NonlinearitySpec::Linear { c } => Arc::new(LinearNonlinearity { c }),
        }
    }
}

/// `Φ` on a truncated space with a fixed nonlinearity.
#[derive(Debug, Clone)]
pub struct Functional {
    space: Arc<Space>,
    nl: Arc<dyn Nonlinearity>,
}

impl Functional {
    pub fn new(space: Arc<Space>, nl: Arc<dyn Nonlinearity>) -> Self {
        Self { space, nl }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn nonlinearity(&self) -> &Arc<dyn Nonlinearity> {
        &self.nl
    }

    pub fn phi(&self, u: &CoefficientField) -> f64 {
        if let Some(c) = self.nl.linear_slope() {
            return 0.5 * (self.space.quadratic_form(u) - c * u.dot(u));
        }
        let values = self.space.synthesize(u);
        let big_f = self.nl.apply_primitive(self.space.grid(), &values);
        0.5 * self.space.quadratic_form(u) - self.space.grid().integrate(&big_f)
    }

    /// `g_m = (λ_m − μ)c_m − ⟨f(u), ψ_m⟩`.
    pub fn phi_grad(&self, u: &CoefficientField) -> CoefficientField {
        if let Some(c) = self.nl.linear_slope() {
            return self.linear_apply(c, u);
        }
        let values = self.space.synthesize(u);
        self.grad_from_values(u, &values)
    }

    pub fn phi_and_grad(&self, u: &CoefficientField) -> (f64, CoefficientField) {
        if self.nl.linear_slope().is_some() {
            return (self.phi(u), self.phi_grad(u));
        }
        let values = self.space.synthesize(u);
        let big_f = self.nl.apply_primitive(self.space.grid(), &values);
        let phi = 0.5 * self.space.quadratic_form(u) - self.space.grid().integrate(&big_f);
        (phi, self.grad_from_values(u, &values))
    }

    fn linear_apply(&self, c: f64, v: &CoefficientField) -> CoefficientField {
        let mut g = v.coeffs().clone();
        Zip::from(&mut g).and(self.space.shifted()).for_each(|g, &d| *g *= d - c);
        CoefficientField::from_array(g)
    }

    fn grad_from_values(&self, u: &CoefficientField, values: &Array2<f64>) -> CoefficientField {
        let fu = self.nl.apply_f(self.space.grid(), values);
        let proj = self.space.analyze(&fu);
        let mut g = proj.into_array();
        Zip::from(&mut g)
            .and(u.coeffs())
            .and(self.space.shifted())
            .for_each(|g, &c, &d| *g = d * c - *g);
        CoefficientField::from_array(g)
    }

    /// `Σ (λ_m − μ) v_m² − ∬ ∂f/∂u(u) v² ρ`.
    pub fn hessian_form(&self, u: &CoefficientField, v: &CoefficientField) -> f64 {
        if let Some(c) = self.nl.linear_slope() {
            return self.space.quadratic_form(v) - c * v.dot(v);
        }
        let du = self.nl.apply_df(self.space.grid(), &self.space.synthesize(u));
        let vv = self.space.synthesize(v);
        let w = &du * &vv * &vv;
        self.space.quadratic_form(v) - self.space.grid().integrate(&w)
    }

    /// Coefficients of `Φ''(u)v`.
    pub fn hessian_apply(&self, u: &CoefficientField, v: &CoefficientField) -> CoefficientField {
        if let Some(c) = self.nl.linear_slope() {
            return self.linear_apply(c, v);
        }
        let du = self.nl.apply_df(self.space.grid(), &self.space.synthesize(u));
        let w = &du * &self.space.synthesize(v);
        let mut g = self.space.analyze(&w).into_array();
        Zip::from(&mut g)
            .and(v.coeffs())
            .and(self.space.shifted())
            .for_each(|g, &c, &d| *g = d * c - *g);
        CoefficientField::from_array(g)
    }
}

/// Numerical check of the nonlinearity contract on a sample lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearityAudit {
    pub id: String,
    pub f_at_zero: f64,
    pub df_at_zero: f64,
    pub df_min: f64,
    pub df_max: f64,
    pub df_upper_bound: f64,
    pub defect_max: f64,
    pub defect_bound: f64,
    pub primitive_fd_error: f64,
    pub declared_sup_df: f64,
    pub contract_instance: bool,
    pub passed: bool,
}

/// Samples `u ∈ [−u_max, u_max]` (plus a few `(t, r)` points) and checks
/// `f(0) = 0`, `∂f/∂u(0) = 0`, `0 ≤ ∂f/∂u ≤ μ₀ − η`, `|f − βu| ≤ C_f` and `F′ = f`.
pub fn audit_nonlinearity(
    nl: &dyn Nonlinearity,
    constants: &SpectralConstants,
    eta: f64,
    radius: f64,
    period: f64,
) -> NonlinearityAudit {
    let upper = constants.mu0 - eta;
    let u_max = 200.0;
    let count = 4001;
    let points: Vec<(f64, f64)> = (0..5)
        .flat_map(|i| (0..5).map(move |l| (period * i as f64 / 5.0, radius * l as f64 / 4.0)))
        .collect();
    let (mut df_min, mut df_max, mut defect, mut fd_err) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let (mut f0, mut df0) = (0.0f64, 0.0f64);
    for &(t, r) in &points {
        f0 = f0.max(nl.f(t, r, 0.0).abs());
        df0 = df0.max(nl.df_du(t, r, 0.0).abs());
        for i in 0..count {
            let u = -u_max + 2.0 * u_max * i as f64 / (count - 1) as f64;
            let d = nl.df_du(t, r, u);
            df_min = df_min.min(d);
            df_max = df_max.max(d);
            defect = defect.max((nl.f(t, r, u) - nl.beta() * u).abs());
            let h = 1e-4 * u.abs().max(1.0);
            let fd = (nl.primitive(t, r, u + h) - nl.primitive(t, r, u - h)) / (2.0 * h);
            fd_err = fd_err.max((fd - nl.f(t, r, u)).abs() / nl.f(t, r, u).abs().max(1.0));
        }
    }
    let tol = 1e-12;
    let passed = f0 <= tol
        && df0 <= tol
        && df_min >= -tol
        && df_max <= upper + tol
        && nl.sup_df_du() <= upper + tol
        && defect <= nl.defect_bound() + 1e-9
        && fd_err <= 1e-6;
    NonlinearityAudit {
        id: nl.id().to_string(),
        f_at_zero: f0,
        df_at_zero: df0,
        df_min,
        df_max,
        df_upper_bound: upper,
        defect_max: defect,
        defect_bound: nl.defect_bound(),
        primitive_fd_error: fd_err,
        declared_sup_df: nl.sup_df_du(),
        contract_instance: nl.satisfies_contract(),
        passed,
    }
}
