//! Saddle-point reduction onto `E₂`.
//!
//! For `u ∈ E₂` the map `h(u) ∈ E₁⊕E₃` is the unique point where
//! `v ↦ Φ(u + v + w)` is maximal in `v ∈ E₁` and minimal in `w ∈ E₃`.
//! It is computed by diagonally preconditioned gradient steps
//!
//! ```text
//! h ← h − P₁₃ g / (λ_m − μ − L/2),     g = Φ′(u + h),
//! ```
//!
//! where `L = sup ∂f/∂u`. The shift centres the preconditioner on the
//! range `[0, L]` of the nonlinear Jacobian, so the residual contracts by at
//! least `(L/2) / min|λ_m − μ − L/2| < 1` in the norm `Σ g²/|λ_m − μ − L/2|`.
//! That norm is monitored for monotone decrease; convergence is declared on
//! the dual `E`-norm `Σ g²/|λ_m − μ|`.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::functional::Functional;
use crate::space::{CoefficientField, Label, Space};
use crate::spectrum::Subspace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("inner solver exhausted {iterations} sweeps with residual {residual:e}")]
    Budget { iterations: usize, residual: f64 },
    #[error("inner residual increased at sweep {sweep}: {previous:e} -> {current:e} (nonlinearity contract breach?)")]
    Monotonicity { sweep: usize, previous: f64, current: f64 },
    #[error("preconditioner is singular: sup df/du = {sup_df} is too large for the spectral gap")]
    Preconditioner { sup_df: f64 },
}

/// Block update order of the inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerScheme {
    /// `E₁` and `E₃` updated together from one gradient (one evaluation per sweep).
    #[default]
    Simultaneous,
    /// `E₁` ascent, then `E₃` descent with a fresh gradient (two evaluations per sweep).
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionOptions {
    pub tol_inner: f64,
    pub max_sweeps: usize,
    pub scheme: InnerScheme,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { tol_inner: 1e-9, max_sweeps: 10_000, scheme: InnerScheme::Simultaneous }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEval {
    pub u: CoefficientField,
    pub h: CoefficientField,
    pub phi_hat: f64,
    pub reduced_grad: CoefficientField,
    /// Dual `E`-norm of `P₁₃ Φ′(u + h)`.
    pub inner_residual: f64,
    /// Dual `E`-norm of `P₂ Φ′(u + h)`.
    pub reduced_grad_norm: f64,
    pub iterations: usize,
    /// Monitored (preconditioner-weighted) residual after each sweep.
    pub history: Vec<f64>,
}

impl ReducedEval {
    /// `u + h(u)`.
    pub fn point(&self) -> CoefficientField {
        self.u.add(&self.h)
    }

    /// Dual `E`-norm of the full gradient at `u + h(u)`.
    pub fn full_grad_norm(&self) -> f64 {
        self.inner_residual.hypot(self.reduced_grad_norm)
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    functional: Functional,
    options: ReductionOptions,
    /// `1/(λ_m − μ − L/2)` on `E₁⊕E₃`, zero on `E₂`.
    inv_precond: Array2<f64>,
    /// `1/|λ_m − μ − L/2|` on `E₁⊕E₃`.
    monitor_weight: Array2<f64>,
    e1_mask: Array2<f64>,
    e3_mask: Array2<f64>,
}

impl Reduction {
    pub fn new(functional: Functional, options: ReductionOptions) -> Result<Self, ReductionError> {
        let space = functional.space().clone();
        let sup_df = functional.nonlinearity().sup_df_du();
        let shift = 0.5 * sup_df;
        let mut inv = Array2::zeros(space.shape());
        let mut monitor = Array2::zeros(space.shape());
        let mut e1 = Array2::zeros(space.shape());
        let mut e3 = Array2::zeros(space.shape());
        for ((i, m), &d) in space.shifted().indexed_iter() {
            let label = space.labels()[(i, m)];
            if label == Subspace::E2 {
                continue;
            }
            let p = d - shift;
            if p == 0.0 || p.signum() != d.signum() {
                return Err(ReductionError::Preconditioner { sup_df });
            }
            inv[(i, m)] = 1.0 / p;
            monitor[(i, m)] = 1.0 / p.abs();
            if label == Subspace::E1 {
                e1[(i, m)] = 1.0;
            } else {
                e3[(i, m)] = 1.0;
            }
        }
        Ok(Self { functional, options, inv_precond: inv, monitor_weight: monitor, e1_mask: e1, e3_mask: e3 })
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn space(&self) -> &Arc<Space> {
        self.functional.space()
    }

    pub fn options(&self) -> &ReductionOptions {
        &self.options
    }

    /// Same operator with different options.
    pub fn with_options(&self, options: ReductionOptions) -> Self {
        Self { options, ..self.clone() }
    }

    fn monitored(&self, g: &CoefficientField) -> f64 {
        Zip::from(g.coeffs()).and(&self.monitor_weight).fold(0.0, |acc, x, w| acc + x * x * w).sqrt()
    }

    fn inner_dual(&self, g: &CoefficientField) -> f64 {
        let s = self.space();
        Zip::from(g.coeffs())
            .and(s.shifted())
            .and(&self.monitor_weight)
            .fold(0.0, |acc, x, d, w| if *w > 0.0 { acc + x * x / d.abs() } else { acc })
            .sqrt()
    }

    fn step(&self, h: &mut CoefficientField, g: &CoefficientField, mask: Option<&Array2<f64>>) {
        let hc = h.coeffs_mut();
        match mask {
            None => Zip::from(hc).and(g.coeffs()).and(&self.inv_precond).for_each(|h, g, p| *h -= g * p),
            Some(mask) => Zip::from(hc)
                .and(g.coeffs())
                .and(&self.inv_precond)
                .and(mask)
                .for_each(|h, g, p, m| *h -= g * p * m),
        }
    }

    /// Computes `h(u)` for `u ∈ E₂` (other components of `u` are discarded).
    pub fn solve_h(&self, u: &CoefficientField, warm: Option<&CoefficientField>) -> Result<ReducedEval, ReductionError> {
        let space = self.space().clone();
        let u = space.project(u, Label::E2);
        let mut h = match warm {
            Some(w) => space.project(w, Label::E13),
            None => space.zeros(),
        };
        let tol = self.options.tol_inner;
        let mut history = Vec::new();
        let mut sweeps = 0usize;
        let mut g = self.functional.phi_grad(&u.add(&h));
        loop {
            let monitored = self.monitored(&g);
            if let Some(&prev) = history.last() {
                if sweeps > 1 && monitored > prev * (1.0 + 1e-12) + 1e-12 {
                    return Err(ReductionError::Monotonicity { sweep: sweeps, previous: prev, current: monitored });
                }
            }
            history.push(monitored);
            let residual = self.inner_dual(&g);
            if residual <= tol {
                break;
            }
            if sweeps >= self.options.max_sweeps {
                return Err(ReductionError::Budget { iterations: sweeps, residual });
            }
            match self.options.scheme {
                InnerScheme::Simultaneous => {
                    self.step(&mut h, &g, None);
                }
                InnerScheme::Alternating => {
                    self.step(&mut h, &g, Some(&self.e1_mask));
                    g = self.functional.phi_grad(&u.add(&h));
                    self.step(&mut h, &g, Some(&self.e3_mask));
                }
            }
            sweeps += 1;
            g = self.functional.phi_grad(&u.add(&h));
        }
        let point = u.add(&h);
        let phi_hat = self.functional.phi(&point);
        let reduced_grad = space.project(&g, Label::E2);
        let inner_residual = self.inner_dual(&g);
        let reduced_grad_norm = space.dual_norm(&reduced_grad);
        Ok(ReducedEval { u, h, phi_hat, reduced_grad, inner_residual, reduced_grad_norm, iterations: sweeps, history })
    }

    /// `Φ̂(u)` and its gradient `P₂ Φ′(u + h(u))`.
    pub fn phi_hat_and_grad(
        &self,
        u: &CoefficientField,
        warm: Option<&CoefficientField>,
    ) -> Result<ReducedEval, ReductionError> {
        self.solve_h(u, warm)
    }
}
