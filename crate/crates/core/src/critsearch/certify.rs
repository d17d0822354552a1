//! Weak-solution residuals and the two-truncation study.
//!
//! The weak residual of `u*` is the `L²(Ω, ρ)` norm of the coefficient
//! residual `(λ_m − μ)α_m − ⟨f(u*), ψ_m⟩`, i.e. `‖Φ′(u*)‖` in coefficients.
//! The study continues a point from truncation `N` to `sN` and compares how
//! well each solution solves the next refinement:
//! `‖Φ′_{sN}(u*_N)‖` against `‖Φ′_{s²N}(u*_{sN})‖`.

use std::sync::Arc;

use serde::Serialize;

use super::optimize::{extremize, saddle_polish, Goal, Outcome};
use super::{sorted_eigen, CriticalPointReport, Landscape, PointKind, Precision, SearchError, SearchOptions};
use crate::functional::{Functional, Nonlinearity};
use crate::space::{CoefficientField, Space};
use crate::spectrum::{build_spectrum, ProblemConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub scale: f64,
    /// `‖Φ′_{sN}(u*_N)‖`.
    pub coarse_residual: f64,
    /// `‖Φ′_{s²N}(u*_{sN})‖`.
    pub refined_residual: f64,
    pub refined_phi_hat: f64,
    pub refined_reduced_grad_norm: f64,
    /// `E`-norm distance between `u*_N` and `u*_{sN}` at truncation `sN`.
    pub shift: f64,
    pub continued: bool,
    pub decreased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub weak_residual: f64,
    pub study: Option<TruncationStudy>,
}

pub fn weak_residual(functional: &Functional, u: &CoefficientField) -> f64 {
    functional.phi_grad(u).l2_norm()
}

/// Landscapes at truncations `sN` and `s²N`.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub scale: f64,
    pub land: Landscape,
    pub finer: Functional,
}

fn space_at(config: &ProblemConfig, scale: f64) -> Result<Arc<Space>, SearchError> {
    let mut cfg = config.clone();
    cfg.truncation = config.truncation.scaled(scale);
    Ok(Arc::new(Space::new(Arc::new(build_spectrum(&cfg)?))?))
}

pub fn refinement(
    config: &ProblemConfig,
    nl: &Arc<dyn Nonlinearity>,
    opts: &SearchOptions,
) -> Result<Refinement, SearchError> {
    let s = opts.certify_scale;
    let land = Landscape::new(Functional::new(space_at(config, s)?, nl.clone()), opts)?;
    let finer = Functional::new(space_at(config, s * s)?, nl.clone());
    Ok(Refinement { scale: s, land, finer })
}

/// Continues `report` (found on `base`) to the refined truncation.
pub fn study(
    report: &CriticalPointReport,
    base: &Landscape,
    refined: &Refinement,
    opts: &SearchOptions,
) -> Result<TruncationStudy, SearchError> {
    let land = &refined.land;
    let coarse_point = land.space().embed(&report.point);
    let coarse_residual = weak_residual(land.functional(), &coarse_point);
    let same_e2 = land.chart().modes() == base.chart().modes();
    let (point, phi_hat, grad_norm, continued) = if report.trivial || !same_e2 {
        let s = land.sample(&land.chart().coords(&coarse_point), None, Precision::Fine)?;
        (s.eval.point(), s.value, s.eval.reduced_grad_norm, report.trivial)
    } else {
        let x0 = land.chart().coords(&coarse_point);
        let traj = match report.kind {
            PointKind::MinInBall => extremize(land, &x0, Goal::Minimize, None, None, opts)?,
            PointKind::GlobalMax | PointKind::LocalMax => extremize(land, &x0, Goal::Maximize, None, None, opts)?,
            PointKind::MountainPass => {
                let at = base.sample(&report.x, Some(&report.h), Precision::Fine)?;
                let (_, vectors) = sorted_eigen(&base.hessian(&at)?);
                let warm = land.space().embed(&report.h);
                saddle_polish(land, &x0, &vectors.column(0).into_owned(), Some(&warm), opts)?
            }
        };
        let ok = traj.outcome == Outcome::Converged;
        (traj.sample.eval.point(), traj.sample.value, traj.sample.eval.reduced_grad_norm, ok)
    };
    let refined_residual = weak_residual(&refined.finer, &refined.finer.space().embed(&point));
    let shift = land.space().e_norm(&point.sub(&coarse_point));
    let decreased = refined_residual < coarse_residual || (refined_residual == 0.0 && coarse_residual == 0.0);
    Ok(TruncationStudy {
        scale: refined.scale,
        coarse_residual,
        refined_residual,
        refined_phi_hat: phi_hat,
        refined_reduced_grad_norm: grad_norm,
        shift,
        continued,
        decreased,
    })
}
