//! Curvature-aware Newton iterations on `Φ̂`.
//!
//! Steps use the eigen-decomposition of the finite-difference Hessian with
//! every eigenvalue replaced by its absolute value, so each eigen-direction
//! moves uphill or downhill as the target signature requires. Extrema are
//! globalized by backtracking on `Φ̂`; the saddle polish is trust-capped only.

use nalgebra::{DMatrix, DVector};

use super::{sorted_eigen, Landscape, Precision, Sample, SearchOptions};
use crate::reduction::ReductionError;

/// Eigenvalues below this magnitude are treated as this magnitude.
const CURVATURE_FLOOR: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const BACKTRACKS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    fn sign(self) -> f64 {
        match self {
            Goal::Minimize => -1.0,
            Goal::Maximize => 1.0,
        }
    }

    fn better(self, new: f64, old: f64, margin: f64) -> bool {
        match self {
            Goal::Minimize => new <= old - margin,
            Goal::Maximize => new >= old + margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    /// No further progress although the gradient is still above tolerance.
    Stalled,
    /// Constrained minimum resting on the ball boundary.
    OnBoundary,
    /// Iterates left the admissible region.
    Escaped,
    Budget,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub sample: Sample,
    pub outcome: Outcome,
    pub eigenvalues: Vec<f64>,
    pub iterations: usize,
    /// `Φ̂` at the start and after every accepted step.
    pub history: Vec<f64>,
}

/// Number of negative Hessian eigenvalues (beyond the curvature floor).
pub fn morse_index(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().filter(|&&l| l < -CURVATURE_FLOOR).count()
}

/// Polishing target, well inside the reported tolerance.
fn gradient_target(opts: &SearchOptions) -> f64 {
    1e-3 * opts.tol_outer
}

/// `Σ_i s_i (v_i·g)/max(|λ_i|, floor) v_i` with per-direction signs `s_i`.
fn signed_newton(g: &DVector<f64>, values: &[f64], vectors: &DMatrix<f64>, signs: &[f64]) -> DVector<f64> {
    let mut step = DVector::zeros(g.len());
    for (i, (&l, &s)) in values.iter().zip(signs).enumerate() {
        let v = vectors.column(i);
        step += v * (s * v.dot(g) / l.abs().max(CURVATURE_FLOOR));
    }
    step
}

fn cap(step: DVector<f64>, max: f64) -> DVector<f64> {
    let n = step.norm();
    if n > max {
        step * (max / n)
    } else {
        step
    }
}

fn project(x: DVector<f64>, ball: Option<f64>) -> (DVector<f64>, bool) {
    match ball {
        Some(r) if x.norm() > r => {
            let n = x.norm();
            (x * (r / n), true)
        }
        _ => (x, false),
    }
}

/// Local minimum (maximum) from `x0`. With `ball = Some(r)` iterates are
/// projected onto `|x| ≤ r`; leaving `|x| ≤ limit` aborts with `Escaped`.
pub fn extremize(
    land: &Landscape,
    x0: &DVector<f64>,
    goal: Goal,
    ball: Option<f64>,
    limit: Option<f64>,
    opts: &SearchOptions,
) -> Result<Trajectory, ReductionError> {
    let (x0, _) = project(x0.clone(), ball);
    let mut cur = land.sample(&x0, None, Precision::Fine)?;
    let mut history = vec![cur.value];
    let gtol = gradient_target(opts);
    let mut eigenvalues = Vec::new();
    for it in 0..opts.max_newton {
        let on_sphere = ball.is_some_and(|r| (cur.x.norm() - r).abs() <= 1e-12 * r.max(1.0));
        let (values, vectors) = sorted_eigen(&land.hessian(&cur)?);
        let signature_ok = values.iter().all(|&l| match goal {
            Goal::Maximize => l < CURVATURE_FLOOR,
            Goal::Minimize => l > -CURVATURE_FLOOR,
        });
        eigenvalues = values.clone();
        let gnorm = cur.grad.norm();
        if gnorm <= gtol && signature_ok {
            return Ok(Trajectory { sample: cur, outcome: Outcome::Converged, eigenvalues, iterations: it, history });
        }
        let signs = vec![goal.sign(); values.len()];
        let mut step = signed_newton(&cur.grad, &values, &vectors, &signs);
        if !signature_ok && gnorm <= opts.tol_outer {
            // flat but wrong curvature: push along the offending direction
            for (i, &l) in values.iter().enumerate() {
                let wrong = match goal {
                    Goal::Maximize => l >= CURVATURE_FLOOR,
                    Goal::Minimize => l <= -CURVATURE_FLOOR,
                };
                if wrong {
                    let v = vectors.column(i).into_owned();
                    let s = if v.dot(&cur.grad) * goal.sign() >= 0.0 { 1.0 } else { -1.0 };
                    step += v * (s * 0.05 * opts.max_step);
                }
            }
        }
        let step = cap(step, opts.max_step);
        let slope = step.dot(&cur.grad).abs();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..BACKTRACKS {
            let (x, _) = project(&cur.x + &step * t, ball);
            let trial = land.sample(&x, Some(&cur.eval.h), Precision::Fine)?;
            if goal.better(trial.value, cur.value, ARMIJO * t * slope) && trial.value != cur.value {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                if limit.is_some_and(|l| next.x.norm() > l) {
                    history.push(next.value);
                    return Ok(Trajectory { sample: next, outcome: Outcome::Escaped, eigenvalues, iterations: it + 1, history });
                }
                cur = next;
                history.push(cur.value);
            }
            None => {
                let outcome = if on_sphere {
                    Outcome::OnBoundary
                } else if gnorm <= opts.tol_outer {
                    Outcome::Converged
                } else {
                    Outcome::Stalled
                };
                return Ok(Trajectory { sample: cur, outcome, eigenvalues, iterations: it, history });
            }
        }
    }
    Ok(Trajectory { sample: cur, outcome: Outcome::Budget, eigenvalues, iterations: opts.max_newton, history })
}

/// Index-one saddle near `x0`: ascent along the eigen-direction best aligned
/// with `tangent`, descent across it.
pub fn saddle_polish(
    land: &Landscape,
    x0: &DVector<f64>,
    tangent: &DVector<f64>,
    warm: Option<&crate::space::CoefficientField>,
    opts: &SearchOptions,
) -> Result<Trajectory, ReductionError> {
    let mut cur = land.sample(x0, warm, Precision::Fine)?;
    let mut history = vec![cur.value];
    let mut axis = tangent.normalize();
    let gtol = gradient_target(opts);
    let mut eigenvalues = Vec::new();
    for it in 0..opts.max_newton {
        let (values, vectors) = sorted_eigen(&land.hessian(&cur)?);
        let up = (0..values.len())
            .max_by(|&a, &b| vectors.column(a).dot(&axis).abs().total_cmp(&vectors.column(b).dot(&axis).abs()))
            .unwrap_or(0);
        let a = vectors.column(up).into_owned();
        axis = if a.dot(&axis) >= 0.0 { a } else { -a };
        // transverse curvature may be degenerate when E₂ carries a continuous symmetry
        let signature_ok = values.iter().enumerate().all(|(i, &l)| if i == up { l < -CURVATURE_FLOOR } else { l > -CURVATURE_FLOOR });
        eigenvalues = values.clone();
        let gnorm = cur.grad.norm();
        if gnorm <= gtol && signature_ok {
            return Ok(Trajectory { sample: cur, outcome: Outcome::Converged, eigenvalues, iterations: it, history });
        }
        let signs: Vec<f64> = (0..values.len()).map(|i| if i == up { 1.0 } else { -1.0 }).collect();
        let mut step = signed_newton(&cur.grad, &values, &vectors, &signs);
        if !signature_ok && gnorm <= opts.tol_outer {
            for (i, &l) in values.iter().enumerate() {
                if i != up && l <= -CURVATURE_FLOOR {
                    let v = vectors.column(i).into_owned();
                    let s = if v.dot(&cur.grad) <= 0.0 { 1.0 } else { -1.0 };
                    step += v * (s * 0.05 * opts.max_step);
                }
            }
        }
        let step = cap(step, opts.max_step);
        if step.norm() <= 1e-15 * cur.x.norm().max(1.0) {
            let outcome = if gnorm <= opts.tol_outer { Outcome::Converged } else { Outcome::Stalled };
            return Ok(Trajectory { sample: cur, outcome, eigenvalues, iterations: it, history });
        }
        let x = &cur.x + step;
        cur = land.sample(&x, Some(&cur.eval.h), Precision::Fine)?;
        history.push(cur.value);
    }
    Ok(Trajectory { sample: cur, outcome: Outcome::Budget, eigenvalues, iterations: opts.max_newton, history })
}
