//! Critical points of the reduced functional `Φ̂` on `E₂`.
//!
//! Searches run in the chart `x_i = √(λ_i − μ)·c_i`, in which the `E`-norm
//! is Euclidean and the dual norm of the reduced gradient is `|∇ₓΦ̂|`.
//! Three kinds of point are sought: the minimum over a ball `B_r̄`, the
//! global maximum, and a mountain-pass point between `0` and `R₀u₀`.

pub mod certify;
pub mod geometry;
pub mod mountain;
pub mod optimize;
pub mod scan;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::functional::{Functional, Nonlinearity};
use crate::reduction::{InnerScheme, ReducedEval, Reduction, ReductionError, ReductionOptions};
use crate::space::{CoefficientField, ModeIndex, Space, SpaceError};
use crate::spectrum::{build_spectrum, ProblemConfig, SpectrumError, Subspace};

pub use certify::{Certification, TruncationStudy};
pub use geometry::{GeometryError, GeometryEstimate};
pub use mountain::PathAttempt;
pub use scan::{DenseScan, ScanMatch};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("E2 is empty; there is nothing to search")]
    EmptyE2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub seed: u64,
    pub min_starts: usize,
    pub max_starts: usize,
    pub path_nodes: usize,
    pub path_iterations: usize,
    pub path_step: f64,
    pub path_tol: f64,
    pub ring_directions: usize,
    pub radius_step: f64,
    pub max_radius: f64,
    pub scan_points: usize,
    pub scan_tol_inner: f64,
    pub polish_tol_inner: f64,
    pub max_newton: usize,
    pub max_step: f64,
    pub fd_step: f64,
    pub distinct_tol: f64,
    /// Reduced-gradient tolerance; `solve` takes it from the problem tolerances.
    pub tol_outer: f64,
    pub certify_scale: f64,
    pub scheme: InnerScheme,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            min_starts: 8,
            max_starts: 8,
            path_nodes: 64,
            path_iterations: 300,
            path_step: 0.5,
            path_tol: 1e-5,
            ring_directions: 64,
            radius_step: 0.5,
            max_radius: 400.0,
            scan_points: 401,
            scan_tol_inner: 1e-6,
            polish_tol_inner: 1e-12,
            max_newton: 200,
            max_step: 1.0,
            fd_step: 1e-3,
            distinct_tol: 1e-3,
            tol_outer: 1e-6,
            certify_scale: 2.0,
            scheme: InnerScheme::Simultaneous,
            exec: Exec::Parallel,
        }
    }
}

/// Coordinates `x_i = √(λ_i − μ)·c_i` on `E₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    modes: Vec<ModeIndex>,
    scale: Vec<f64>,
}

impl Chart {
    pub fn new(space: &Space) -> Self {
        let modes = space.modes_in(Subspace::E2);
        let scale = modes.iter().map(|m| space.shifted()[(m.j - 1, m.column())].sqrt()).collect();
        Self { modes, scale }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn field(&self, space: &Space, x: &DVector<f64>) -> CoefficientField {
        let mut u = space.zeros();
        for ((m, s), xi) in self.modes.iter().zip(&self.scale).zip(x.iter()) {
            u.set(*m, xi / s);
        }
        u
    }

    pub fn coords(&self, u: &CoefficientField) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.modes.iter().zip(&self.scale).map(|(m, s)| u.get(*m) * s))
    }

    /// Plain `E₂` coefficients of a chart point.
    pub fn coefficients(&self, x: &DVector<f64>) -> Vec<f64> {
        x.iter().zip(&self.scale).map(|(xi, s)| xi / s).collect()
    }

    /// Chart gradient `∂Φ̂/∂x_i = g_i/√(λ_i − μ)`.
    pub fn gradient(&self, g: &CoefficientField) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.modes.iter().zip(&self.scale).map(|(m, s)| g.get(*m) / s))
    }
}

/// Inner-solve accuracy of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Scan and path tolerance.
    Coarse,
    /// Polishing tolerance, also used for Hessians.
    Fine,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    pub eval: ReducedEval,
}

/// `Φ̂` in chart coordinates.
#[derive(Debug, Clone)]
pub struct Landscape {
    coarse: Reduction,
    fine: Reduction,
    chart: Chart,
    fd_step: f64,
}

impl Landscape {
    pub fn new(functional: Functional, options: &SearchOptions) -> Result<Self, SearchError> {
        let chart = Chart::new(functional.space());
        if chart.dim() == 0 {
            return Err(SearchError::EmptyE2);
        }
        let base = ReductionOptions { scheme: options.scheme, ..Default::default() };
        let coarse = Reduction::new(functional, ReductionOptions { tol_inner: options.scan_tol_inner, ..base })?;
        let fine = coarse.with_options(ReductionOptions { tol_inner: options.polish_tol_inner, ..base });
        Ok(Self { coarse, fine, chart, fd_step: options.fd_step })
    }

    pub fn space(&self) -> &Arc<Space> {
        self.fine.space()
    }

    pub fn functional(&self) -> &Functional {
        self.fine.functional()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn reduction(&self, precision: Precision) -> &Reduction {
        match precision {
            Precision::Coarse => &self.coarse,
            Precision::Fine => &self.fine,
        }
    }

    pub fn sample(
        &self,
        x: &DVector<f64>,
        warm: Option<&CoefficientField>,
        precision: Precision,
    ) -> Result<Sample, ReductionError> {
        let u = self.chart.field(self.space(), x);
        let eval = self.reduction(precision).solve_h(&u, warm)?;
        let grad = self.chart.gradient(&eval.reduced_grad);
        Ok(Sample { x: x.clone(), value: eval.phi_hat, grad, eval })
    }

    /// Central-difference Hessian of `Φ̂` in the chart, symmetrized.
    pub fn hessian(&self, at: &Sample) -> Result<DMatrix<f64>, ReductionError> {
        let d = self.dim();
        let h = self.fd_step;
        let mut hess = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut xp = at.x.clone();
            xp[j] += h;
            let mut xm = at.x.clone();
            xm[j] -= h;
            let gp = self.sample(&xp, Some(&at.eval.h), Precision::Fine)?.grad;
            let gm = self.sample(&xm, Some(&at.eval.h), Precision::Fine)?.grad;
            hess.set_column(j, &((gp - gm) / (2.0 * h)));
        }
        Ok((&hess + hess.transpose()) * 0.5)
    }
}

/// Ascending eigenvalues and matching eigenvectors (columns).
pub(crate) fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    MinInBall,
    GlobalMax,
    /// A further local maximum found by the multistart ascent.
    LocalMax,
    MountainPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Critical,
    NotConverged,
    OnBoundary,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct CriticalPointReport {
    pub kind: PointKind,
    pub status: PointStatus,
    /// `u₂ + h(u₂)` is exactly zero.
    pub trivial: bool,
    pub x: DVector<f64>,
    /// `E₂` coefficients, ordered as [`Chart::modes`].
    pub u2: Vec<f64>,
    pub h: CoefficientField,
    /// `u₂ + h(u₂)`.
    pub point: CoefficientField,
    pub phi_hat: f64,
    pub reduced_grad_norm: f64,
    pub inner_residual: f64,
    pub weak_residual: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub iterations: usize,
    /// `Φ̂` at accepted iterates.
    pub history: Vec<f64>,
    pub scan_match: Option<ScanMatch>,
    pub certification: Option<Certification>,
}

impl CriticalPointReport {
    pub(crate) fn new(kind: PointKind, status: PointStatus, chart: &Chart, s: &Sample) -> Self {
        let point = s.eval.point();
        Self {
            kind,
            status,
            trivial: point.is_zero(),
            x: s.x.clone(),
            u2: chart.coefficients(&s.x),
            h: s.eval.h.clone(),
            point,
            phi_hat: s.value,
            reduced_grad_norm: s.eval.reduced_grad_norm,
            inner_residual: s.eval.inner_residual,
            weak_residual: f64::NAN,
            hessian_eigenvalues: Vec::new(),
            morse_index: 0,
            iterations: 0,
            history: Vec::new(),
            scan_match: None,
            certification: None,
        }
    }

    pub fn is_critical(&self, tol_outer: f64) -> bool {
        self.status == PointStatus::Critical && self.reduced_grad_norm <= tol_outer
    }
}

/// Levels of the chain `σ₁ ≤ 0 < τ ≤ c⁺ < σ₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelOrdering {
    pub sigma1: Option<f64>,
    pub tau: Option<f64>,
    pub c_plus: Option<f64>,
    pub sigma2: Option<f64>,
    pub holds: bool,
}

impl LevelOrdering {
    fn new(sigma1: Option<f64>, tau: Option<f64>, c_plus: Option<f64>, sigma2: Option<f64>) -> Self {
        let holds = match (sigma1, tau, c_plus, sigma2) {
            (Some(s1), Some(t), Some(c), Some(s2)) => s1 <= 0.0 && 0.0 < t && t <= c && c < s2,
            _ => false,
        };
        Self { sigma1, tau, c_plus, sigma2, holds }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub chart: Chart,
    pub geometry: geometry::GeometryOutcome,
    /// Radius of the minimization ball and half-width of the ascent box.
    pub ball_radius: f64,
    pub box_radius: f64,
    pub points: Vec<CriticalPointReport>,
    pub path_attempts: Vec<PathAttempt>,
    pub scan: Option<DenseScan>,
    pub scan_min_in_ball: Option<f64>,
    pub scan_max: Option<f64>,
    pub ordering: LevelOrdering,
    /// Pairwise `E`-norm distances between `points`.
    pub distances: Vec<Vec<f64>>,
    /// Critical points counted once each (distance ≥ `distinct_tol`).
    pub distinct_critical: usize,
    pub flags: Vec<String>,
}

impl SolveReport {
    pub fn find(&self, kind: PointKind) -> Option<&CriticalPointReport> {
        self.points.iter().find(|p| p.kind == kind)
    }
}

fn status_of(outcome: optimize::Outcome) -> PointStatus {
    match outcome {
        optimize::Outcome::Converged => PointStatus::Critical,
        optimize::Outcome::OnBoundary => PointStatus::OnBoundary,
        optimize::Outcome::Escaped => PointStatus::Unbounded,
        optimize::Outcome::Stalled | optimize::Outcome::Budget => PointStatus::NotConverged,
    }
}

fn report_from(kind: PointKind, chart: &Chart, t: &optimize::Trajectory) -> CriticalPointReport {
    let mut r = CriticalPointReport::new(kind, status_of(t.outcome), chart, &t.sample);
    r.hessian_eigenvalues = t.eigenvalues.clone();
    r.morse_index = optimize::morse_index(&t.eigenvalues);
    r.iterations = t.iterations;
    r.history = t.history.clone();
    r
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

/// Geometry estimate, the three searches, the dense-scan oracle and
/// certification for one problem.
pub fn solve(config: &ProblemConfig, nl: Arc<dyn Nonlinearity>, options: &SearchOptions) -> Result<SolveReport, SearchError> {
    let opts = SearchOptions { tol_outer: config.tolerances.tol_outer, ..*options };
    let space = Arc::new(Space::new(Arc::new(build_spectrum(config)?))?);
    let land = Landscape::new(Functional::new(space.clone(), nl.clone()), &opts)?;
    let chart = land.chart().clone();
    let dim = chart.dim();
    let mut flags = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let geometry = geometry::estimate_geometry(&land, &opts)?;
    let sampled_edge = geometry.ladder.radii.last().copied().unwrap_or(opts.radius_step);
    let (ball_radius, box_radius) = match &geometry.estimate {
        Ok(g) => (g.r_bar, g.r0),
        Err(e) => {
            flags.push(format!("geometry_failure: {e}"));
            (sampled_edge, sampled_edge)
        }
    };

    // minimum over the ball
    let mut starts = vec![DVector::zeros(dim)];
    starts.extend((0..opts.min_starts).map(|_| uniform_in_ball(&mut rng, dim, ball_radius)));
    let mins: Vec<optimize::Trajectory> = opts
        .exec
        .map_slice(&starts, |x| optimize::extremize(&land, x, optimize::Goal::Minimize, Some(ball_radius), None, &opts))
        .into_iter()
        .collect::<Result<_, _>>()?;
    if mins.iter().all(|t| t.outcome == optimize::Outcome::OnBoundary) {
        flags.push("min_search: every start ended on the ball boundary".into());
    }
    let mut best_min = mins
        .iter()
        .min_by(|a, b| a.sample.value.total_cmp(&b.sample.value).then(a.sample.x.norm().total_cmp(&b.sample.x.norm())))
        .expect("at least one start");
    // a minimizer within roundoff of the origin is the trivial point itself
    let origin = &mins[0];
    if origin.outcome == optimize::Outcome::Converged
        && best_min.sample.x.norm() < opts.distinct_tol
        && (best_min.sample.value - origin.sample.value).abs() <= 1e-12 * (1.0 + origin.sample.value.abs())
    {
        best_min = origin;
    }
    let mut points = vec![report_from(PointKind::MinInBall, &chart, best_min)];

    // global maximum
    let starts: Vec<DVector<f64>> =
        (0..opts.max_starts.max(1)).map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-box_radius..=box_radius))).collect();
    let maxes: Vec<optimize::Trajectory> = opts
        .exec
        .map_slice(&starts, |x| optimize::extremize(&land, x, optimize::Goal::Maximize, None, Some(4.0 * box_radius), &opts))
        .into_iter()
        .collect::<Result<_, _>>()?;
    if maxes.iter().any(|t| t.outcome == optimize::Outcome::Escaped) {
        flags.push("max_search: unbounded ascent detected".into());
    }
    let mut found: Vec<&optimize::Trajectory> = maxes.iter().filter(|t| t.outcome == optimize::Outcome::Converged).collect();
    found.sort_by(|a, b| b.sample.value.total_cmp(&a.sample.value));
    let mut maxima: Vec<&optimize::Trajectory> = Vec::new();
    for t in found {
        let p = t.sample.eval.point();
        if maxima.iter().all(|m| space.e_norm(&m.sample.eval.point().sub(&p)) >= opts.distinct_tol) {
            maxima.push(t);
        }
    }
    if maxima.is_empty() {
        flags.push("max_search: no ascent converged".into());
        if let Some(t) = maxes.iter().max_by(|a, b| a.sample.value.total_cmp(&b.sample.value)) {
            points.push(report_from(PointKind::GlobalMax, &chart, t));
        }
    }
    for (i, t) in maxima.iter().enumerate() {
        points.push(report_from(if i == 0 { PointKind::GlobalMax } else { PointKind::LocalMax }, &chart, t));
    }

    // mountain pass between 0 and ±R₀u₀
    let mut path_attempts = Vec::new();
    if let Ok(g) = &geometry.estimate {
        let anchor = points.iter().find(|p| p.kind == PointKind::GlobalMax).map(|p| p.x.clone());
        let mut u0 = uniform_in_ball(&mut rng, dim, 1.0).normalize();
        for _ in 0..100 {
            let aligned = anchor.as_ref().is_some_and(|a| a.norm() > 0.0 && (a.dot(&u0) / a.norm()).abs() > 0.9 && dim > 1);
            if !aligned {
                break;
            }
            u0 = uniform_in_ball(&mut rng, dim, 1.0).normalize();
        }
        let mut accepted = None;
        for sign in [1.0, -1.0] {
            let dir = &u0 * sign;
            let mut end = &dir * g.r0;
            for _ in 0..64 {
                if land.sample(&end, None, Precision::Coarse)?.value <= 0.0 {
                    break;
                }
                end += &dir * opts.radius_step;
            }
            let (attempt, top) = mountain::relax_path(&land, &end, &opts)?;
            path_attempts.push(attempt);
            let Some((top, tangent)) = top else { continue };
            let t = optimize::saddle_polish(&land, &top.x, &tangent, Some(&top.eval.h), &opts)?;
            let p = t.sample.eval.point();
            let on_max = points
                .iter()
                .filter(|q| matches!(q.kind, PointKind::GlobalMax | PointKind::LocalMax))
                .any(|q| space.e_norm(&q.point.sub(&p)) < opts.distinct_tol);
            let report = report_from(PointKind::MountainPass, &chart, &t);
            let good = report.status == PointStatus::Critical && report.morse_index == 1 && !on_max;
            if good {
                accepted = Some(report);
                break;
            }
            flags.push(format!("mountain_pass: attempt along {sign:+} u0 rejected"));
            accepted.get_or_insert(report);
        }
        match accepted {
            Some(r) => points.push(r),
            None => flags.push("mountain_pass: both paths collapsed".into()),
        }
    }

    // dense-scan oracle
    let (mut scan, mut scan_min_in_ball, mut scan_max) = (None, None, None);
    if dim == 2 && opts.scan_points >= 3 {
        let s = scan::dense_scan(&land, box_radius, opts.scan_points, &opts)?;
        scan_min_in_ball = Some(s.min_within(ball_radius).0);
        scan_max = Some(s.max().0);
        for p in &mut points {
            p.scan_match = Some(s.match_point(p.x.as_slice()));
        }
        scan = Some(s);
    }

    // certification
    let refined = if opts.certify_scale > 1.0 { Some(certify::refinement(config, &nl, &opts)?) } else { None };
    for p in &mut points {
        p.weak_residual = certify::weak_residual(land.functional(), &p.point);
        let study = match &refined {
            Some(r) if p.status == PointStatus::Critical => Some(certify::study(p, &land, r, &opts)?),
            _ => None,
        };
        p.certification = Some(Certification { weak_residual: p.weak_residual, study });
    }

    let level = |k: PointKind| points.iter().find(|p| p.kind == k && p.status == PointStatus::Critical).map(|p| p.phi_hat);
    let ordering = LevelOrdering::new(
        level(PointKind::MinInBall),
        geometry.estimate.as_ref().ok().map(|g| g.tau),
        level(PointKind::MountainPass),
        level(PointKind::GlobalMax),
    );
    let distances: Vec<Vec<f64>> =
        points.iter().map(|a| points.iter().map(|b| space.e_norm(&a.point.sub(&b.point))).collect()).collect();
    let mut distinct: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.is_critical(opts.tol_outer) && distinct.iter().all(|&j| distances[i][j] >= opts.distinct_tol) {
            distinct.push(i);
        }
    }
    if points.iter().any(|p| p.trivial) {
        flags.push("trivial_point: the zero solution is among the reported points".into());
    }
    Ok(SolveReport {
        chart,
        geometry,
        ball_radius,
        box_radius,
        points,
        path_attempts,
        scan,
        scan_min_in_ball,
        scan_max,
        ordering,
        distances,
        distinct_critical: distinct.len(),
        flags,
    })
}
