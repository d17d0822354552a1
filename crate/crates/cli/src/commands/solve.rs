use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::{write_sample, CliError, ProblemDoc};
use crate::config::RunConfig;
use crate::output::{write_csv, write_json, SCHEMA_VERSION};
use radwave::critsearch::{
    self, geometry::Ladder, Certification, CriticalPointReport, GeometryEstimate, LevelOrdering, PathAttempt, PointKind, PointStatus,
    ScanMatch, SearchError, SearchOptions, SolveReport,
};
use radwave::space::{Parity, Space};
use radwave::spectrum::build_spectrum;

#[derive(Serialize)]
struct ChartDoc {
    modes: Vec<String>,
    scale: Vec<f64>,
}

#[derive(Serialize)]
struct GeometryDoc<'a> {
    estimate: Option<&'a GeometryEstimate>,
    error: Option<String>,
    m_hat: f64,
    ladder: &'a Ladder,
}

#[derive(Serialize)]
pub(crate) struct CoefficientsDoc {
    pub j_max: usize,
    pub m: usize,
    /// Row `j − 1`, column as in the coefficient layout.
    pub values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct PointDoc<'a> {
    id: usize,
    kind: PointKind,
    status: PointStatus,
    critical: bool,
    trivial: bool,
    x: Vec<f64>,
    u2: &'a [f64],
    phi_hat: f64,
    reduced_grad_norm: f64,
    inner_residual: f64,
    weak_residual: f64,
    hessian_eigenvalues: &'a [f64],
    morse_index: usize,
    iterations: usize,
    history: &'a [f64],
    scan_match: Option<&'a ScanMatch>,
    certification: Option<&'a Certification>,
    coefficients: CoefficientsDoc,
}

#[derive(Serialize)]
struct ScanDoc {
    points: usize,
    half_width: f64,
    spacing: f64,
    mirrored: bool,
    max: f64,
    max_at: [f64; 2],
    min_in_ball: Option<f64>,
}

#[derive(Serialize)]
struct SolutionsDoc<'a> {
    schema_version: u32,
    problem: ProblemDoc,
    search: &'a SearchOptions,
    success: bool,
    error: Option<String>,
    chart: Option<ChartDoc>,
    geometry: Option<GeometryDoc<'a>>,
    ball_radius: Option<f64>,
    box_radius: Option<f64>,
    points: Vec<PointDoc<'a>>,
    path_attempts: &'a [PathAttempt],
    scan: Option<ScanDoc>,
    ordering: Option<&'a LevelOrdering>,
    distances: &'a [Vec<f64>],
    distinct_critical: usize,
    flags: &'a [String],
}

fn mode_label(m: &radwave::space::ModeIndex) -> String {
    let p = match m.parity {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    };
    format!("{p}({},{})", m.j, m.k)
}

fn point_doc<'a>(id: usize, p: &'a CriticalPointReport, tol_outer: f64) -> PointDoc<'a> {
    let c = p.point.coeffs();
    PointDoc {
        id,
        kind: p.kind,
        status: p.status,
        critical: p.is_critical(tol_outer),
        trivial: p.trivial,
        x: p.x.iter().copied().collect(),
        u2: &p.u2,
        phi_hat: p.phi_hat,
        reduced_grad_norm: p.reduced_grad_norm,
        inner_residual: p.inner_residual,
        weak_residual: p.weak_residual,
        hessian_eigenvalues: &p.hessian_eigenvalues,
        morse_index: p.morse_index,
        iterations: p.iterations,
        history: &p.history,
        scan_match: p.scan_match.as_ref(),
        certification: p.certification.as_ref(),
        coefficients: CoefficientsDoc {
            j_max: c.nrows(),
            m: c.ncols(),
            values: c.rows().into_iter().map(|r| r.to_vec()).collect(),
        },
    }
}

/// Whether a finished search meets the three-point claim.
pub fn success(report: &SolveReport) -> bool {
    report.ordering.holds && report.distinct_critical >= 3
}

fn write_report(cfg: &RunConfig, out: &Path, space: &Space, report: &SolveReport) -> Result<bool, CliError> {
    let tol = cfg.problem.tolerances.tol_outer;
    let ok = success(report);
    let geometry = &report.geometry;
    let doc = SolutionsDoc {
        schema_version: SCHEMA_VERSION,
        problem: ProblemDoc::new(cfg),
        search: &cfg.search,
        success: ok,
        error: None,
        chart: Some(ChartDoc { modes: report.chart.modes().iter().map(mode_label).collect(), scale: report.chart.scale().to_vec() }),
        geometry: Some(GeometryDoc {
            estimate: geometry.estimate.as_ref().ok(),
            error: geometry.estimate.as_ref().err().map(|e| e.to_string()),
            m_hat: geometry.m_hat,
            ladder: &geometry.ladder,
        }),
        ball_radius: Some(report.ball_radius),
        box_radius: Some(report.box_radius),
        points: report.points.iter().enumerate().map(|(i, p)| point_doc(i, p, tol)).collect(),
        path_attempts: &report.path_attempts,
        scan: report.scan.as_ref().map(|s| {
            let (max, max_at) = s.max();
            ScanDoc {
                points: s.points(),
                half_width: s.half_width,
                spacing: s.spacing(),
                mirrored: s.mirrored,
                max,
                max_at,
                min_in_ball: report.scan_min_in_ball,
            }
        }),
        ordering: Some(&report.ordering),
        distances: &report.distances,
        distinct_critical: report.distinct_critical,
        flags: &report.flags,
    };
    write_json(&out.join("solutions.json"), &doc)?;

    let header = ["x1", "x2", "phi_hat"];
    match &report.scan {
        Some(s) => {
            let rows = s.values.indexed_iter().map(|((i, j), v)| vec![s.axis[i].to_string(), s.axis[j].to_string(), v.to_string()]);
            write_csv(&out.join("landscape.csv"), &header, rows)?;
        }
        None => write_csv(&out.join("landscape.csv"), &header, std::iter::empty::<Vec<String>>())?,
    }
    let l = &geometry.ladder;
    let rows = (0..l.radii.len()).map(|i| vec![l.radii[i].to_string(), l.ring_min[i].to_string(), l.ring_max[i].to_string()]);
    write_csv(&out.join("ladder.csv"), &["r", "ring_min", "ring_max"], rows)?;
    for (k, p) in report.points.iter().enumerate() {
        write_sample(space, &p.point, &out.join(format!("sample_{k}.csv")))?;
    }
    Ok(ok)
}

fn summary(report: &SolveReport, tol: f64) {
    for (i, p) in report.points.iter().enumerate() {
        println!(
            "[{i}] {:?} {:?} critical={} phi_hat={:.12} |grad|={:.3e} morse={} trivial={}",
            p.kind,
            p.status,
            p.is_critical(tol),
            p.phi_hat,
            p.reduced_grad_norm,
            p.morse_index,
            p.trivial
        );
    }
    let o = &report.ordering;
    println!("ordering sigma1={:?} tau={:?} c_plus={:?} sigma2={:?} holds={}", o.sigma1, o.tau, o.c_plus, o.sigma2, o.holds);
    println!("distinct critical points: {}", report.distinct_critical);
    for f in &report.flags {
        println!("flag: {f}");
    }
}

/// Runs the search and writes every solve artifact into `out`.
pub fn solve_to(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let table = build_spectrum(&cfg.problem).map_err(|e| CliError::Validation(cfg.diagnose(&e)))?;
    let space = Space::new(Arc::new(table)).map_err(|e| CliError::Validation(format!("{}: {e}", cfg.path)))?;
    let nl = cfg.nonlinearity.build(cfg.problem.beta);
    let report = match critsearch::solve(&cfg.problem, nl, &cfg.search) {
        Ok(r) => r,
        Err(SearchError::Spectrum(e)) => return Err(CliError::Validation(cfg.diagnose(&e))),
        Err(e @ SearchError::EmptyE2) => return Err(CliError::Validation(format!("{}: {e}", cfg.path))),
        Err(e) => {
            let doc = SolutionsDoc {
                schema_version: SCHEMA_VERSION,
                problem: ProblemDoc::new(cfg),
                search: &cfg.search,
                success: false,
                error: Some(e.to_string()),
                chart: None,
                geometry: None,
                ball_radius: None,
                box_radius: None,
                points: Vec::new(),
                path_attempts: &[],
                scan: None,
                ordering: None,
                distances: &[],
                distinct_critical: 0,
                flags: &[],
            };
            write_json(&out.join("solutions.json"), &doc)?;
            return Err(CliError::Failure(format!("search aborted: {e}")));
        }
    };
    summary(&report, cfg.problem.tolerances.tol_outer);
    if write_report(cfg, out, &space, &report)? {
        Ok(())
    } else {
        Err(CliError::Failure("search did not establish three critical points; see flags in solutions.json".into()))
    }
}

pub(super) fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    solve_to(cfg, out)
}
