use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use serde::Deserialize;

use super::{solve_to, CliError};
use crate::config::RunConfig;
use crate::output::write_csv;
use radwave::space::{CoefficientField, Space};
use radwave::spectrum::build_spectrum;

/// `t` from 0 to `T` and `r` from 0 to `R` inclusive, `nt + 1` by `nr + 1` nodes.
pub fn sample_grid(space: &Space) -> (Vec<f64>, Vec<f64>) {
    let (nt, nr) = (space.grid().nt.max(1), space.grid().nr.max(1));
    let line = |n: usize, end: f64| -> Vec<f64> { (0..=n).map(|i| if i == n { end } else { end * i as f64 / n as f64 }).collect() };
    (line(nt, space.period()), line(nr, space.radius()))
}

pub fn write_sample(space: &Space, u: &CoefficientField, path: &Path) -> std::io::Result<()> {
    let (ts, rs) = sample_grid(space);
    let values = space.synthesize_at(u, &ts, &rs);
    let rows = values.indexed_iter().map(|((a, b), v)| vec![ts[a].to_string(), rs[b].to_string(), v.to_string()]);
    write_csv(path, &["t", "r", "u"], rows)
}

#[derive(Deserialize)]
struct Coefficients {
    j_max: usize,
    m: usize,
    values: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct StoredPoint {
    coefficients: Coefficients,
}

#[derive(Deserialize)]
struct Stored {
    schema_version: u32,
    points: Vec<StoredPoint>,
}

pub(super) fn run(cfg: &RunConfig, out: &Path, id: usize) -> Result<(), CliError> {
    let path = out.join("solutions.json");
    if !path.exists() {
        // a failed search still leaves its partial solutions behind
        if let Err(e) = solve_to(cfg, out) {
            if !(matches!(e, CliError::Failure(_)) && path.exists()) {
                return Err(e);
            }
        }
    }
    let text = std::fs::read_to_string(&path)?;
    let stored: Stored =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: cannot read solutions: {e}", path.display())))?;
    if stored.schema_version != crate::output::SCHEMA_VERSION {
        return Err(CliError::Validation(format!("{}: unsupported schema_version {}", path.display(), stored.schema_version)));
    }
    let Some(point) = stored.points.get(id) else {
        return Err(CliError::Validation(format!("unknown solution id {id} ({} solutions in {})", stored.points.len(), path.display())));
    };
    let table = build_spectrum(&cfg.problem).map_err(|e| CliError::Validation(cfg.diagnose(&e)))?;
    let space = Space::new(Arc::new(table)).map_err(|e| CliError::Validation(format!("{}: {e}", cfg.path)))?;
    let c = &point.coefficients;
    if (c.j_max, c.m) != space.shape() || c.values.iter().any(|r| r.len() != c.m) {
        return Err(CliError::Validation(format!(
            "{} was written for a {}x{} truncation, the config gives {:?}",
            path.display(),
            c.j_max,
            c.m,
            space.shape()
        )));
    }
    let flat: Vec<f64> = c.values.iter().flatten().copied().collect();
    let u = CoefficientField::from_array(Array2::from_shape_vec((c.j_max, c.m), flat).expect("shape checked"));
    let file = out.join(format!("sample_{id}.csv"));
    write_sample(&space, &u, &file)?;
    println!("wrote {}", file.display());
    Ok(())
}
