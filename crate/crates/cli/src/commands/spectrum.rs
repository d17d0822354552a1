use std::path::Path;

use serde::Serialize;

use super::{CliError, ProblemDoc};
use crate::config::RunConfig;
use crate::output::{write_csv, write_json, SCHEMA_VERSION};
use radwave::spectrum::{build_spectrum, ArithmeticProfile, SpectralConstants, Subspace, TruncationGuard};

#[derive(Serialize)]
struct ModeCounts {
    #[serde(rename = "E1")]
    e1: usize,
    #[serde(rename = "E2")]
    e2: usize,
    #[serde(rename = "E3")]
    e3: usize,
}

#[derive(Serialize)]
struct ArithmeticDoc<'a> {
    schema_version: u32,
    problem: ProblemDoc,
    #[serde(flatten)]
    profile: &'a ArithmeticProfile,
    constants: &'a SpectralConstants,
    guard: &'a TruncationGuard,
    /// Real modes per subspace (a `k ≥ 1` entry carries two).
    mode_counts: ModeCounts,
    resonant_in_box: Vec<(usize, usize)>,
    e2: Vec<(usize, usize, f64)>,
}

pub(super) fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let table = build_spectrum(&cfg.problem).map_err(|e| CliError::Validation(cfg.diagnose(&e)))?;
    let rows = table.modes().iter().map(|m| {
        vec![
            m.j.to_string(),
            m.k.to_string(),
            m.gamma_j.to_string(),
            m.lambda.to_string(),
            m.resonant.to_string(),
            m.subspace.to_string(),
        ]
    });
    write_csv(&out.join("spectrum.csv"), &["j", "k", "gamma_j", "lambda", "resonant", "subspace"], rows)?;
    let doc = ArithmeticDoc {
        schema_version: SCHEMA_VERSION,
        problem: ProblemDoc::new(cfg),
        profile: table.profile(),
        constants: table.constants(),
        guard: table.guard(),
        mode_counts: ModeCounts {
            e1: table.count_in(Subspace::E1),
            e2: table.count_in(Subspace::E2),
            e3: table.count_in(Subspace::E3),
        },
        resonant_in_box: table.modes().iter().filter(|m| m.resonant).map(|m| (m.j, m.k)).collect(),
        e2: table.modes().iter().filter(|m| m.subspace == Subspace::E2).map(|m| (m.j, m.k, m.lambda)).collect(),
    };
    write_json(&out.join("arithmetic.json"), &doc)?;
    let c = table.constants();
    println!(
        "{} modes; E2 dim {}; delta = {}, beta- = {}, beta+ = {}, gamma1 = {}, gamma2 = {}, gamma = {}",
        table.modes().len(),
        doc.mode_counts.e2,
        c.delta,
        c.beta_minus,
        c.beta_plus,
        c.gamma1,
        c.gamma2,
        c.gamma
    );
    Ok(())
}
