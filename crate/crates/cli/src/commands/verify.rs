use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::{CliError, ProblemDoc};
use crate::config::RunConfig;
use crate::output::{write_json, SCHEMA_VERSION};
use radwave::space::Space;
use radwave::spectrum::build_spectrum;
use radwave::verify::{run_suites, SuiteResult, VerifyOptions};

#[derive(Serialize)]
struct VerifyDoc<'a> {
    schema_version: u32,
    problem: ProblemDoc,
    options: &'a VerifyOptions,
    passed: bool,
    suites: &'a [SuiteResult],
}

pub(super) fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let table = build_spectrum(&cfg.problem).map_err(|e| CliError::Validation(cfg.diagnose(&e)))?;
    let space = Arc::new(Space::new(Arc::new(table)).map_err(|e| CliError::Validation(format!("{}: {e}", cfg.path)))?);
    let nl = cfg.nonlinearity.build(cfg.problem.beta);
    let suites = run_suites(&space, &nl, &cfg.verify);
    let passed = suites.iter().all(|s| s.passed);
    write_json(
        &out.join("verify.json"),
        &VerifyDoc { schema_version: SCHEMA_VERSION, problem: ProblemDoc::new(cfg), options: &cfg.verify, passed, suites: &suites },
    )?;
    for s in &suites {
        println!("{} {:<28} worst {:e} (tolerance {:e}) {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.worst, s.tolerance, s.detail);
    }
    if passed {
        Ok(())
    } else {
        let failing: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        Err(CliError::Failure(format!("failing suites: {}", failing.join(", "))))
    }
}
