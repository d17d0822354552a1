//! Run configuration: a TOML file with the sections below. Every field
//! outside `[problem]` has a default; `search.seed` is required unless
//! `--seed` is given.
//!
//! ```toml
//! [problem]
//! n = 1
//! R_coef = "1/2"        # R = R_coef·π
//! T_coef = "2"          # T = T_coef·π
//! mu = 1.5
//! beta = 6.0
//! eta = 0.5
//!
//! [nonlinearity]        # default: arctan
//! id = "arctan"         # arctan | zero | linear
//! # [nonlinearity.params]
//! # c = 3.5            # linear only
//!
//! [truncation]          # defaults
//! j_max = 12
//! k_max = 24
//! nt = 128
//! nr = 96
//!
//! [tolerances]          # defaults
//! tol_inner = 1e-9
//! tol_outer = 1e-6
//! delta_min = 1e-6
//!
//! [search]
//! seed = 7
//! # budgets: min_starts = 8, max_starts = 8, path_nodes = 64,
//! # path_iterations = 300, ring_directions = 64, scan_points = 401, ...
//!
//! [verify]              # seed defaults to search.seed
//! # gap_j_max = 10000, gap_k_max = 10000, gradient_fields = 20, ...
//! ```

use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use radwave::critsearch::SearchOptions;
use radwave::functional::NonlinearitySpec;
use radwave::spectrum::{ProblemConfig, SpectrumError, Tolerances, Truncation};
use radwave::verify::VerifyOptions;
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Invalid { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    problem: Spanned<RawProblem>,
    nonlinearity: Option<Spanned<RawNonlinearity>>,
    #[serde(default)]
    truncation: Truncation,
    tolerances: Option<Spanned<Tolerances>>,
    search: Option<Spanned<SearchOptions>>,
    verify: Option<Spanned<VerifyOptions>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    n: Spanned<i64>,
    #[serde(rename = "R_coef")]
    r_coef: Spanned<String>,
    #[serde(rename = "T_coef")]
    t_coef: Spanned<String>,
    mu: Spanned<f64>,
    beta: Spanned<f64>,
    eta: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    id: Spanned<String>,
    #[serde(default)]
    params: toml::Table,
}

/// Line numbers of the keys that validation errors point at.
#[derive(Debug, Clone, Default)]
pub struct Lines {
    pub problem: usize,
    pub n: usize,
    pub r_coef: usize,
    pub t_coef: usize,
    pub mu: usize,
    pub beta: usize,
    pub eta: usize,
    pub nonlinearity: usize,
    pub tolerances: usize,
    pub search: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: String,
    pub problem: ProblemConfig,
    pub nonlinearity: NonlinearitySpec,
    pub search: SearchOptions,
    pub verify: VerifyOptions,
    pub lines: Lines,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub truncation_scale: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let r = BigRational::from_str(s).ok()?;
    Some(r)
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: name.clone(), source })?;
        Self::parse(&text, &name, overrides)
    }

    pub fn parse(text: &str, path: &str, overrides: Overrides) -> Result<Self, ConfigError> {
        let raw: RawFile =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string().trim_end().into() })?;
        let at = |offset: usize, message: String| ConfigError::Invalid { path: path.into(), line: line_of(text, offset), message };
        let p = raw.problem.get_ref();
        let lines = Lines {
            problem: line_of(text, raw.problem.span().start),
            n: line_of(text, p.n.span().start),
            r_coef: line_of(text, p.r_coef.span().start),
            t_coef: line_of(text, p.t_coef.span().start),
            mu: line_of(text, p.mu.span().start),
            beta: line_of(text, p.beta.span().start),
            eta: line_of(text, p.eta.span().start),
            nonlinearity: raw.nonlinearity.as_ref().map_or(0, |s| line_of(text, s.span().start)),
            tolerances: raw.tolerances.as_ref().map_or(0, |s| line_of(text, s.span().start)),
            search: raw.search.as_ref().map_or(0, |s| line_of(text, s.span().start)),
        };

        let n = *p.n.get_ref();
        if !(1..=i64::from(u32::MAX)).contains(&n) {
            return Err(at(p.n.span().start, format!("n = {n} must be a positive integer")));
        }
        let rational = |v: &Spanned<String>, key: &str| {
            parse_rational(v.get_ref())
                .ok_or_else(|| at(v.span().start, format!("{key} = {:?} is not a rational \"p/q\"", v.get_ref())))
        };
        let r_coef = rational(&p.r_coef, "R_coef")?;
        let t_coef = rational(&p.t_coef, "T_coef")?;

        let nonlinearity = match &raw.nonlinearity {
            None => NonlinearitySpec::Arctan,
            Some(s) => {
                let nl = s.get_ref();
                let no_params = |spec: NonlinearitySpec| {
                    if nl.params.is_empty() {
                        Ok(spec)
                    } else {
                        Err(at(s.span().start, format!("nonlinearity {:?} takes no params", nl.id.get_ref())))
                    }
                };
                match nl.id.get_ref().as_str() {
                    "arctan" => no_params(NonlinearitySpec::Arctan)?,
                    "zero" => no_params(NonlinearitySpec::Zero)?,
                    "linear" => {
                        let c = nl.params.get("c").and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)));
                        let extra = nl.params.keys().any(|k| k != "c");
                        match c {
                            Some(c) if c.is_finite() && !extra => NonlinearitySpec::Linear { c },
                            _ => return Err(at(s.span().start, "nonlinearity \"linear\" needs exactly params.c (a finite number)".into())),
                        }
                    }
                    other => {
                        return Err(at(
                            nl.id.span().start,
                            format!("unknown nonlinearity id {other:?} (expected arctan, zero or linear)"),
                        ))
                    }
                }
            }
        };

        let tolerances = raw.tolerances.as_ref().map(|t| *t.get_ref()).unwrap_or_default();
        let mut truncation = raw.truncation;
        if let Some(s) = overrides.truncation_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(ConfigError::Parse { path: path.into(), message: format!("--truncation-scale {s} must be positive") });
            }
            truncation = truncation.scaled(s);
        }

        // the seed must be explicit; the typed options cannot tell a default from an omission
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
        let search_table = doc.get("search").and_then(|v| v.as_table());
        let has_seed = search_table.is_some_and(|t| t.contains_key("seed"));
        if search_table.is_some_and(|t| t.contains_key("tol_outer")) {
            return Err(at(
                raw.search.as_ref().map_or(0, |s| s.span().start),
                "tol_outer belongs in [tolerances], not [search]".into(),
            ));
        }
        let mut search = raw.search.as_ref().map(|s| *s.get_ref()).unwrap_or_default();
        match (overrides.seed, has_seed) {
            (Some(seed), _) => search.seed = seed,
            (None, true) => {}
            (None, false) => {
                let line = raw.search.as_ref().map_or(text.len(), |s| s.span().start);
                return Err(at(line, "search.seed is required (or pass --seed)".into()));
            }
        }
        search.tol_outer = tolerances.tol_outer;
        let verify_has_seed = doc.get("verify").and_then(|v| v.as_table()).is_some_and(|t| t.contains_key("seed"));
        let mut verify = raw.verify.as_ref().map(|s| *s.get_ref()).unwrap_or_default();
        if !verify_has_seed || overrides.seed.is_some() {
            verify.seed = search.seed;
        }

        let problem = ProblemConfig {
            n: n as u32,
            r_coef,
            t_coef,
            mu: *p.mu.get_ref(),
            beta: *p.beta.get_ref(),
            eta: *p.eta.get_ref(),
            truncation,
            tolerances,
        };
        Ok(Self { path: path.into(), problem, nonlinearity, search, verify, lines })
    }

    /// Attaches the offending config line to a spectrum validation error.
    pub fn diagnose(&self, e: &SpectrumError) -> String {
        let l = &self.lines;
        let line = match e {
            SpectrumError::NearEigenvalue { which, .. } => match *which {
                "mu" => l.mu,
                "beta" => l.beta,
                _ => l.problem,
            },
            SpectrumError::EmptyWindow { .. } | SpectrumError::MuOutOfRange { .. } => l.mu,
            SpectrumError::NonPositiveConstant { name, .. } if name.starts_with("gamma") => l.beta,
            SpectrumError::AccumulationPoint { .. } => l.n,
            _ => l.problem,
        };
        format!("{}:{}: {}", self.path, line, e)
    }
}
