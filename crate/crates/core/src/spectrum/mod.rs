//! Spectrum `λ_jk = (γ_j/R)² − (2kπ/T)²` of the radial periodic-Dirichlet
//! wave operator, its `E₁/E₂/E₃` labelling and the derived spectral constants.

pub mod arithmetic;

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bessel::{self, BesselError, BesselOrder, BesselZeroTable};
pub use arithmetic::{gap_audit, ArithmeticProfile, GapAudit, GapWitness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("invalid problem configuration: {0}")]
    InvalidConfig(String),
    #[error("{which} is within delta_min of eigenvalue {eigenvalue}")]
    NearEigenvalue { which: &'static str, eigenvalue: String },
    #[error("the interval (mu, beta) = ({mu}, {beta}) contains no eigenvalue")]
    EmptyWindow { mu: f64, beta: f64 },
    #[error("mu = {mu} must lie in (0, beta_plus - beta) = (0, {upper})")]
    MuOutOfRange { mu: f64, upper: f64 },
    #[error("{name} = {value} is not positive")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("resonant eigenvalues accumulate near {lambda0}, which is not below mu - delta_min")]
    AccumulationPoint { lambda0: f64 },
    #[error("truncation box too small to certify beta_plus/beta_minus: {0}")]
    TruncationTooSmall(String),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub j_max: usize,
    pub k_max: usize,
    pub nt: usize,
    pub nr: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { j_max: 12, k_max: 24, nt: 128, nr: 96 }
    }
}

impl Truncation {
    /// All four sizes multiplied by `scale` (rounded, at least 1).
    pub fn scaled(&self, scale: f64) -> Self {
        let s = |v: usize| ((v as f64 * scale).round() as usize).max(1);
        Self { j_max: s(self.j_max), k_max: s(self.k_max), nt: s(self.nt), nr: s(self.nr) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_inner: f64,
    pub tol_outer: f64,
    pub delta_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_inner: 1e-9, tol_outer: 1e-6, delta_min: 1e-6 }
    }
}

/// Problem data with `R = r_coef·π` and `T = t_coef·π`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub n: u32,
    pub r_coef: BigRational,
    pub t_coef: BigRational,
    pub mu: f64,
    pub beta: f64,
    pub eta: f64,
    pub truncation: Truncation,
    pub tolerances: Tolerances,
}

impl ProblemConfig {
    /// n = 1, R = π/2, T = 2π, μ = 1.5, β = 6, η = 0.5 with default truncation.
    pub fn reference() -> Self {
        Self {
            n: 1,
            r_coef: BigRational::new(BigInt::from(1), BigInt::from(2)),
            t_coef: BigRational::from_integer(BigInt::from(2)),
            mu: 1.5,
            beta: 6.0,
            eta: 0.5,
            truncation: Truncation::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.r_coef.to_f64().unwrap_or(f64::NAN) * PI
    }

    pub fn period(&self) -> f64 {
        self.t_coef.to_f64().unwrap_or(f64::NAN) * PI
    }

    pub fn order(&self) -> Result<BesselOrder, SpectrumError> {
        Ok(BesselOrder::for_dimension(self.n)?)
    }

    pub fn profile(&self) -> Result<ArithmeticProfile, SpectrumError> {
        ArithmeticProfile::new(self.n, &self.r_coef, &self.t_coef).ok_or_else(|| {
            SpectrumError::InvalidConfig("8R/T must reduce to a/b with a, b fitting in 64 bits".into())
        })
    }

    fn check_basic(&self) -> Result<(), SpectrumError> {
        let bad = |m: &str| Err(SpectrumError::InvalidConfig(m.to_string()));
        if self.n == 0 {
            return bad("n must be a positive integer");
        }
        if !self.r_coef.is_positive() || !self.t_coef.is_positive() {
            return bad("R_coef and T_coef must be positive");
        }
        for (name, v) in [("mu", self.mu), ("beta", self.beta), ("eta", self.eta)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be a positive finite number"));
            }
        }
        if self.beta <= self.mu {
            return bad("beta must exceed mu");
        }
        let t = &self.truncation;
        if t.j_max == 0 || t.k_max == 0 {
            return bad("j_max and k_max must be positive");
        }
        let tol = &self.tolerances;
        for (name, v) in [("tol_inner", tol.tol_inner), ("tol_outer", tol.tol_outer), ("delta_min", tol.delta_min)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subspace {
    E1,
    E2,
    E3,
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Subspace::E1 => "E1",
            Subspace::E2 => "E2",
            Subspace::E3 => "E3",
        })
    }
}

/// One `(j, k ≥ 0)` entry; `paired` marks the cos/sin pair carried by `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub j: usize,
    pub k: usize,
    pub gamma_j: f64,
    pub lambda: f64,
    pub paired: bool,
    pub resonant: bool,
    pub subspace: Subspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConstants {
    pub delta: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub mu0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `min{1, η/μ₀}`
    pub gamma: f64,
}

/// Evidence that no eigenvalue outside the box falls near `μ`, `β` or `β⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationGuard {
    /// Eigenvalues outside the box must satisfy `|λ| > bound`.
    pub bound: f64,
    /// Required value of `β_j + τ_k` outside the box.
    pub required_sum: f64,
    pub beta_next: f64,
    pub tau_next_plus_beta1: f64,
    /// Allowance for `|γ_j² − β_j²|`.
    pub c_nu: f64,
    /// Largest `|λ − λ₀|` among in-box resonant modes at the box edge.
    pub resonant_spread: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    config: ProblemConfig,
    profile: ArithmeticProfile,
    zeros: BesselZeroTable,
    modes: Vec<Mode>,
    constants: SpectralConstants,
    guard: TruncationGuard,
}

fn eigenvalue_label(lambda: f64) -> String {
    let s = format!("{lambda:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Eigenvalue `(γ − τ)(γ + τ)/R²`, factored to keep resonant values accurate.
fn lambda_of(gamma: f64, tau: f64, radius: f64) -> f64 {
    (gamma - tau) * (gamma + tau) / (radius * radius)
}

/// Builds the table for `config`, computing the Bessel zeros it needs.
pub fn build_spectrum(config: &ProblemConfig) -> Result<SpectrumTable, SpectrumError> {
    config.check_basic()?;
    let zeros = bessel::zeros(config.order()?, config.truncation.j_max)?;
    enumerate_spectrum(config, zeros)
}

pub fn enumerate_spectrum(config: &ProblemConfig, zeros: BesselZeroTable) -> Result<SpectrumTable, SpectrumError> {
    config.check_basic()?;
    let profile = config.profile()?;
    let Truncation { j_max, k_max, .. } = config.truncation;
    if zeros.len() < j_max {
        return Err(SpectrumError::InvalidConfig(format!(
            "zero table holds {} zeros but j_max = {j_max}",
            zeros.len()
        )));
    }
    let (mu, beta, dmin) = (config.mu, config.beta, config.tolerances.delta_min);
    let radius = config.radius();

    let mut modes = Vec::with_capacity(j_max * (k_max + 1));
    for j in 1..=j_max {
        let gamma = zeros.get(j).expect("zero table covers j_max");
        for k in 0..=k_max {
            let lambda = lambda_of(gamma, profile.tau_k_f64(k as u64), radius);
            let subspace = if lambda < mu {
                Subspace::E1
            } else if lambda < beta {
                Subspace::E2
            } else {
                Subspace::E3
            };
            modes.push(Mode {
                j,
                k,
                gamma_j: gamma,
                lambda,
                paired: k > 0,
                resonant: profile.is_resonant(j as u64, k as u64),
                subspace,
            });
        }
    }

    for (which, level) in [("mu", mu), ("beta", beta)] {
        if let Some(m) = modes.iter().find(|m| (m.lambda - level).abs() < dmin) {
            return Err(SpectrumError::NearEigenvalue { which, eigenvalue: eigenvalue_label(m.lambda) });
        }
    }
    if !modes.iter().any(|m| m.subspace == Subspace::E2) {
        return Err(SpectrumError::EmptyWindow { mu, beta });
    }

    // resonant eigenvalues beyond the box approach λ₀ at least as closely as the edge ones
    let mut resonant_spread = 0.0f64;
    if profile.resonant_case {
        let edge: Vec<&Mode> = {
            let mut r: Vec<&Mode> = modes.iter().filter(|m| m.resonant).collect();
            r.sort_by_key(|m| m.j);
            r.into_iter().rev().take(2).collect()
        };
        for m in &edge {
            resonant_spread = resonant_spread.max((m.lambda - profile.lambda0).abs());
        }
        if profile.lambda0 + resonant_spread >= mu - dmin {
            return Err(SpectrumError::AccumulationPoint { lambda0: profile.lambda0 });
        }
    }

    let beta_minus = modes.iter().map(|m| m.lambda).filter(|&l| l < beta).fold(f64::NEG_INFINITY, f64::max);
    let beta_plus = modes.iter().map(|m| m.lambda).filter(|&l| l > beta).fold(f64::INFINITY, f64::min);
    if !beta_plus.is_finite() {
        return Err(SpectrumError::TruncationTooSmall("no enumerated eigenvalue above beta".into()));
    }

    let guard = truncation_guard(config, &profile, &zeros, beta_plus, resonant_spread);
    if guard.beta_next < guard.required_sum || guard.tau_next_plus_beta1 < guard.required_sum {
        return Err(SpectrumError::TruncationTooSmall(format!(
            "need beta_(j_max+1) and tau_(k_max+1) + beta_1 >= {:.3}, have {:.3} and {:.3}",
            guard.required_sum, guard.beta_next, guard.tau_next_plus_beta1
        )));
    }

    let mut delta = modes.iter().map(|m| (m.lambda - mu).abs()).fold(f64::INFINITY, f64::min);
    if profile.resonant_case {
        delta = delta.min(mu - (profile.lambda0 + resonant_spread));
    }
    let mu0 = beta_plus - mu;
    if mu.partial_cmp(&(beta_plus - beta)) != Some(std::cmp::Ordering::Less) {
        return Err(SpectrumError::MuOutOfRange { mu, upper: beta_plus - beta });
    }
    // rounded down until the quadratic-form bounds hold exactly on the float eigenvalues
    let gamma1 = certify_down((beta / beta_minus - 1.0).min(1.0), |g| {
        let one = BigRational::from_integer(BigInt::from(1));
        (one + exact(g)) * (exact(beta_minus) - exact(mu)) <= exact(beta)
    });
    let gamma2 = certify_down(1.0 - beta / mu0, |g| {
        let one = BigRational::from_integer(BigInt::from(1));
        (one - exact(g)) * (exact(beta_plus) - exact(mu)) >= exact(beta)
    });
    for (name, value) in [("gamma1", gamma1), ("gamma2", gamma2), ("delta", delta)] {
        if value.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(SpectrumError::NonPositiveConstant { name, value });
        }
    }
    let constants = SpectralConstants {
        delta,
        beta_minus,
        beta_plus,
        mu0,
        gamma1,
        gamma2,
        gamma: (config.eta / mu0).min(1.0),
    };
    Ok(SpectrumTable { config: config.clone(), profile, zeros, modes, constants, guard })
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

fn certify_down(mut v: f64, holds: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..64 {
        if v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || holds(v) {
            return v;
        }
        v = v.next_down();
    }
    v
}

fn truncation_guard(
    config: &ProblemConfig,
    profile: &ArithmeticProfile,
    zeros: &BesselZeroTable,
    beta_plus: f64,
    resonant_spread: f64,
) -> TruncationGuard {
    let nu = config.order().map(|o| o.nu()).unwrap_or(0.0);
    let measured = zeros
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let b = profile.beta_j_f64(i as u64 + 1);
            (g * g - b * b).abs()
        })
        .fold(0.0, f64::max);
    let c_nu = (1.1 * (4.0 * nu * nu - 1.0).abs() / 4.0).max(measured) + 0.5;
    let bound = beta_plus.max(config.beta).max(config.mu) + 1.0;
    let r = config.radius();
    let required_sum = (bound * r * r + c_nu) * 4.0 * profile.b as f64 / PI;
    let t = &config.truncation;
    TruncationGuard {
        bound,
        required_sum,
        beta_next: profile.beta_j_f64(t.j_max as u64 + 1),
        tau_next_plus_beta1: profile.tau_k_f64(t.k_max as u64 + 1) + profile.beta_j_f64(1),
        c_nu,
        resonant_spread,
    }
}

impl SpectrumTable {
    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn profile(&self) -> &ArithmeticProfile {
        &self.profile
    }

    pub fn zeros(&self) -> &BesselZeroTable {
        &self.zeros
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn constants(&self) -> &SpectralConstants {
        &self.constants
    }

    pub fn guard(&self) -> &TruncationGuard {
        &self.guard
    }

    pub fn j_max(&self) -> usize {
        self.config.truncation.j_max
    }

    pub fn k_max(&self) -> usize {
        self.config.truncation.k_max
    }

    pub fn mu(&self) -> f64 {
        self.config.mu
    }

    pub fn beta(&self) -> f64 {
        self.config.beta
    }

    /// Mode `(j, k)` with `1 ≤ j ≤ j_max`, `0 ≤ k ≤ k_max`.
    pub fn mode(&self, j: usize, k: usize) -> &Mode {
        assert!((1..=self.j_max()).contains(&j) && k <= self.k_max(), "mode ({j},{k}) outside the box");
        &self.modes[(j - 1) * (self.k_max() + 1) + k]
    }

    pub fn count_in(&self, subspace: Subspace) -> usize {
        self.modes.iter().filter(|m| m.subspace == subspace).map(|m| if m.paired { 2 } else { 1 }).sum()
    }
}
