//! Exact resonance arithmetic for the wave-operator spectrum.
//!
//! With `8R/T = a/b` in lowest terms, `β_j = (4j+n-3)π/4` and
//! `τ_k = 2kπR/T = k·(a/b)·π/4`, so every difference is an integer multiple
//! of `π/(4b)`:
//!
//! ```text
//! β_j − τ_k = π/(4b) · N(j,k),   N(j,k) = (4j+n−3)·b − k·a.
//! ```
//!
//! The audit works on `N` directly, which is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exec::Exec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArithmeticProfile {
    pub n: u32,
    pub a: u64,
    pub b: u64,
    /// gcd(4, a)
    pub gcd4a: u64,
    /// Whether gcd(4, a) divides n − 3, i.e. whether resonant pairs exist.
    pub resonant_case: bool,
    /// Accumulation point −(n−3)(n−1)/(4R²) of the resonant eigenvalues.
    pub lambda0: f64,
}

impl ArithmeticProfile {
    /// Builds the profile from `R = r_coef·π`, `T = t_coef·π`.
    pub fn new(n: u32, r_coef: &BigRational, t_coef: &BigRational) -> Option<Self> {
        if n == 0 || !r_coef.is_positive() || !t_coef.is_positive() {
            return None;
        }
        let ratio = BigRational::from_integer(BigInt::from(8)) * r_coef / t_coef;
        let a = ratio.numer().to_u64()?;
        let b = ratio.denom().to_u64()?;
        let gcd4a = a.gcd(&4);
        let resonant_case = (i64::from(n) - 3).rem_euclid(gcd4a as i64) == 0;
        let radius = r_coef.to_f64()? * std::f64::consts::PI;
        let nf = f64::from(n);
        // `+ 0.0` turns the `n = 3` value −0 into 0
        let lambda0 = -(nf - 3.0) * (nf - 1.0) / (4.0 * radius * radius) + 0.0;
        Some(Self { n, a, b, gcd4a, resonant_case, lambda0 })
    }

    /// `β_j / π` as an exact fraction.
    pub fn beta_j(&self, j: u64) -> BigRational {
        BigRational::new(BigInt::from(4 * j as i64 + i64::from(self.n) - 3), BigInt::from(4))
    }

    /// `τ_k / π` as an exact fraction.
    pub fn tau_k(&self, k: u64) -> BigRational {
        BigRational::new(BigInt::from(k) * BigInt::from(self.a), BigInt::from(4 * self.b))
    }

    /// `N(j,k)`, so that `β_j − τ_k = N·π/(4b)`.
    pub fn gap_numerator(&self, j: u64, k: u64) -> i128 {
        (4 * j as i128 + i128::from(self.n) - 3) * i128::from(self.b) - i128::from(k) * i128::from(self.a)
    }

    pub fn is_resonant(&self, j: u64, k: u64) -> bool {
        self.gap_numerator(j, k) == 0
    }

    /// `β_j + τ_k` in units of `π/(4b)`.
    pub fn sum_numerator(&self, j: u64, k: u64) -> i128 {
        (4 * j as i128 + i128::from(self.n) - 3) * i128::from(self.b) + i128::from(k) * i128::from(self.a)
    }

    /// `β_j` as a float.
    pub fn beta_j_f64(&self, j: u64) -> f64 {
        (4.0 * j as f64 + f64::from(self.n) - 3.0) * std::f64::consts::FRAC_PI_4
    }

    /// `τ_k` as a float.
    pub fn tau_k_f64(&self, k: u64) -> f64 {
        k as f64 * self.a as f64 / self.b as f64 * std::f64::consts::FRAC_PI_4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapWitness {
    pub j: u64,
    pub k: u64,
    /// `|β_j − τ_k|/π` as `p/q` in lowest terms.
    pub gap_over_pi: String,
    pub gap_over_pi_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAudit {
    pub j_max: u64,
    pub k_max: u64,
    pub pairs: u64,
    /// Lower bound `1/(4b)` (in units of π) required of every non-resonant gap.
    pub bound_over_pi: String,
    pub resonant_count: u64,
    pub resonant_pairs: Vec<(u64, u64)>,
    pub min_nonzero_gap: Option<GapWitness>,
    pub violations: u64,
    pub first_violation: Option<(u64, u64)>,
}

impl GapAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct RowSummary {
    resonant: Vec<u64>,
    min_abs: Option<(i128, u64)>,
    violations: u64,
    first_violation: Option<u64>,
}

/// Exhaustive audit of the dichotomy `β_j = τ_k` or `|β_j − τ_k| ≥ π/(4b)`
/// over `1 ≤ j ≤ j_max`, `0 ≤ k ≤ k_max`.
pub fn gap_audit(profile: &ArithmeticProfile, j_max: u64, k_max: u64, exec: Exec) -> GapAudit {
    let rows = exec.map_range(j_max as usize, |i| {
        let j = i as u64 + 1;
        let mut row = RowSummary { resonant: Vec::new(), min_abs: None, violations: 0, first_violation: None };
        let step = i128::from(profile.a);
        let mut num = profile.gap_numerator(j, 0);
        for k in 0..=k_max {
            if num == 0 {
                row.resonant.push(k);
            } else {
                let g = num.abs();
                if g < 1 {
                    row.violations += 1;
                    row.first_violation.get_or_insert(k);
                }
                if row.min_abs.is_none_or(|(m, _)| g < m) {
                    row.min_abs = Some((g, k));
                }
            }
            num -= step;
        }
        row
    });

    let mut audit = GapAudit {
        j_max,
        k_max,
        pairs: j_max * (k_max + 1),
        bound_over_pi: format!("1/{}", 4 * profile.b),
        resonant_count: 0,
        resonant_pairs: Vec::new(),
        min_nonzero_gap: None,
        violations: 0,
        first_violation: None,
    };
    let mut best: Option<(i128, u64, u64)> = None;
    for (i, row) in rows.into_iter().enumerate() {
        let j = i as u64 + 1;
        audit.resonant_count += row.resonant.len() as u64;
        audit.resonant_pairs.extend(row.resonant.into_iter().map(|k| (j, k)));
        audit.violations += row.violations;
        if audit.first_violation.is_none() {
            audit.first_violation = row.first_violation.map(|k| (j, k));
        }
        if let Some((g, k)) = row.min_abs {
            if best.is_none_or(|(m, _, _)| g < m) {
                best = Some((g, j, k));
            }
        }
    }
    audit.min_nonzero_gap = best.map(|(g, j, k)| {
        let r = Ratio::new(g, 4 * i128::from(profile.b));
        GapWitness {
            j,
            k,
            gap_over_pi: format!("{}/{}", r.numer(), r.denom()),
            gap_over_pi_f64: *r.numer() as f64 / *r.denom() as f64,
        }
    });
    audit
}

/// Exact check of one pair through big rationals, independent of `N(j,k)`.
pub fn pair_satisfies_dichotomy(profile: &ArithmeticProfile, j: u64, k: u64) -> bool {
    let diff = profile.beta_j(j) - profile.tau_k(k);
    let bound = BigRational::new(BigInt::from(1), BigInt::from(4 * profile.b));
    diff.is_zero() || diff.abs() >= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn reference_profiles() {
        let p3 = ArithmeticProfile::new(3, &rat(1, 2), &rat(2, 1)).unwrap();
        assert_eq!((p3.a, p3.b, p3.gcd4a, p3.resonant_case), (2, 1, 2, true));
        assert_eq!(p3.lambda0, 0.0);
        let p2 = ArithmeticProfile::new(2, &rat(1, 2), &rat(2, 1)).unwrap();
        assert!(!p2.resonant_case);
        let p5 = ArithmeticProfile::new(5, &rat(1, 2), &rat(2, 1)).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((p5.lambda0 + 8.0 / pi2).abs() < 1e-15);
    }

    #[test]
    fn numerator_matches_big_rationals() {
        let p = ArithmeticProfile::new(5, &rat(3, 4), &rat(5, 3)).unwrap();
        for j in 1..30 {
            for k in 0..30 {
                let diff = p.beta_j(j) - p.tau_k(k);
                let scaled = diff * BigRational::from_integer(BigInt::from(4 * p.b));
                assert!(scaled.is_integer());
                assert_eq!(scaled.to_integer(), BigInt::from(p.gap_numerator(j, k)));
                assert!(pair_satisfies_dichotomy(&p, j, k));
            }
        }
    }

    #[test]
    fn audit_agrees_between_policies() {
        let p = ArithmeticProfile::new(1, &rat(1, 2), &rat(2, 1)).unwrap();
        let a = gap_audit(&p, 300, 300, Exec::Sequential);
        let b = gap_audit(&p, 300, 300, Exec::Parallel);
        assert_eq!(a, b);
        assert!(a.passed());
    }
}
