//! Bessel functions of the first kind `J_ν` for real order `ν ≥ -1/2`,
//! their derivative, and their positive zeros.
//!
//! Evaluation uses three regimes:
//!
//! * `x ≤ 8`: the ascending power series (no damaging cancellation there),
//! * `8 < x < 25 + ν²`: Miller's backward recurrence normalised by the
//!   Neumann sum `(x/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! · J_{ν+2k}(x)`,
//! * `x ≥ 25 + ν²`: Hankel's large-argument expansion, which terminates
//!   for half-integer orders.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

const SERIES_LIMIT: f64 = 8.0;
const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("Bessel order {nu} is not a finite number >= -1/2")]
    InvalidOrder { nu: f64 },
    #[error("argument {x} is outside the domain of J_{nu}")]
    Domain { nu: f64, x: f64 },
    #[error("a zero table needs at least one zero")]
    EmptyTable,
    #[error("zero {index} of J_{nu} did not converge (|J| = {residual:e})")]
    Convergence { nu: f64, index: usize, residual: f64 },
    #[error("sign-change audit failed for J_{nu} between zeros {index} and {next}", next = index + 1)]
    SkippedZero { nu: f64, index: usize },
}

/// Order `ν` of a Bessel function; for the radial wave operator `ν = (n-2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, BesselError> {
        if nu.is_finite() && nu >= -0.5 {
            Ok(Self(nu))
        } else {
            Err(BesselError::InvalidOrder { nu })
        }
    }

    /// Order attached to the radial Laplacian in dimension `n ≥ 1`.
    pub fn for_dimension(n: u32) -> Result<Self, BesselError> {
        Self::new((f64::from(n) - 2.0) / 2.0)
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    pub fn is_half_integer(self) -> bool {
        (2.0 * self.0).fract() == 0.0 && self.0.fract() != 0.0
    }

    /// The order `ν + 1`.
    pub fn raised(self) -> Self {
        Self(self.0 + 1.0)
    }
}

/// `J_ν(x)` for `x ≥ 0`. `J_{-1/2}` is singular at the origin and rejected there.
pub fn eval_j(order: BesselOrder, x: f64) -> Result<f64, BesselError> {
    let nu = order.nu();
    if !x.is_finite() || x < 0.0 {
        return Err(BesselError::Domain { nu, x });
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(BesselError::Domain { nu, x })
        };
    }
    Ok(j_positive(nu, x))
}

/// `x^{-ν} J_ν(x)`, which is finite (and positive) at `x = 0` for every admissible order.
pub fn eval_j_scaled(order: BesselOrder, x: f64) -> Result<f64, BesselError> {
    let nu = order.nu();
    if !x.is_finite() || x < 0.0 {
        return Err(BesselError::Domain { nu, x });
    }
    if x <= SERIES_LIMIT {
        Ok(scaled_series(nu, x))
    } else {
        Ok(j_positive(nu, x) * x.powf(-nu))
    }
}

/// `d/dx J_ν(x) = (ν/x) J_ν(x) - J_{ν+1}(x)` for `x > 0`.
pub fn eval_j_prime(order: BesselOrder, x: f64) -> Result<f64, BesselError> {
    let nu = order.nu();
    if !x.is_finite() || x <= 0.0 {
        return Err(BesselError::Domain { nu, x });
    }
    Ok(nu / x * j_positive(nu, x) - j_positive(nu + 1.0, x))
}

fn j_positive(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        scaled_series(nu, x) * x.powf(nu)
    } else if x >= 25.0 + nu * nu {
        hankel(nu, x)
    } else {
        miller(nu, x)
    }
}

/// Σ_m (-1)^m (x/2)^{2m} / (2^ν m! Γ(m+ν+1)).
fn scaled_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
    let mut sum = term;
    let mut m = 1.0;
    loop {
        term *= -q / (m * (m + nu));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && m > q {
            break;
        }
        m += 1.0;
    }
    sum
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0f64;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next == 0.0 || next.abs() < 1e-18 || next.abs() > term.abs() {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn miller(nu: f64, x: f64) -> f64 {
    let mut start = (x + 30.0 + 8.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    // weights[k] = (ν+2k)Γ(ν+k) / (k! Γ(ν+1)), weights[0] = 1
    let half = start / 2;
    let mut weights = vec![1.0; half + 1];
    if half >= 1 {
        weights[1] = nu + 2.0;
    }
    for k in 2..=half {
        let kf = k as f64;
        weights[k] = weights[k - 1] * (nu + 2.0 * kf) * (nu + kf - 1.0) / ((nu + 2.0 * kf - 2.0) * kf);
    }

    let mut upper = 0.0f64;
    let mut current = 1e-30f64;
    let mut norm = 0.0f64;
    let mut m = start;
    while m > 0 {
        if m.is_multiple_of(2) {
            norm += weights[m / 2] * current;
        }
        let lower = 2.0 * (nu + m as f64) / x * current - upper;
        upper = current;
        current = lower;
        m -= 1;
        if current.abs() > 1e250 {
            current *= 1e-250;
            upper *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += current;
    let log_scale = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    let ratio = current / norm;
    ratio.signum() * (log_scale + ratio.abs().ln()).exp()
}

/// First `len()` positive zeros of `J_ν`, strictly increasing; `get(1)` is the first zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselZeroTable {
    order: BesselOrder,
    zeros: Vec<f64>,
}

impl BesselZeroTable {
    pub fn order(&self) -> BesselOrder {
        self.order
    }

    /// The `j`-th positive zero, `j ≥ 1`.
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|i| self.zeros.get(i).copied())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

/// McMahon's leading-order location `(4j + 2ν - 1)π/4` of the `j`-th zero.
pub fn mcmahon_guess(order: BesselOrder, j: usize) -> f64 {
    (4.0 * j as f64 + 2.0 * order.nu() - 1.0) * PI / 4.0
}

/// First `j_max` positive zeros of `J_ν`.
pub fn zeros(order: BesselOrder, j_max: usize) -> Result<BesselZeroTable, BesselError> {
    if j_max == 0 {
        return Err(BesselError::EmptyTable);
    }
    let nu = order.nu();
    let sign = |x: f64| scaled_sign(nu, x);
    let mut found = Vec::with_capacity(j_max);
    let mut prev = 0.0f64;
    for j in 1..=j_max {
        let bracket = guess_bracket(nu, prev, mcmahon_guess(order, j))
            .unwrap_or_else(|| scan_bracket(nu, prev));
        let z = refine_zero(nu, bracket, j)?;
        debug_assert!(sign(z - 1e-9 * z) != sign(z + 1e-9 * z) || j_positive(nu, z).abs() < 1e-14);
        found.push(z);
        prev = z;
    }
    let table = BesselZeroTable { order, zeros: found };
    audit_zero_table(&table)?;
    Ok(table)
}

fn scaled_sign(nu: f64, x: f64) -> f64 {
    let v = if x <= SERIES_LIMIT { scaled_series(nu, x) } else { j_positive(nu, x) };
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn value(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        scaled_series(nu, x)
    } else {
        j_positive(nu, x)
    }
}

/// Counts sign changes of `J_ν` on `[a, b]` sampled at spacing `≤ π/8`.
fn sign_changes(nu: f64, a: f64, b: f64) -> usize {
    let steps = (((b - a) / (PI / 8.0)).ceil() as usize).max(1);
    let mut last = scaled_sign(nu, a);
    let mut count = 0;
    for i in 1..=steps {
        let x = a + (b - a) * i as f64 / steps as f64;
        let s = scaled_sign(nu, x);
        if s != 0.0 && last != 0.0 && s != last {
            count += 1;
        }
        if s != 0.0 {
            last = s;
        }
    }
    count
}

fn guess_bracket(nu: f64, prev: f64, guess: f64) -> Option<(f64, f64)> {
    let floor = prev + 1e-6 * prev.max(1.0);
    let lo = (guess - FRAC_PI_2).max(floor);
    let hi = guess + FRAC_PI_2;
    if lo >= hi {
        return None;
    }
    let no_earlier_zero = sign_changes(nu, floor, lo) == 0;
    let single = sign_changes(nu, lo, hi) == 1;
    let straddles = scaled_sign(nu, lo) * scaled_sign(nu, hi) < 0.0;
    (no_earlier_zero && single && straddles).then_some((lo, hi))
}

fn scan_bracket(nu: f64, prev: f64) -> (f64, f64) {
    let step = PI / 8.0;
    let mut lo = prev + 1e-6 * prev.max(1.0);
    let mut s_lo = scaled_sign(nu, lo);
    loop {
        let hi = lo + step;
        let s_hi = scaled_sign(nu, hi);
        if s_hi != s_lo && s_hi != 0.0 {
            return (lo, hi);
        }
        lo = hi;
        s_lo = s_hi;
    }
}

fn refine_zero(nu: f64, (mut lo, mut hi): (f64, f64), index: usize) -> Result<f64, BesselError> {
    let mut f_lo = value(nu, lo);
    for _ in 0..200 {
        if hi - lo < 1e-3 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = value(nu, mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        let f = j_positive(nu, x);
        if f == 0.0 {
            break;
        }
        if f.signum() == f_lo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let df = nu / x * f - j_positive(nu + 1.0, x);
        let mut next = x - f / df;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
        x = next;
        if done {
            break;
        }
    }
    let residual = j_positive(nu, x).abs();
    if residual <= ZERO_TOLERANCE {
        Ok(x)
    } else {
        Err(BesselError::Convergence { nu, index, residual })
    }
}

/// Verifies that no sign change of `J_ν` hides strictly between stored zeros
/// (or before the first one) and that signs alternate across each zero.
pub fn audit_zero_table(table: &BesselZeroTable) -> Result<(), BesselError> {
    let nu = table.order.nu();
    let zs = &table.zeros;
    let mut left = 0.0;
    let mut left_sign = scaled_sign(nu, 0.0);
    for (i, &z) in zs.iter().enumerate() {
        let margin = 1e-7 * z.max(1.0);
        let a = if i == 0 { 0.0 } else { left + margin };
        let b = z - margin;
        if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) || sign_changes(nu, a, b) != 0 {
            return Err(BesselError::SkippedZero { nu, index: i });
        }
        let inside = scaled_sign(nu, 0.5 * (a + b));
        if i > 0 && inside == left_sign {
            return Err(BesselError::SkippedZero { nu, index: i });
        }
        left = z;
        left_sign = inside;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.3, 1.0, PI / 2.0, 7.9, 8.1, 12.0, 24.9, 25.3, 100.0, 9999.0] {
            let c = (2.0 / (PI * x)).sqrt();
            assert!((eval_j(order(-0.5), x).unwrap() - c * x.cos()).abs() < 1e-13, "x={x}");
            assert!((eval_j(order(0.5), x).unwrap() - c * x.sin()).abs() < 1e-13, "x={x}");
            let j32 = c * (x.sin() / x - x.cos());
            assert!((eval_j(order(1.5), x).unwrap() - j32).abs() < 1e-13, "x={x}");
        }
        assert!(eval_j(order(-0.5), FRAC_PI_2).unwrap().abs() < 1e-15);
        assert!(eval_j(order(0.5), PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn origin_values_and_domain() {
        assert_eq!(eval_j(order(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(eval_j(order(1.5), 0.0).unwrap(), 0.0);
        assert!(matches!(eval_j(order(-0.5), 0.0), Err(BesselError::Domain { .. })));
        assert!(matches!(eval_j(order(0.0), -1.0), Err(BesselError::Domain { .. })));
        assert!(matches!(eval_j_prime(order(0.0), 0.0), Err(BesselError::Domain { .. })));
        assert!(BesselOrder::new(-0.6).is_err());
        assert_relative_eq!(eval_j_scaled(order(-0.5), 0.0).unwrap(), (2.0 / PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn regimes_agree_at_their_seams() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.5] {
            let hank = 25.0 + nu * nu;
            for &x in &[SERIES_LIMIT, hank] {
                let below = j_positive(nu, x - 1e-14 * x);
                let above = j_positive(nu, x + 1e-14 * x);
                assert!((below - above).abs() < 2e-13, "nu={nu} x={x}: {below} vs {above}");
            }
            let m = miller(nu, 20.0);
            let h = hankel(nu, 20.0);
            assert!((m - h).abs() < 1e-9, "nu={nu}");
        }
    }

    #[test]
    fn zeros_of_half_integer_orders() {
        let t = zeros(order(-0.5), 50).unwrap();
        for j in 1..=50 {
            let exact = (2 * j - 1) as f64 * PI / 2.0;
            assert_relative_eq!(t.get(j).unwrap(), exact, max_relative = 1e-12);
        }
        let t = zeros(order(0.5), 50).unwrap();
        for j in 1..=50 {
            assert_relative_eq!(t.get(j).unwrap(), j as f64 * PI, max_relative = 1e-12);
        }
        assert_eq!(t.get(0), None);
    }

    #[test]
    fn empty_zero_table_rejected() {
        assert_eq!(zeros(order(0.0), 0), Err(BesselError::EmptyTable));
    }

    #[test]
    fn large_orders_fall_back_to_scanning() {
        // McMahon's bracket misses the first zero of J_6 (≈ 9.936).
        let t = zeros(order(6.0), 3).unwrap();
        assert!((t.get(1).unwrap() - 9.936_109_524_217_684).abs() < 1e-10);
    }
}
