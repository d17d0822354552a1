//! Measured mountain-pass geometry: ring level `τ` at radius `r̄`, escape
//! radius `R₀`, and sampled bounds `M̂ ≥ Φ̂`, `b̂ ≤ Φ̂` on `B_{R₀}`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use super::{Landscape, Precision, Sample, SearchOptions};
use crate::reduction::ReductionError;
use crate::space::CoefficientField;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryEstimate {
    pub r_bar: f64,
    pub tau: f64,
    /// Smallest sampled `Φ̂` on the ring `|x| = r̄`.
    pub ring_min: f64,
    /// Bound on how far `Φ̂` can dip between neighbouring ring samples.
    pub dip_bound: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub m_hat: f64,
    pub b_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum GeometryError {
    #[error("no sampled radius up to {max_radius} has Φ̂ ≤ 0 in every direction")]
    NoEscapeRadius { max_radius: f64 },
    #[error("no ring inside R0 = {r0} has a positive minimum")]
    NoPositiveRing { r0: f64 },
}

/// Ring samples along the radius ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    pub directions: usize,
    /// Directions cover half the sphere (`Φ̂` even).
    pub symmetric: bool,
    pub radii: Vec<f64>,
    pub ring_min: Vec<f64>,
    pub ring_max: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GeometryOutcome {
    pub ladder: Ladder,
    pub estimate: Result<GeometryEstimate, GeometryError>,
    pub m_hat: f64,
}

/// Unit sampling directions. When `Φ̂` is even only one of `±d` is kept.
pub fn directions(dim: usize, count: usize, symmetric: bool, seed: u64) -> Vec<DVector<f64>> {
    let count = count.max(1);
    match dim {
        1 => {
            let mut v = vec![DVector::from_element(1, 1.0)];
            if !symmetric {
                v.push(DVector::from_element(1, -1.0));
            }
            v
        }
        2 => {
            let (n, span) = if symmetric { (count, std::f64::consts::PI) } else { (2 * count, std::f64::consts::TAU) };
            (0..n)
                .map(|i| {
                    let th = span * i as f64 / n as f64;
                    DVector::from_vec(vec![th.cos(), th.sin()])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5249_4e47);
            let mut out = Vec::new();
            for _ in 0..count {
                let v = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                let v: DVector<f64> = v.normalize();
                if !symmetric {
                    out.push(-&v);
                }
                out.push(v);
            }
            out
        }
    }
}

fn ring(
    land: &Landscape,
    dirs: &[DVector<f64>],
    r: f64,
    warm: &[Option<CoefficientField>],
    precision: Precision,
    opts: &SearchOptions,
) -> Result<Vec<Sample>, ReductionError> {
    opts.exec
        .map_range(dirs.len(), |i| land.sample(&(&dirs[i] * r), warm[i].as_ref(), precision))
        .into_iter()
        .collect()
}

fn ring_min(land: &Landscape, dirs: &[DVector<f64>], r: f64, opts: &SearchOptions) -> Result<f64, ReductionError> {
    let none = vec![None; dirs.len()];
    Ok(ring(land, dirs, r, &none, Precision::Coarse, opts)?.iter().map(|s| s.value).fold(f64::INFINITY, f64::min))
}

/// Largest possible drop below the smaller endpoint value on each arc between
/// neighbouring samples of a planar ring, from two-sided Taylor bounds with a
/// curvature estimate taken (with a factor 2) from the tangential derivatives.
fn planar_dip(samples: &[Sample], r: f64, symmetric: bool) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let tangential = |s: &Sample| {
        let (c, si) = (s.x[0] / r, s.x[1] / r);
        -si * s.grad[0] + c * s.grad[1]
    };
    let d: Vec<f64> = samples.iter().map(tangential).collect();
    let span = if symmetric { std::f64::consts::PI } else { std::f64::consts::TAU };
    let arc = r * span / n as f64;
    // the sample after the last one is the first one rotated by `span`;
    // for an even `Φ̂` the value and the tangential derivative carry over
    let next = |i: usize| (i + 1) % n;
    let kappa = 2.0 * (0..n).map(|i| (d[next(i)] - d[i]).abs() / arc).fold(0.0, f64::max);
    let mut dip: f64 = 0.0;
    for i in 0..n {
        let (va, da) = (samples[i].value, d[i]);
        let (vb, db) = (samples[next(i)].value, d[next(i)]);
        let mut lowest = f64::INFINITY;
        for q in 0..=64 {
            let sg = arc * q as f64 / 64.0;
            let left = va + da * sg - 0.5 * kappa * sg * sg;
            let right = vb - db * (arc - sg) - 0.5 * kappa * (arc - sg).powi(2);
            lowest = lowest.min(left.max(right));
        }
        dip = dip.max(va.min(vb) - lowest);
    }
    dip
}

pub fn estimate_geometry(land: &Landscape, opts: &SearchOptions) -> Result<GeometryOutcome, ReductionError> {
    let nl = land.functional().nonlinearity();
    let symmetric = nl.is_odd() && nl.is_autonomous();
    let dirs = directions(land.dim(), opts.ring_directions, symmetric, opts.seed);
    let step = opts.radius_step;
    let mut ladder = Ladder { directions: dirs.len(), symmetric, radii: Vec::new(), ring_min: Vec::new(), ring_max: Vec::new() };
    let mut warm: Vec<Option<CoefficientField>> = vec![None; dirs.len()];
    let mut m_hat = 0.0f64;
    let mut b_hat = 0.0f64;
    let mut escape: Option<usize> = None;
    let mut r0 = None;
    for i in 1.. {
        let r = step * i as f64;
        if r > opts.max_radius {
            break;
        }
        let samples = ring(land, &dirs, r, &warm, Precision::Coarse, opts)?;
        let lo = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        warm = samples.into_iter().map(|s| Some(s.eval.h)).collect();
        ladder.radii.push(r);
        ladder.ring_min.push(lo);
        ladder.ring_max.push(hi);
        m_hat = m_hat.max(hi);
        if hi > 0.0 {
            escape = None;
        } else if escape.is_none() {
            escape = Some(ladder.radii.len() - 1);
        }
        if let Some(e) = escape {
            let re = ladder.radii[e];
            if r >= (1.5 * re).max(re + 8.0 * step) {
                r0 = Some(re);
                break;
            }
        }
    }
    let Some(r0) = r0 else {
        let estimate = Err(GeometryError::NoEscapeRadius { max_radius: opts.max_radius });
        return Ok(GeometryOutcome { ladder, estimate, m_hat });
    };
    for (r, lo) in ladder.radii.iter().zip(&ladder.ring_min) {
        if *r <= r0 {
            b_hat = b_hat.min(*lo);
        }
    }

    let inside: Vec<usize> = (0..ladder.radii.len()).filter(|&i| ladder.radii[i] < r0 && ladder.ring_min[i] > 0.0).collect();
    let Some(&best) = inside.iter().max_by(|&&a, &&b| ladder.ring_min[a].total_cmp(&ladder.ring_min[b])) else {
        return Ok(GeometryOutcome { ladder, estimate: Err(GeometryError::NoPositiveRing { r0 }), m_hat });
    };
    // golden-section refinement of the ring minimum around the best rung
    let mut a = if best == 0 { 0.5 * ladder.radii[0] } else { ladder.radii[best - 1] };
    let mut b = ladder.radii.get(best + 1).copied().unwrap_or(ladder.radii[best]).min(r0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = ring_min(land, &dirs, c, opts)?;
    let mut fd = ring_min(land, &dirs, d, opts)?;
    while b - a > 1e-4 * b.max(1.0) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ring_min(land, &dirs, c, opts)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ring_min(land, &dirs, d, opts)?;
        }
    }
    let r_bar = 0.5 * (a + b);
    let none = vec![None; dirs.len()];
    let samples = ring(land, &dirs, r_bar, &none, Precision::Fine, opts)?;
    let ring_min = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    m_hat = m_hat.max(samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max));
    let dip_bound = if land.dim() == 2 { planar_dip(&samples, r_bar, symmetric) } else { 0.0 };
    let tau = ring_min - dip_bound;
    if tau <= 0.0 {
        return Ok(GeometryOutcome { ladder, estimate: Err(GeometryError::NoPositiveRing { r0 }), m_hat });
    }
    let estimate = GeometryEstimate { r_bar, tau, ring_min, dip_bound, r0, m_hat, b_hat };
    Ok(GeometryOutcome { ladder, estimate: Ok(estimate), m_hat })
}
