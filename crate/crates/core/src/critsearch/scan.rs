//! Dense grid scan of `Φ̂` on a planar `E₂`, used as a brute-force oracle.

use nalgebra::DVector;
use ndarray::Array2;
use serde::Serialize;

use super::{Landscape, Precision, SearchOptions};
use crate::reduction::ReductionError;
use crate::space::CoefficientField;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseScan {
    pub half_width: f64,
    /// Node coordinates along each chart axis.
    pub axis: Vec<f64>,
    /// `values[(i, j)] = Φ̂(axis[i], axis[j])`.
    pub values: Array2<f64>,
    /// Rows filled by `Φ̂(−x) = Φ̂(x)` instead of evaluation.
    pub mirrored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMatch {
    pub matched: bool,
    /// Lower-left node of the matching stationary cell.
    pub cell: Option<(usize, usize)>,
    /// `Φ̂` at the grid node nearest to the point.
    pub nearest_value: f64,
}

/// Scans the square `[−w, w]²` with `points × points` nodes. Rows run in
/// parallel; along a row each solve is warm-started from its neighbour.
pub fn dense_scan(land: &Landscape, half_width: f64, points: usize, opts: &SearchOptions) -> Result<DenseScan, ReductionError> {
    assert_eq!(land.dim(), 2, "dense scan needs a planar E2");
    let n = points.max(3);
    let axis: Vec<f64> = (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect();
    let nl = land.functional().nonlinearity();
    let mirrored = nl.is_odd() && nl.is_autonomous();
    let rows = if mirrored { n / 2 + 1 } else { n };
    let computed = opts.exec.map_range(rows, |i| -> Result<Vec<f64>, ReductionError> {
        let mut warm: Option<CoefficientField> = None;
        let mut row = Vec::with_capacity(n);
        for &y in &axis {
            let s = land.sample(&DVector::from_vec(vec![axis[i], y]), warm.as_ref(), Precision::Coarse)?;
            row.push(s.value);
            warm = Some(s.eval.h);
        }
        Ok(row)
    });
    let mut values = Array2::from_elem((n, n), f64::NAN);
    for (i, row) in computed.into_iter().enumerate() {
        let row = row?;
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
            if mirrored {
                values[(n - 1 - i, n - 1 - j)] = v;
            }
        }
    }
    Ok(DenseScan { half_width, axis, values, mirrored })
}

impl DenseScan {
    pub fn points(&self) -> usize {
        self.axis.len()
    }

    pub fn spacing(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    /// Largest node value and its position.
    pub fn max(&self) -> (f64, [f64; 2]) {
        self.extreme(|_| true, |a, b| a > b)
    }

    /// Smallest node value within `|x| ≤ radius`.
    pub fn min_within(&self, radius: f64) -> (f64, [f64; 2]) {
        self.extreme(|p| p[0].hypot(p[1]) <= radius, |a, b| a < b)
    }

    fn extreme(&self, keep: impl Fn([f64; 2]) -> bool, better: impl Fn(f64, f64) -> bool) -> (f64, [f64; 2]) {
        let mut best = (f64::NAN, [f64::NAN; 2]);
        for ((i, j), &v) in self.values.indexed_iter() {
            let p = [self.axis[i], self.axis[j]];
            if keep(p) && (best.0.is_nan() || better(v, best.0)) {
                best = (v, p);
            }
        }
        best
    }

    /// Central-difference gradient at an interior node.
    fn node_grad(&self, i: usize, j: usize) -> [f64; 2] {
        let h2 = 2.0 * self.spacing();
        [
            (self.values[(i + 1, j)] - self.values[(i - 1, j)]) / h2,
            (self.values[(i, j + 1)] - self.values[(i, j - 1)]) / h2,
        ]
    }

    /// A cell is stationary when both discrete gradient components take
    /// both signs (zero counts as either) over its four corners.
    pub fn is_stationary_cell(&self, a: usize, b: usize) -> bool {
        let n = self.points();
        if a < 1 || b < 1 || a + 2 >= n || b + 2 >= n {
            return false;
        }
        let corners = [self.node_grad(a, b), self.node_grad(a + 1, b), self.node_grad(a, b + 1), self.node_grad(a + 1, b + 1)];
        (0..2).all(|c| corners.iter().any(|g| g[c] <= 0.0) && corners.iter().any(|g| g[c] >= 0.0))
    }

    /// Matches `x` against stationary cells within one cell of the cell containing it.
    pub fn match_point(&self, x: &[f64]) -> ScanMatch {
        let h = self.spacing();
        let n = self.points() as isize;
        let locate = |v: f64| ((v + self.half_width) / h).floor() as isize;
        let nearest = |v: f64| (((v + self.half_width) / h).round() as isize).clamp(0, n - 1) as usize;
        let nearest_value = self.values[(nearest(x[0]), nearest(x[1]))];
        let (a0, b0) = (locate(x[0]), locate(x[1]));
        let mut cell = None;
        'outer: for da in -1..=1 {
            for db in -1..=1 {
                let (a, b) = (a0 + da, b0 + db);
                if a >= 0 && b >= 0 && self.is_stationary_cell(a as usize, b as usize) {
                    cell = Some((a as usize, b as usize));
                    break 'outer;
                }
            }
        }
        ScanMatch { matched: cell.is_some(), cell, nearest_value }
    }
}
