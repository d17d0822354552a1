//! Discretized mountain pass: a string of nodes from `0` to `R₀u₀` relaxed by
//! transverse descent with equal-arclength reparametrization, followed by a
//! saddle polish of the highest node.
//!
//! Only nodes in the top band of the path move. Below the ridge the
//! transverse curvature may be negative, and descending there only drags
//! nodes downhill without lowering the path maximum.

use nalgebra::DVector;
use serde::Serialize;

use super::{Landscape, Precision, Sample, SearchOptions};
use crate::reduction::ReductionError;
use crate::space::CoefficientField;

/// Fraction of the rise above the endpoints within which nodes are moved.
const TOP_BAND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathAttempt {
    /// `±u₀` in chart coordinates.
    pub direction: Vec<f64>,
    pub iterations: usize,
    /// Largest transverse gradient at the last sweep.
    pub transverse_force: f64,
    pub max_node: usize,
    pub path_max: f64,
    pub endpoint_value: f64,
    /// The highest node sits at an endpoint, so the path crosses no ridge.
    pub collapsed: bool,
}

fn reparametrize(nodes: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let n = nodes.len();
    let mut arc = vec![0.0; n];
    for i in 1..n {
        arc[i] = arc[i - 1] + (&nodes[i] - &nodes[i - 1]).norm();
    }
    let total = arc[n - 1];
    if total == 0.0 {
        return nodes.to_vec();
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 2 < n && arc[seg + 1] < target {
            seg += 1;
        }
        let len = arc[seg + 1] - arc[seg];
        let w = if len > 0.0 { ((target - arc[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(&nodes[seg] * (1.0 - w) + &nodes[seg + 1] * w);
    }
    out[0] = nodes[0].clone();
    out[n - 1] = nodes[n - 1].clone();
    out
}
/// Highest node of a relaxed path with its unit tangent.
type PathTop = (Sample, DVector<f64>);


/// Relaxes the straight path `s ↦ s·end`. Returns the attempt summary and,
/// unless the path collapsed, the top node with its unit tangent.
pub fn relax_path(
    land: &Landscape,
    end: &DVector<f64>,
    opts: &SearchOptions,
) -> Result<(PathAttempt, Option<PathTop>), ReductionError> {
    let n = opts.path_nodes.max(3);
    let mut nodes: Vec<DVector<f64>> = (0..n).map(|i| end * (i as f64 / (n - 1) as f64)).collect();
    let mut warm: Vec<Option<CoefficientField>> = vec![None; n];
    let mut samples: Vec<Sample> = Vec::new();
    let mut iterations = 0;
    let mut force = f64::INFINITY;
    for it in 0..=opts.path_iterations {
        samples = opts
            .exec
            .map_range(n, |i| land.sample(&nodes[i], warm[i].as_ref(), Precision::Coarse))
            .into_iter()
            .collect::<Result<_, _>>()?;
        warm = samples.iter().map(|s| Some(s.eval.h.clone())).collect();
        iterations = it;
        let top = samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        let floor = samples[0].value.max(samples[n - 1].value);
        let band = top - TOP_BAND * (top - floor).max(0.0);
        let mut moved = nodes.clone();
        force = 0.0;
        for i in 1..n - 1 {
            if samples[i].value < band {
                continue;
            }
            let t = (&nodes[i + 1] - &nodes[i - 1]).normalize();
            let g = &samples[i].grad;
            let perp = g - &t * t.dot(g);
            force = force.max(perp.norm());
            let mut step = perp * opts.path_step;
            if step.norm() > opts.max_step {
                step *= opts.max_step / step.norm();
            }
            moved[i] = &nodes[i] - step;
        }
        if force <= opts.path_tol || it == opts.path_iterations {
            break;
        }
        nodes = reparametrize(&moved);
    }
    let (max_node, path_max) = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.value))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::NAN));
    let endpoint_value = samples[n - 1].value;
    let collapsed = max_node == 0 || max_node == n - 1 || path_max <= samples[0].value.max(endpoint_value);
    let attempt = PathAttempt {
        direction: (end / end.norm()).iter().copied().collect(),
        iterations,
        transverse_force: force,
        max_node,
        path_max,
        endpoint_value,
        collapsed,
    };
    if collapsed {
        return Ok((attempt, None));
    }
    let tangent = (&nodes[max_node + 1] - &nodes[max_node - 1]).normalize();
    Ok((attempt, Some((samples[max_node].clone(), tangent))))
}
