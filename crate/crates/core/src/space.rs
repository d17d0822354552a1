//! Truncated working space `E` in the real eigenbasis
//!
//! ```text
//! ψ_{j,m}(t, r) = Θ_m(t) · φ_j(r),
//! φ_j(r) = √2 / (R·J_{ν+1}(γ_j)) · r^{−ν} J_ν(γ_j r/R),
//! Θ_0 = 1/√T,  Θ_{2k−1} = √(2/T) cos(2πkt/T),  Θ_{2k} = √(2/T) sin(2πkt/T),
//! ```
//!
//! orthonormal in `L²(Ω, r^{n−1} dt dr)`. Coefficients live in a `J × M`
//! array (`M = 2k_max + 1`), row `j−1`, column `m`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use ndarray::{Array1, Array2, Zip};
use rand::Rng;
use thiserror::Error;

use crate::bessel::{eval_j, eval_j_scaled};
use crate::spectrum::{SpectrumTable, Subspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("grid under-resolves the truncation: {0}")]
    Resolution(String),
    #[error("point (t = {t}, r = {r}) lies outside [0, T] x [0, R]")]
    Domain { t: f64, r: f64 },
    #[error("mode ({j}, {k}) outside the truncation box")]
    UnknownMode { j: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

/// Real basis mode; `Sin` is only valid for `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub j: usize,
    pub k: usize,
    pub parity: Parity,
}

impl ModeIndex {
    pub fn cos(j: usize, k: usize) -> Self {
        Self { j, k, parity: Parity::Cos }
    }

    pub fn sin(j: usize, k: usize) -> Self {
        Self { j, k, parity: Parity::Sin }
    }

    /// Column of the coefficient array.
    pub fn column(self) -> usize {
        match (self.k, self.parity) {
            (0, _) => 0,
            (k, Parity::Cos) => 2 * k - 1,
            (k, Parity::Sin) => 2 * k,
        }
    }

    /// Inverse of [`ModeIndex::column`], with `j` supplied.
    pub fn from_position(j: usize, m: usize) -> Self {
        if m == 0 {
            Self::cos(j, 0)
        } else if m % 2 == 1 {
            Self::cos(j, m.div_ceil(2))
        } else {
            Self::sin(j, m / 2)
        }
    }
}

/// Subspace selector for [`Space::project`]. `E0` is the span of resonant modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    E0,
    E1,
    E2,
    E3,
    E13,
}

/// Coefficient field of a truncated element of `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    coeffs: Array2<f64>,
}

impl CoefficientField {
    pub fn zeros(j_max: usize, m: usize) -> Self {
        Self { coeffs: Array2::zeros((j_max, m)) }
    }

    pub fn from_array(coeffs: Array2<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coeffs
    }

    pub fn into_array(self) -> Array2<f64> {
        self.coeffs
    }

    pub fn get(&self, mode: ModeIndex) -> f64 {
        self.coeffs[(mode.j - 1, mode.column())]
    }

    pub fn set(&mut self, mode: ModeIndex, value: f64) {
        self.coeffs[(mode.j - 1, mode.column())] = value;
    }

    /// Euclidean (= `L²(Ω,ρ)`) inner product of coefficients.
    pub fn dot(&self, other: &Self) -> f64 {
        Zip::from(&self.coeffs).and(&other.coeffs).fold(0.0, |acc, a, b| acc + a * b)
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&v| v == 0.0)
    }

    /// `self + s·other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self { coeffs: &self.coeffs + &(&other.coeffs * s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coeffs: &self.coeffs - &other.coeffs }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: &self.coeffs * s }
    }
}

/// Space-time quadrature: uniform trapezoid in `t`, Gauss–Legendre in `r`
/// with `r^{n−1}` folded into the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSampling {
    pub nt: usize,
    pub nr: usize,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub wt: f64,
    pub wr: Vec<f64>,
}

impl GridSampling {
    pub fn new(n: u32, radius: f64, period: f64, nt: usize, nr: usize) -> Result<Self, SpaceError> {
        let (Some(_), Some(nr_nz)) = (NonZeroUsize::new(nt), NonZeroUsize::new(nr)) else {
            return Err(SpaceError::Resolution("nt and nr must be positive".into()));
        };
        let rule = GaussLegendre::new(nr_nz);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let half = 0.5 * radius;
        let r: Vec<f64> = pairs.iter().map(|&(x, _)| half * (x + 1.0)).collect();
        let wr = pairs
            .iter()
            .zip(&r)
            .map(|(&(_, w), &ri)| half * w * ri.powi(n as i32 - 1))
            .collect();
        let t = (0..nt).map(|a| period * a as f64 / nt as f64).collect();
        Ok(Self { nt, nr, t, r, wt: period / nt as f64, wr })
    }

    /// `∬ g ρ dt dr` for grid values `g` (`nt × nr`).
    pub fn integrate(&self, values: &Array2<f64>) -> f64 {
        let mut s = 0.0;
        for row in values.rows() {
            s += row.iter().zip(&self.wr).map(|(v, w)| v * w).sum::<f64>();
        }
        s * self.wt
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub e_norm: f64,
    pub l2_norm: f64,
    pub l1_norm_estimate: f64,
}

/// Truncated basis plus quadrature, shared by every downstream computation.
#[derive(Debug, Clone)]
pub struct Space {
    table: Arc<SpectrumTable>,
    grid: GridSampling,
    radius: f64,
    period: f64,
    nu: f64,
    norm_const: Vec<f64>,
    theta: Array2<f64>,
    phi: Array2<f64>,
    theta_w: Array2<f64>,
    phi_w: Array2<f64>,
    lambda: Array2<f64>,
    shifted: Array2<f64>,
    labels: Array2<Subspace>,
    resonant: Array2<bool>,
}

impl Space {
    pub fn new(table: Arc<SpectrumTable>) -> Result<Self, SpaceError> {
        let cfg = table.config();
        let (j_max, k_max) = (table.j_max(), table.k_max());
        let (nt, nr) = (cfg.truncation.nt, cfg.truncation.nr);
        if nt <= 2 * k_max {
            return Err(SpaceError::Resolution(format!("nt = {nt} must exceed 2*k_max = {}", 2 * k_max)));
        }
        let gamma_top = table.zeros().get(j_max).expect("zeros cover j_max");
        let need_r = (gamma_top / PI + 10.0).ceil() as usize;
        if nr < need_r {
            return Err(SpaceError::Resolution(format!("nr = {nr} must be at least {need_r}")));
        }
        let (radius, period) = (cfg.radius(), cfg.period());
        let order = cfg.order().expect("validated order");
        let nu = order.nu();
        let grid = GridSampling::new(cfg.n, radius, period, nt, nr)?;
        let m = 2 * k_max + 1;

        let norm_const: Vec<f64> = (1..=j_max)
            .map(|j| {
                let g = table.zeros().get(j).unwrap();
                let jn1 = eval_j(order.raised(), g).expect("positive zero");
                2f64.sqrt() / (radius * jn1) * (g / radius).powf(nu)
            })
            .collect();

        let mut space = Self {
            table: table.clone(),
            grid,
            radius,
            period,
            nu,
            norm_const,
            theta: Array2::zeros((m, nt)),
            phi: Array2::zeros((j_max, nr)),
            theta_w: Array2::zeros((m, nt)),
            phi_w: Array2::zeros((j_max, nr)),
            lambda: Array2::zeros((j_max, m)),
            shifted: Array2::zeros((j_max, m)),
            labels: Array2::from_elem((j_max, m), Subspace::E1),
            resonant: Array2::from_elem((j_max, m), false),
        };
        space.theta = space.temporal_matrix(&space.grid.t.clone());
        space.phi = space.radial_matrix(&space.grid.r.clone());
        space.theta_w = &space.theta * space.grid.wt;
        let wr = Array1::from(space.grid.wr.clone());
        space.phi_w = &space.phi * &wr;

        let mu = table.mu();
        for j in 1..=j_max {
            for mm in 0..m {
                let idx = ModeIndex::from_position(j, mm);
                let mode = table.mode(j, idx.k);
                space.lambda[(j - 1, mm)] = mode.lambda;
                space.shifted[(j - 1, mm)] = mode.lambda - mu;
                space.labels[(j - 1, mm)] = mode.subspace;
                space.resonant[(j - 1, mm)] = mode.resonant;
            }
        }
        Ok(space)
    }

    pub fn table(&self) -> &Arc<SpectrumTable> {
        &self.table
    }

    pub fn grid(&self) -> &GridSampling {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn j_max(&self) -> usize {
        self.table.j_max()
    }

    pub fn k_max(&self) -> usize {
        self.table.k_max()
    }

    /// Number of coefficient columns, `2k_max + 1`.
    pub fn m(&self) -> usize {
        2 * self.k_max() + 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.j_max(), self.m())
    }

    pub fn dim(&self) -> usize {
        self.j_max() * self.m()
    }

    pub fn zeros(&self) -> CoefficientField {
        CoefficientField::zeros(self.j_max(), self.m())
    }

    pub fn unit(&self, mode: ModeIndex) -> CoefficientField {
        let mut u = self.zeros();
        u.set(mode, 1.0);
        u
    }

    /// `λ_m` per coefficient.
    pub fn lambda(&self) -> &Array2<f64> {
        &self.lambda
    }

    /// `λ_m − μ` per coefficient.
    pub fn shifted(&self) -> &Array2<f64> {
        &self.shifted
    }

    pub fn labels(&self) -> &Array2<Subspace> {
        &self.labels
    }

    pub fn resonant_mask(&self) -> &Array2<bool> {
        &self.resonant
    }

    /// All real modes in array order.
    pub fn modes(&self) -> Vec<ModeIndex> {
        let m = self.m();
        (1..=self.j_max()).flat_map(|j| (0..m).map(move |mm| ModeIndex::from_position(j, mm))).collect()
    }

    /// Modes of one subspace, in array order.
    pub fn modes_in(&self, subspace: Subspace) -> Vec<ModeIndex> {
        self.modes().into_iter().filter(|md| self.labels[(md.j - 1, md.column())] == subspace).collect()
    }

    pub fn in_label(&self, j0: usize, m: usize, label: Label) -> bool {
        let s = self.labels[(j0, m)];
        match label {
            Label::E0 => self.resonant[(j0, m)],
            Label::E1 => s == Subspace::E1,
            Label::E2 => s == Subspace::E2,
            Label::E3 => s == Subspace::E3,
            Label::E13 => s != Subspace::E2,
        }
    }

    pub fn project(&self, u: &CoefficientField, label: Label) -> CoefficientField {
        let mut out = u.clone();
        for ((j0, m), v) in out.coeffs.indexed_iter_mut() {
            if !self.in_label(j0, m, label) {
                *v = 0.0;
            }
        }
        out
    }

    /// `Σ (λ_m − μ) c_m²`, i.e. `⟨(L − μ)u, u⟩`.
    pub fn quadratic_form(&self, u: &CoefficientField) -> f64 {
        Zip::from(&u.coeffs).and(&self.shifted).fold(0.0, |acc, c, d| acc + d * c * c)
    }

    pub fn e_norm_sq(&self, u: &CoefficientField) -> f64 {
        Zip::from(&u.coeffs).and(&self.shifted).fold(0.0, |acc, c, d| acc + d.abs() * c * c)
    }

    pub fn e_norm(&self, u: &CoefficientField) -> f64 {
        self.e_norm_sq(u).sqrt()
    }

    /// `E`-inner product `Σ |λ_m − μ| a_m b_m`.
    pub fn e_inner(&self, a: &CoefficientField, b: &CoefficientField) -> f64 {
        Zip::from(&a.coeffs).and(&b.coeffs).and(&self.shifted).fold(0.0, |acc, x, y, d| acc + d.abs() * x * y)
    }

    /// Dual norm `(Σ g_m²/|λ_m − μ|)^{1/2}` of an `L²`-represented gradient.
    pub fn dual_norm(&self, g: &CoefficientField) -> f64 {
        Zip::from(&g.coeffs).and(&self.shifted).fold(0.0, |acc, x, d| acc + x * x / d.abs()).sqrt()
    }

    pub fn norms(&self, u: &CoefficientField) -> Norms {
        let values = self.synthesize(u);
        let l1 = self.grid.integrate(&values.mapv(f64::abs));
        Norms { e_norm: self.e_norm(u), l2_norm: u.l2_norm(), l1_norm_estimate: l1 }
    }

    fn temporal_row(&self, m: usize, t: f64) -> f64 {
        let idx = ModeIndex::from_position(1, m);
        let w = 2.0 * PI * idx.k as f64 / self.period;
        match (idx.k, idx.parity) {
            (0, _) => 1.0 / self.period.sqrt(),
            (_, Parity::Cos) => (2.0 / self.period).sqrt() * (w * t).cos(),
            (_, Parity::Sin) => (2.0 / self.period).sqrt() * (w * t).sin(),
        }
    }

    fn radial_value(&self, j: usize, r: f64) -> f64 {
        let g = self.table.zeros().get(j).unwrap();
        let s = eval_j_scaled(crate::bessel::BesselOrder::new(self.nu).unwrap(), g * r / self.radius)
            .expect("nonnegative radial argument");
        self.norm_const[j - 1] * s
    }

    /// `Θ_m(t_a)` for arbitrary times (`M × len`).
    pub fn temporal_matrix(&self, ts: &[f64]) -> Array2<f64> {
        Array2::from_shape_fn((self.m(), ts.len()), |(m, a)| self.temporal_row(m, ts[a]))
    }

    /// `φ_j(r_b)` for arbitrary radii (`J × len`).
    pub fn radial_matrix(&self, rs: &[f64]) -> Array2<f64> {
        Array2::from_shape_fn((self.j_max(), rs.len()), |(j0, b)| self.radial_value(j0 + 1, rs[b]))
    }

    /// Normalised real eigenfunction at `(t, r) ∈ [0,T] × [0,R]`.
    pub fn eigenfunction_value(&self, mode: ModeIndex, t: f64, r: f64) -> Result<f64, SpaceError> {
        if !(0.0..=self.period).contains(&t) || !(0.0..=self.radius).contains(&r) {
            return Err(SpaceError::Domain { t, r });
        }
        if mode.j == 0 || mode.j > self.j_max() || mode.k > self.k_max() || (mode.k == 0 && mode.parity == Parity::Sin)
        {
            return Err(SpaceError::UnknownMode { j: mode.j, k: mode.k });
        }
        Ok(self.temporal_row(mode.column(), t) * self.radial_value(mode.j, r))
    }

    /// Grid values `u(t_a, r_b)` (`nt × nr`).
    pub fn synthesize(&self, u: &CoefficientField) -> Array2<f64> {
        let x = u.coeffs.dot(&self.theta);
        x.t().dot(&self.phi)
    }

    /// Values on user-supplied lines `ts × rs`.
    pub fn synthesize_at(&self, u: &CoefficientField, ts: &[f64], rs: &[f64]) -> Array2<f64> {
        let x = u.coeffs.dot(&self.temporal_matrix(ts));
        x.t().dot(&self.radial_matrix(rs))
    }

    /// Weighted-quadrature projection of grid values onto the basis.
    pub fn analyze(&self, values: &Array2<f64>) -> CoefficientField {
        let y = self.phi_w.dot(&values.t());
        CoefficientField { coeffs: y.dot(&self.theta_w.t()) }
    }

    /// Random field supported on `label`: uniform coefficients in `[−1, 1]`
    /// damped by `(1 + |λ−μ|)^{−1/2}`, then scaled to `E`-norm `scale`.
    pub fn random_field<R: Rng + ?Sized>(&self, rng: &mut R, label: Label, scale: f64) -> CoefficientField {
        let mut u = self.zeros();
        for ((j0, m), v) in u.coeffs.indexed_iter_mut() {
            let x: f64 = rng.random_range(-1.0..=1.0);
            if self.in_label(j0, m, label) {
                *v = x / (1.0 + self.shifted[(j0, m)].abs()).sqrt();
            }
        }
        let n = self.e_norm(&u);
        if n > 0.0 {
            u.scaled(scale / n)
        } else {
            u
        }
    }

    /// Copies `u` from a smaller space into this one (missing modes stay zero).
    pub fn embed(&self, u: &CoefficientField) -> CoefficientField {
        let mut out = self.zeros();
        let (j, m) = u.coeffs.dim();
        let (jj, mm) = (j.min(self.j_max()), m.min(self.m()));
        out.coeffs.slice_mut(ndarray::s![..jj, ..mm]).assign(&u.coeffs.slice(ndarray::s![..jj, ..mm]));
        out
    }
}
