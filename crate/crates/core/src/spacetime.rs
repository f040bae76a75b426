//! Discrete spacetime `ℝ × Σ` with unit lapse.
//!
//! The time axis has `nt` slices `t_k = k dt`. Spacetime cells are products
//! of time cells (slice points or half-step intervals) with spatial cells.
//! A 1-form section `A = A⁰ dt + A¹` stores
//!
//! * `A¹` on the spatial edges of every slice `k` (time `k`),
//! * `A⁰` on the temporal edges between slices `k` and `k+1` (time `k + ½`).
//!
//! Section coefficients are laid out slice by slice: slice `k` holds its
//! `E` spatial-edge values followed, when `k < nt − 1`, by the `V` values of
//! `A⁰` at `k + ½`. All spacetime coefficients are integrated over their
//! cells, so the exterior derivative is a pure incidence matrix. The
//! Lorentzian pairing is diagonal with negative weights on cells that carry
//! a single `dt` factor.

use crate::error::{LabError, Result};
use crate::mesh::{HodgeComplex, MetricSpec, SpatialMesh};
use crate::sparse::CsrMatrix;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Layers at each temporal end where the finite window deviates from the
/// infinite lattice; residuals of Green identities are measured inside them.
pub const BOUNDARY_LAYERS: usize = 2;

/// Time profile of the metric interpolation parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ChiProfile {
    /// `χ ≡ 0`: every slice carries the first metric.
    Zero,
    /// `χ ≡ 1`: every slice carries the second metric.
    One,
    /// Cubic smoothstep from 0 at time `start` to 1 at time `end`.
    Smoothstep { start: f64, end: f64 },
    /// Explicit values per slice and edge.
    Table(Vec<Vec<f64>>),
}

/// `3x² − 2x³` clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

impl ChiProfile {
    fn value(&self, time: f64, slice: f64, edge: usize) -> f64 {
        match self {
            ChiProfile::Zero => 0.0,
            ChiProfile::One => 1.0,
            ChiProfile::Smoothstep { start, end } => smoothstep((time - start) / (end - start)),
            ChiProfile::Table(t) => {
                let lo = slice.floor() as usize;
                let hi = slice.ceil() as usize;
                0.5 * (t[lo][edge] + t[hi][edge])
            }
        }
    }
}

/// Kind tag of an assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    KleinGordon,
    Proca,
    Q,
    Kappa,
    Generic,
}

/// A sparse operator acting on section coefficients.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub kind: OperatorKind,
    pub matrix: CsrMatrix,
}

impl OperatorHandle {
    pub fn apply(&self, f: &DVector<f64>) -> DVector<f64> {
        self.matrix.mul_vec(f)
    }

    /// CSV triplets `row,col,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for (r, c, v) in self.matrix.triplets() {
            out.push_str(&format!("{r},{c},{v:e}\n"));
        }
        out
    }
}

/// Metric and weights of one spatial slice.
#[derive(Debug, Clone)]
pub struct SliceData {
    pub mesh: SpatialMesh,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl SliceData {
    fn new(mesh: SpatialMesh) -> Self {
        Self { w0: mesh.weights0(), w1: mesh.weights1(), w2: mesh.weights2(), mesh }
    }
}

/// Uniform time axis times a periodic lattice, with per-slice metrics.
#[derive(Debug, Clone)]
pub struct SpacetimeGrid {
    nt: usize,
    dt: f64,
    mass_sq: f64,
    margin: usize,
    base: SpatialMesh,
    /// Slice data at `k = 0..nt`.
    slices: Vec<SliceData>,
    /// Slice data at half steps `k + ½`, `k = 0..nt-1`.
    halves: Vec<SliceData>,
    weights1: DVector<f64>,
}

impl SpacetimeGrid {
    /// Grid whose slice metrics interpolate `h_χ = (1 − χ) h₀ + χ h₁`.
    ///
    /// `margin = None` selects `nt / 8`. The time step must satisfy
    /// [`SpacetimeGrid::stability_bound`].
    pub fn new(
        mesh0: &SpatialMesh,
        mesh1: &SpatialMesh,
        chi: &ChiProfile,
        nt: usize,
        dt: f64,
        margin: Option<usize>,
        mass_sq: f64,
    ) -> Result<Self> {
        let grid = Self::new_unstable(mesh0, mesh1, chi, nt, dt, margin, mass_sq)?;
        grid.check_stability()?;
        Ok(grid)
    }

    /// Same as [`SpacetimeGrid::new`] without the time-step bound.
    ///
    /// Pairings and operators are well defined on such grids; causal solves
    /// are not and [`crate::green::GreenSolver`] rejects them.
    pub fn new_unstable(
        mesh0: &SpatialMesh,
        mesh1: &SpatialMesh,
        chi: &ChiProfile,
        nt: usize,
        dt: f64,
        margin: Option<usize>,
        mass_sq: f64,
    ) -> Result<Self> {
        if !mesh0.same_lattice(mesh1) {
            return Err(LabError::LatticeMismatch("interpolated meshes must share sizes and spacing".into()));
        }
        if nt < 8 {
            return Err(LabError::InvalidGrid(format!("need at least 8 slices, got {nt}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::NonPositive { what: "dt", index: 0, value: dt });
        }
        if !(mass_sq > 0.0 && mass_sq.is_finite()) {
            return Err(LabError::NonPositiveMass(mass_sq));
        }
        let margin = margin.unwrap_or(nt / 8);
        if margin < BOUNDARY_LAYERS || 2 * margin + 2 > nt {
            return Err(LabError::InvalidGrid(format!(
                "margin {margin} must be at least {BOUNDARY_LAYERS} and leave room inside {nt} slices"
            )));
        }
        let n_edges = mesh0.n_edges();
        if let ChiProfile::Table(t) = chi {
            if t.len() != nt {
                return Err(LabError::LengthMismatch { what: "chi slices", expected: nt, got: t.len() });
            }
            if let Some(row) = t.iter().find(|r| r.len() != n_edges) {
                return Err(LabError::LengthMismatch { what: "chi edges", expected: n_edges, got: row.len() });
            }
        }
        if let ChiProfile::Smoothstep { start, end } = chi {
            if !(end > start) {
                return Err(LabError::InvalidArgument(format!("empty interpolation window [{start}, {end}]")));
            }
        }
        let h0 = mesh0.edge_metric();
        let h1 = mesh1.edge_metric();
        let build = |slice: f64| -> Result<SliceData> {
            let time = slice * dt;
            let mut table = Vec::with_capacity(n_edges);
            for e in 0..n_edges {
                let c = chi.value(time, slice, e);
                if !(0.0..=1.0).contains(&c) {
                    return Err(LabError::ChiOutOfRange { slice: slice.floor() as usize, value: c });
                }
                table.push((1.0 - c) * h0[e] + c * h1[e]);
            }
            Ok(SliceData::new(mesh0.with_metric(&MetricSpec::PerEdge(table))?))
        };
        let slices = (0..nt).map(|k| build(k as f64)).collect::<Result<Vec<_>>>()?;
        let halves = (0..nt - 1).map(|k| build(k as f64 + 0.5)).collect::<Result<Vec<_>>>()?;
        let mut grid = Self { nt, dt, mass_sq, margin, base: mesh0.clone(), slices, halves, weights1: DVector::zeros(0) };
        grid.weights1 = grid.assemble_weights1();
        Ok(grid)
    }

    /// Error unless `dt` is below [`SpacetimeGrid::stability_bound`].
    pub fn check_stability(&self) -> Result<()> {
        let bound = self.stability_bound();
        if self.dt < bound {
            Ok(())
        } else {
            Err(LabError::StabilityBound { dt: self.dt, bound })
        }
    }

    /// Ultrastatic grid: every slice carries the metric of `mesh`.
    pub fn ultrastatic(mesh: &SpatialMesh, nt: usize, dt: f64, margin: Option<usize>, mass_sq: f64) -> Result<Self> {
        Self::new(mesh, mesh, &ChiProfile::Zero, nt, dt, margin, mass_sq)
    }

    /// Largest admissible time step: `dt² (Σ_a 4 max h^♯_a / Δ_a² + m²) < 4`.
    ///
    /// In one dimension without mass this is `Δx / sqrt(max h^♯)`.
    pub fn stability_bound(&self) -> f64 {
        let mut worst = 0.0f64;
        for cx in self.slices.iter().chain(&self.halves) {
            let mesh = &cx.mesh;
            let mut per_axis = vec![0.0f64; mesh.dim()];
            for e in 0..mesh.n_edges() {
                let (axis, _) = mesh.edge_axis_base(e);
                per_axis[axis] = per_axis[axis].max(1.0 / mesh.edge_metric()[e]);
            }
            let s: f64 = per_axis.iter().zip(mesh.spacing()).map(|(hs, dx)| 4.0 * hs / (dx * dx)).sum();
            worst = worst.max(s);
        }
        2.0 / (worst + self.mass_sq).sqrt()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mass_sq(&self) -> f64 {
        self.mass_sq
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn base_mesh(&self) -> &SpatialMesh {
        &self.base
    }

    /// Metric and weights of slice `k`.
    pub fn slice(&self, k: usize) -> &SliceData {
        &self.slices[k]
    }

    /// Metric and weights at half step `k + ½`.
    pub fn half(&self, k: usize) -> &SliceData {
        &self.halves[k]
    }

    /// Full Hodge complex of slice `k`.
    pub fn slice_complex(&self, k: usize) -> HodgeComplex {
        HodgeComplex::new(&self.slices[k].mesh)
    }

    /// True when every slice and half step carries the same metric.
    pub fn is_ultrastatic(&self) -> bool {
        let h = self.slices[0].mesh.edge_metric();
        self.slices.iter().chain(&self.halves).all(|c| c.mesh.edge_metric() == h)
    }

    /// Same lattice, slice count and time step.
    pub fn compatible(&self, other: &SpacetimeGrid) -> bool {
        self.nt == other.nt && self.dt == other.dt && self.base.same_lattice(&other.base)
    }

    pub fn n_edges(&self) -> usize {
        self.base.n_edges()
    }

    pub fn n_nodes(&self) -> usize {
        self.base.n_nodes()
    }

    fn stride(&self) -> usize {
        self.n_edges() + self.n_nodes()
    }

    /// Number of section coefficients.
    pub fn n_dofs(&self) -> usize {
        self.nt * self.n_edges() + (self.nt - 1) * self.n_nodes()
    }

    /// Index of `A¹` on edge `e` of slice `k`.
    pub fn a1_index(&self, k: usize, e: usize) -> usize {
        k * self.stride() + e
    }

    /// Index of `A⁰` on node `v` at half step `k + ½`.
    pub fn a0_index(&self, k: usize, v: usize) -> usize {
        k * self.stride() + self.n_edges() + v
    }

    /// Slice that owns a coefficient.
    pub fn slice_of(&self, dof: usize) -> usize {
        dof / self.stride()
    }

    /// True for `A⁰` coefficients.
    pub fn is_temporal(&self, dof: usize) -> bool {
        dof % self.stride() >= self.n_edges()
    }

    /// Spatial cell (edge or node) of a coefficient.
    pub fn spatial_cell(&self, dof: usize) -> usize {
        let r = dof % self.stride();
        if r >= self.n_edges() {
            r - self.n_edges()
        } else {
            r
        }
    }

    /// `A¹` of slice `k`.
    pub fn a1(&self, f: &DVector<f64>, k: usize) -> DVector<f64> {
        let s = self.a1_index(k, 0);
        f.rows(s, self.n_edges()).into_owned()
    }

    /// `A⁰` at half step `k + ½` (integrated over the temporal edge).
    pub fn a0(&self, f: &DVector<f64>, k: usize) -> DVector<f64> {
        let s = self.a0_index(k, 0);
        f.rows(s, self.n_nodes()).into_owned()
    }

    /// Assemble a section from per-slice `A¹` and per-half-step `A⁰` (integrated) values.
    pub fn section(&self, a0: &[DVector<f64>], a1: &[DVector<f64>]) -> Result<DVector<f64>> {
        if a1.len() != self.nt || a0.len() != self.nt - 1 {
            return Err(LabError::LengthMismatch { what: "section slices", expected: self.nt, got: a1.len() });
        }
        let mut f = DVector::zeros(self.n_dofs());
        for (k, v) in a1.iter().enumerate() {
            f.rows_mut(self.a1_index(k, 0), self.n_edges()).copy_from(v);
        }
        for (k, v) in a0.iter().enumerate() {
            f.rows_mut(self.a0_index(k, 0), self.n_nodes()).copy_from(v);
        }
        Ok(f)
    }

    fn assemble_weights1(&self) -> DVector<f64> {
        let mut w = DVector::zeros(self.n_dofs());
        for k in 0..self.nt {
            for e in 0..self.n_edges() {
                w[self.a1_index(k, e)] = self.dt * self.slices[k].w1[e];
            }
            if k + 1 < self.nt {
                for v in 0..self.n_nodes() {
                    w[self.a0_index(k, v)] = -self.halves[k].w0[v] / self.dt;
                }
            }
        }
        w
    }

    /// Signed Lorentzian weights of section coefficients.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights1
    }

    /// Weights of spacetime 0-forms (nodes of every slice).
    pub fn weights0(&self) -> DVector<f64> {
        let v = self.n_nodes();
        DVector::from_fn(self.nt * v, |i, _| self.dt * self.slices[i / v].w0[i % v])
    }

    fn n_faces2(&self) -> usize {
        (self.nt - 1) * self.n_edges() + self.nt * self.base.n_faces()
    }

    /// Weights of spacetime 2-forms: temporal faces first, then spatial faces.
    pub fn weights2(&self) -> DVector<f64> {
        let e = self.n_edges();
        let f = self.base.n_faces();
        let mut w = DVector::zeros(self.n_faces2());
        for k in 0..self.nt - 1 {
            for j in 0..e {
                w[k * e + j] = -self.halves[k].w1[j] / self.dt;
            }
        }
        for k in 0..self.nt {
            for j in 0..f {
                w[(self.nt - 1) * e + k * f + j] = self.dt * self.slices[k].w2[j];
            }
        }
        w
    }

    /// Spacetime derivative of 0-forms into sections.
    pub fn d0(&self) -> CsrMatrix {
        let v = self.n_nodes();
        let d = self.base.incidence0();
        let mut t = Vec::new();
        for k in 0..self.nt {
            for (e, n, s) in d.triplets() {
                t.push((self.a1_index(k, e), k * v + n, s));
            }
            if k + 1 < self.nt {
                for n in 0..v {
                    t.push((self.a0_index(k, n), (k + 1) * v + n, 1.0));
                    t.push((self.a0_index(k, n), k * v + n, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(self.n_dofs(), self.nt * v, &t)
    }

    /// Spacetime derivative of sections into 2-forms.
    pub fn d1(&self) -> CsrMatrix {
        let e = self.n_edges();
        let f = self.base.n_faces();
        let d0 = self.base.incidence0();
        let d1 = self.base.incidence1();
        let mut t = Vec::new();
        for k in 0..self.nt - 1 {
            for j in 0..e {
                t.push((k * e + j, self.a1_index(k + 1, j), 1.0));
                t.push((k * e + j, self.a1_index(k, j), -1.0));
            }
            for (j, n, s) in d0.triplets() {
                t.push((k * e + j, self.a0_index(k, n), -s));
            }
        }
        for k in 0..self.nt {
            for (face, j, s) in d1.triplets() {
                t.push(((self.nt - 1) * e + k * f + face, self.a1_index(k, j), s));
            }
        }
        CsrMatrix::from_triplets(self.n_faces2(), self.n_dofs(), &t)
    }

    /// Codifferential from sections to 0-forms.
    pub fn delta1(&self) -> CsrMatrix {
        let w0 = self.weights0();
        let inv: Vec<f64> = w0.iter().map(|w| 1.0 / w).collect();
        self.d0().transpose().scale(Some(&inv), Some(self.weights1.as_slice()))
    }

    /// Codifferential from 2-forms to sections.
    pub fn delta2(&self) -> CsrMatrix {
        let w2 = self.weights2();
        let inv: Vec<f64> = self.weights1.iter().map(|w| 1.0 / w).collect();
        self.d1().transpose().scale(Some(&inv), Some(w2.as_slice()))
    }

    /// `δ d` on sections.
    pub fn delta_d(&self) -> CsrMatrix {
        self.delta2().mul(&self.d1())
    }

    /// `d δ` on sections.
    pub fn d_delta(&self) -> CsrMatrix {
        self.d0().mul(&self.delta1())
    }

    /// Proca operator `P = δd + m²`.
    pub fn proca(&self) -> OperatorHandle {
        let id = CsrMatrix::scaled_identity(self.n_dofs(), 1.0);
        OperatorHandle { kind: OperatorKind::Proca, matrix: self.delta_d().add(1.0, &id, self.mass_sq) }
    }

    /// Klein–Gordon operator `N = δd + dδ + m²`.
    pub fn klein_gordon(&self) -> OperatorHandle {
        let p = self.proca().matrix;
        OperatorHandle { kind: OperatorKind::KleinGordon, matrix: p.add(1.0, &self.d_delta(), 1.0) }
    }

    /// `Q = Id + m⁻² dδ`.
    pub fn q_operator(&self) -> OperatorHandle {
        let id = CsrMatrix::scaled_identity(self.n_dofs(), 1.0);
        OperatorHandle { kind: OperatorKind::Q, matrix: id.add(1.0, &self.d_delta(), 1.0 / self.mass_sq) }
    }

    /// Lorentzian pairing of two sections.
    ///
    /// At least one section must vanish on the first and last slice.
    pub fn pairing(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        if !self.vanishes_at_ends(f) && !self.vanishes_at_ends(g) {
            return Err(LabError::MarginViolation("neither section vanishes on the first and last slice"));
        }
        Ok(self.pairing_unchecked(f, g))
    }

    /// `Σ w_i f_i g_i` without support checks.
    pub fn pairing_unchecked(&self, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        self.weights1.iter().zip(f.iter().zip(g.iter())).map(|(w, (a, b))| w * (a * b)).sum()
    }

    fn vanishes_at_ends(&self, f: &DVector<f64>) -> bool {
        (0..f.len()).all(|i| {
            let k = self.slice_of(i);
            !(k == 0 || k + 1 == self.nt) || f[i] == 0.0
        })
    }

    /// Mask selecting coefficients with slices in `[lo, hi)`.
    pub fn slice_mask(&self, lo: usize, hi: usize) -> DVector<f64> {
        DVector::from_fn(self.n_dofs(), |i, _| {
            let k = self.slice_of(i);
            if k >= lo && k < hi {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Mask excluding the outermost boundary layers.
    pub fn interior_mask(&self) -> DVector<f64> {
        self.slice_mask(BOUNDARY_LAYERS, self.nt - BOUNDARY_LAYERS)
    }

    /// Zero the boundary layers of a vector.
    pub fn interior(&self, f: &DVector<f64>) -> DVector<f64> {
        f.component_mul(&self.interior_mask())
    }

    /// True when `f` vanishes on the first `margin` slices.
    pub fn vanishes_in_past_margin(&self, f: &DVector<f64>) -> bool {
        (0..f.len()).all(|i| self.slice_of(i) >= self.margin || f[i] == 0.0)
    }

    /// True when `f` vanishes on the last `margin` slices.
    pub fn vanishes_in_future_margin(&self, f: &DVector<f64>) -> bool {
        (0..f.len()).all(|i| self.slice_of(i) + self.margin < self.nt || f[i] == 0.0)
    }

    /// True when `f` vanishes on both margins.
    pub fn is_margined(&self, f: &DVector<f64>) -> bool {
        self.vanishes_in_past_margin(f) && self.vanishes_in_future_margin(f)
    }

    /// Mask of the slices strictly between the margins.
    pub fn margin_mask(&self) -> DVector<f64> {
        self.slice_mask(self.margin, self.nt - self.margin)
    }

    /// Weighted (absolute-weight) norm used for relative residuals.
    pub fn norm(&self, f: &DVector<f64>) -> f64 {
        self.weights1.iter().zip(f.iter()).map(|(w, a)| w.abs() * a * a).sum::<f64>().sqrt()
    }

    /// Fiber isometry `κ_{BA}` from this grid (A) to `target` (B).
    pub fn fiber_isometry(&self, target: &SpacetimeGrid) -> Result<OperatorHandle> {
        if !self.compatible(target) {
            return Err(LabError::LatticeMismatch("fiber isometry between incompatible grids".into()));
        }
        let mut d = vec![1.0; self.n_dofs()];
        for k in 0..self.nt {
            let ha = self.slices[k].mesh.edge_metric();
            let hb = target.slices[k].mesh.edge_metric();
            for e in 0..self.n_edges() {
                d[self.a1_index(k, e)] = (hb[e] / ha[e]).sqrt();
            }
        }
        Ok(OperatorHandle { kind: OperatorKind::Kappa, matrix: CsrMatrix::diagonal(&d) })
    }

    /// Pointwise volume ratio `vol_B / vol_A` per section coefficient.
    pub fn volume_ratio(&self, target: &SpacetimeGrid) -> DVector<f64> {
        DVector::from_fn(self.n_dofs(), |i, _| {
            let k = self.slice_of(i);
            let c = self.spatial_cell(i);
            if self.is_temporal(i) {
                target.halves[k].w0[c] / self.halves[k].w0[c]
            } else {
                let (ma, mb) = (&self.slices[k].mesh, &target.slices[k].mesh);
                (0..ma.dim()).map(|a| (mb.edge_component(c, a) / ma.edge_component(c, a)).sqrt()).product()
            }
        })
    }
}

/// Adjoint of a sparse map `T: A → B` for the Lorentzian pairings: `W_A⁻¹ Tᵀ W_B`.
pub fn adjoint(t: &CsrMatrix, grid_a: &SpacetimeGrid, grid_b: &SpacetimeGrid) -> Result<CsrMatrix> {
    if t.nrows() != grid_b.n_dofs() || t.ncols() != grid_a.n_dofs() {
        return Err(LabError::LengthMismatch { what: "operator shape", expected: grid_a.n_dofs(), got: t.ncols() });
    }
    let inv: Vec<f64> = grid_a.weights().iter().map(|w| 1.0 / w).collect();
    Ok(t.transpose().scale(Some(&inv), Some(grid_b.weights().as_slice())))
}

/// Dense version of [`adjoint`].
pub fn adjoint_dense(t: &DMatrix<f64>, grid_a: &SpacetimeGrid, grid_b: &SpacetimeGrid) -> Result<DMatrix<f64>> {
    if t.nrows() != grid_b.n_dofs() || t.ncols() != grid_a.n_dofs() {
        return Err(LabError::LengthMismatch { what: "operator shape", expected: grid_a.n_dofs(), got: t.ncols() });
    }
    let wa = grid_a.weights();
    let wb = grid_b.weights();
    Ok(DMatrix::from_fn(t.ncols(), t.nrows(), |r, c| t[(c, r)] * wb[c] / wa[r]))
}

/// JSON grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "Nt")]
    pub nt: usize,
    pub dt: f64,
    #[serde(default)]
    pub margins: Option<usize>,
    pub mesh0: crate::mesh::MeshSpec,
    #[serde(default)]
    pub mesh1: Option<crate::mesh::MeshSpec>,
    #[serde(default = "default_chi")]
    pub chi: String,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    pub mass_sq: f64,
}

fn default_chi() -> String {
    "zero".into()
}

impl GridSpec {
    /// Build the grid described by this spec.
    pub fn build(&self) -> Result<SpacetimeGrid> {
        let m0 = self.mesh0.build()?;
        let m1 = match &self.mesh1 {
            Some(s) => s.build()?,
            None => m0.clone(),
        };
        let chi = match self.chi.as_str() {
            "zero" => ChiProfile::Zero,
            "one" => ChiProfile::One,
            "smoothstep" => {
                let [start, end] = self
                    .window
                    .ok_or_else(|| LabError::InvalidArgument("smoothstep profile requires a window".into()))?;
                ChiProfile::Smoothstep { start, end }
            }
            other => return Err(LabError::InvalidArgument(format!("unknown chi profile {other:?}"))),
        };
        SpacetimeGrid::new(&m0, &m1, &chi, self.nt, self.dt, self.margins, self.mass_sq)
    }
}
