//! Periodic spatial lattices and their discrete Hodge complex.
//!
//! Cells are indexed row-major with axis 0 fastest. Node `(i, j)` has index
//! `i + n0 * j`. Edges are grouped by axis: the edge of axis `a` leaving node
//! `n` in the positive direction has index `a * n_nodes + n`. Faces exist only
//! in two dimensions; face `n` is the plaquette whose lower-left corner is
//! node `n`, oriented counter-clockwise.
//!
//! Form coefficients are integrated quantities: a 1-form stores its integral
//! along each edge and a 2-form its integral over each face. With this choice
//! the exterior derivative is a pure incidence matrix and all metric data
//! lives in the diagonal weights `W0`, `W1`, `W2`.

use crate::error::{LabError, Result};
use crate::sparse::CsrMatrix;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// How the diagonal metric is prescribed.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    /// Same value for every diagonal component on every edge.
    Constant(f64),
    /// One value per edge, for the component along that edge's axis.
    PerEdge(Vec<f64>),
}

/// Periodic lattice carrying a positive diagonal metric sampled at edge midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    sizes: Vec<usize>,
    spacing: Vec<f64>,
    edge_metric: Vec<f64>,
}

impl SpatialMesh {
    /// Build a lattice of dimension `sizes.len()`.
    ///
    /// `spacing` holds either one value for all axes or one value per axis.
    pub fn new(sizes: &[usize], spacing: &[f64], metric: &MetricSpec) -> Result<Self> {
        let dim = sizes.len();
        if dim != 1 && dim != 2 {
            return Err(LabError::UnsupportedDimension(dim));
        }
        for (axis, &size) in sizes.iter().enumerate() {
            if size < 3 {
                return Err(LabError::SizeTooSmall { axis, size });
            }
        }
        let spacing: Vec<f64> = match spacing.len() {
            1 => vec![spacing[0]; dim],
            n if n == dim => spacing.to_vec(),
            n => return Err(LabError::LengthMismatch { what: "spacing", expected: dim, got: n }),
        };
        check_positive("spacing", &spacing)?;
        let n_nodes: usize = sizes.iter().product();
        let n_edges = dim * n_nodes;
        let edge_metric = match metric {
            MetricSpec::Constant(c) => vec![*c; n_edges],
            MetricSpec::PerEdge(table) => {
                if table.len() != n_edges {
                    return Err(LabError::LengthMismatch {
                        what: "metric table",
                        expected: n_edges,
                        got: table.len(),
                    });
                }
                table.clone()
            }
        };
        check_positive("metric", &edge_metric)?;
        Ok(Self { sizes: sizes.to_vec(), spacing, edge_metric })
    }

    /// Same lattice with a different metric table.
    pub fn with_metric(&self, metric: &MetricSpec) -> Result<Self> {
        Self::new(&self.sizes, &self.spacing, metric)
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Metric component along each edge, indexed like the edges.
    pub fn edge_metric(&self) -> &[f64] {
        &self.edge_metric
    }

    pub fn n_nodes(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn n_edges(&self) -> usize {
        self.dim() * self.n_nodes()
    }

    pub fn n_faces(&self) -> usize {
        if self.dim() == 2 {
            self.n_nodes()
        } else {
            0
        }
    }

    /// Number of `k`-cells.
    pub fn n_cells(&self, k: usize) -> usize {
        match k {
            0 => self.n_nodes(),
            1 => self.n_edges(),
            2 => self.n_faces(),
            _ => 0,
        }
    }

    /// True when both meshes have the same dimension, sizes and spacing.
    pub fn same_lattice(&self, other: &SpatialMesh) -> bool {
        self.sizes == other.sizes && self.spacing == other.spacing
    }

    /// Node index of integer coordinates, wrapped periodically.
    pub fn node_index(&self, coords: &[isize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (a, &n) in self.sizes.iter().enumerate() {
            let c = coords[a].rem_euclid(n as isize) as usize;
            idx += c * stride;
            stride *= n;
        }
        idx
    }

    /// Integer coordinates of a node.
    pub fn node_coords(&self, node: usize) -> Vec<isize> {
        let mut rest = node;
        self.sizes
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c as isize
            })
            .collect()
    }

    /// Neighbour of `node` shifted by `step` cells along `axis`.
    pub fn shift(&self, node: usize, axis: usize, step: isize) -> usize {
        let mut c = self.node_coords(node);
        c[axis] += step;
        self.node_index(&c)
    }

    /// Index of the edge of `axis` leaving `node` in the positive direction.
    pub fn edge_index(&self, axis: usize, node: usize) -> usize {
        axis * self.n_nodes() + node
    }

    /// `(axis, base node)` of an edge.
    pub fn edge_axis_base(&self, edge: usize) -> (usize, usize) {
        (edge / self.n_nodes(), edge % self.n_nodes())
    }

    /// Position of a node along each axis in lattice units.
    pub fn node_position(&self, node: usize) -> Vec<f64> {
        self.node_coords(node).iter().zip(&self.spacing).map(|(&c, &h)| c as f64 * h).collect()
    }

    fn h(&self, axis: usize, node: usize) -> f64 {
        self.edge_metric[self.edge_index(axis, node)]
    }

    /// Metric component `axis` at a node: geometric mean of the two incident edges.
    pub fn node_component(&self, node: usize, axis: usize) -> f64 {
        let prev = self.shift(node, axis, -1);
        (self.h(axis, prev) * self.h(axis, node)).sqrt()
    }

    /// Metric component `comp` at the midpoint of `edge`.
    pub fn edge_component(&self, edge: usize, comp: usize) -> f64 {
        let (axis, base) = self.edge_axis_base(edge);
        if comp == axis {
            self.edge_metric[edge]
        } else {
            let next = self.shift(base, axis, 1);
            (self.node_component(base, comp) * self.node_component(next, comp)).sqrt()
        }
    }

    /// Metric component `comp` at the centre of a face (two dimensions only).
    pub fn face_component(&self, face: usize, comp: usize) -> f64 {
        let other = 1 - comp;
        let next = self.shift(face, other, 1);
        (self.h(comp, face) * self.h(comp, next)).sqrt()
    }

    fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Weights of the 0-form inner product: `sqrt(det h)` times the cell volume.
    pub fn weights0(&self) -> Vec<f64> {
        let vol = self.cell_volume();
        (0..self.n_nodes())
            .map(|n| vol * (0..self.dim()).map(|a| self.node_component(n, a).sqrt()).product::<f64>())
            .collect()
    }

    /// Weights of the 1-form inner product on integrated edge coefficients.
    pub fn weights1(&self) -> Vec<f64> {
        let vol = self.cell_volume();
        (0..self.n_edges())
            .map(|e| {
                let (axis, _) = self.edge_axis_base(e);
                let sqrt_det: f64 = (0..self.dim()).map(|c| self.edge_component(e, c).sqrt()).product();
                let len = self.spacing[axis];
                vol * sqrt_det / (len * len * self.edge_metric[e])
            })
            .collect()
    }

    /// Weights of the 2-form inner product on integrated face coefficients.
    pub fn weights2(&self) -> Vec<f64> {
        if self.dim() != 2 {
            return Vec::new();
        }
        let area = self.spacing[0] * self.spacing[1];
        (0..self.n_faces())
            .map(|f| 1.0 / (area * (self.face_component(f, 0) * self.face_component(f, 1)).sqrt()))
            .collect()
    }

    /// Incidence matrix from nodes to edges.
    pub fn incidence0(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.n_edges());
        for e in 0..self.n_edges() {
            let (axis, base) = self.edge_axis_base(e);
            t.push((e, base, -1.0));
            t.push((e, self.shift(base, axis, 1), 1.0));
        }
        CsrMatrix::from_triplets(self.n_edges(), self.n_nodes(), &t)
    }

    /// Incidence matrix from edges to faces (empty in one dimension).
    pub fn incidence1(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(4 * self.n_faces());
        for f in 0..self.n_faces() {
            let right = self.shift(f, 0, 1);
            let up = self.shift(f, 1, 1);
            t.push((f, self.edge_index(0, f), 1.0));
            t.push((f, self.edge_index(1, right), 1.0));
            t.push((f, self.edge_index(0, up), -1.0));
            t.push((f, self.edge_index(1, f), -1.0));
        }
        CsrMatrix::from_triplets(self.n_faces(), self.n_edges(), &t)
    }
}

fn check_positive(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(index) => Err(LabError::NonPositive { what, index, value: values[index] }),
        None => Ok(()),
    }
}

/// A real k-form on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    pub degree: usize,
    pub values: DVector<f64>,
}

impl FormField {
    /// Wrap coefficients, checking the length against the mesh.
    pub fn new(mesh: &SpatialMesh, degree: usize, values: DVector<f64>) -> Result<Self> {
        if degree > mesh.dim() {
            return Err(LabError::DegreeMismatch(format!("no {degree}-forms in dimension {}", mesh.dim())));
        }
        let expected = mesh.n_cells(degree);
        if values.len() != expected {
            return Err(LabError::LengthMismatch { what: "form coefficients", expected, got: values.len() });
        }
        Ok(Self { degree, values })
    }

    pub fn zeros(mesh: &SpatialMesh, degree: usize) -> Self {
        Self { degree, values: DVector::zeros(mesh.n_cells(degree)) }
    }
}

/// Incidence matrices, weights, codifferentials and Laplacians of one mesh.
#[derive(Debug, Clone)]
pub struct HodgeComplex {
    pub mesh: SpatialMesh,
    pub d0: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub w0: DVector<f64>,
    pub w1: DVector<f64>,
    pub w2: DVector<f64>,
    pub delta1: DMatrix<f64>,
    pub delta2: DMatrix<f64>,
    pub lap0: DMatrix<f64>,
    pub lap1: DMatrix<f64>,
}

impl HodgeComplex {
    /// Assemble the complex of `mesh`.
    pub fn new(mesh: &SpatialMesh) -> Self {
        let d0 = mesh.incidence0().to_dense();
        let d1 = mesh.incidence1().to_dense();
        let w0 = DVector::from_vec(mesh.weights0());
        let w1 = DVector::from_vec(mesh.weights1());
        let w2 = DVector::from_vec(mesh.weights2());
        let delta1 = weighted_transpose(&d0, &w0, &w1);
        let delta2 = weighted_transpose(&d1, &w1, &w2);
        let lap0 = &delta1 * &d0;
        let lap1 = &d0 * &delta1 + &delta2 * &d1;
        Self { mesh: mesh.clone(), d0, d1, w0, w1, w2, delta1, delta2, lap0, lap1 }
    }

    /// Weight vector of degree `k`.
    pub fn weights(&self, k: usize) -> &DVector<f64> {
        match k {
            0 => &self.w0,
            1 => &self.w1,
            _ => &self.w2,
        }
    }

    /// Laplacian of degree `j` (0 or 1).
    pub fn laplacian(&self, j: usize) -> &DMatrix<f64> {
        if j == 0 {
            &self.lap0
        } else {
            &self.lap1
        }
    }

    /// `f^T W_k g` on raw coefficient vectors.
    pub fn dot(&self, k: usize, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        weighted_dot(self.weights(k), f, g)
    }

    /// Hodge inner product of two forms of the same degree.
    pub fn inner_product(&self, k: usize, f: &FormField, g: &FormField) -> Result<f64> {
        if f.degree != k || g.degree != k {
            return Err(LabError::DegreeMismatch(format!(
                "inner product of degree {k} called with degrees {} and {}",
                f.degree, g.degree
            )));
        }
        let n = self.mesh.n_cells(k);
        if f.values.len() != n || g.values.len() != n {
            return Err(LabError::LengthMismatch { what: "form coefficients", expected: n, got: f.values.len() });
        }
        Ok(self.dot(k, &f.values, &g.values))
    }

    /// Weighted norm of degree `k`.
    pub fn norm(&self, k: usize, f: &DVector<f64>) -> f64 {
        self.dot(k, f, f).max(0.0).sqrt()
    }

    /// Export a named matrix as `(row, col, value)` CSV lines of nonzero entries.
    pub fn to_csv(&self, name: &str) -> Option<String> {
        let m = match name {
            "d0" => &self.d0,
            "d1" => &self.d1,
            "delta1" => &self.delta1,
            "delta2" => &self.delta2,
            "lap0" => &self.lap0,
            "lap1" => &self.lap1,
            _ => return None,
        };
        let mut out = String::from("row,col,value\n");
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    out.push_str(&format!("{r},{c},{:e}\n", m[(r, c)]));
                }
            }
        }
        Some(out)
    }
}

/// `diag(w_lo)^{-1} d^T diag(w_hi)`.
pub(crate) fn weighted_transpose(d: &DMatrix<f64>, w_lo: &DVector<f64>, w_hi: &DVector<f64>) -> DMatrix<f64> {
    let mut t = d.transpose();
    for r in 0..t.nrows() {
        for c in 0..t.ncols() {
            t[(r, c)] *= w_hi[c] / w_lo[r];
        }
    }
    t
}

/// `sum_i w_i f_i g_i`.
pub(crate) fn weighted_dot(w: &DVector<f64>, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
    w.iter().zip(f.iter().zip(g.iter())).map(|(w, (a, b))| w * (a * b)).sum()
}

/// JSON description of a mesh: `{dim, sizes, spacing, metric}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub dim: usize,
    pub sizes: Vec<usize>,
    #[serde(default = "unit_spacing")]
    pub spacing: Spacing,
    #[serde(default)]
    pub metric: MetricJson,
}

fn unit_spacing() -> Spacing {
    Spacing::Uniform(1.0)
}

/// Spacing as a single number or a per-axis list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spacing {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

/// Metric as the word `"constant"` (unit metric), a number, or a per-edge table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricJson {
    Named(String),
    Value(f64),
    Table(Vec<f64>),
}

impl Default for MetricJson {
    fn default() -> Self {
        MetricJson::Named("constant".into())
    }
}

impl MeshSpec {
    /// Build the mesh described by this spec.
    pub fn build(&self) -> Result<SpatialMesh> {
        if self.sizes.len() != self.dim {
            return Err(LabError::LengthMismatch { what: "sizes", expected: self.dim, got: self.sizes.len() });
        }
        let spacing = match &self.spacing {
            Spacing::Uniform(h) => vec![*h],
            Spacing::PerAxis(v) => v.clone(),
        };
        let metric = match &self.metric {
            MetricJson::Named(s) if s == "constant" => MetricSpec::Constant(1.0),
            MetricJson::Named(s) => return Err(LabError::InvalidArgument(format!("unknown metric keyword {s:?}"))),
            MetricJson::Value(v) => MetricSpec::Constant(*v),
            MetricJson::Table(t) => MetricSpec::PerEdge(t.clone()),
        };
        SpatialMesh::new(&self.sizes, &spacing, &metric)
    }
}
