//! Constrained Cauchy data on one spatial slice.
//!
//! Data are `(a⁰, π⁰, a¹, π¹)` with the two constraints
//!
//! ```text
//! π⁰ + δ a¹ = 0,        (Δ₀ + m²) a⁰ − δ π¹ = 0.
//! ```
//!
//! Ultrastatic evolution runs each sector as a Klein–Gordon oscillator with
//! frequency `H_j = (Δ_j + m²)^{1/2}`. The bridge [`extract_data`] reads
//! data off a discrete spacetime solution at a cut between two slices.

use crate::error::{LabError, Result};
use crate::mesh::HodgeComplex;
use crate::spacetime::SpacetimeGrid;
use crate::spectral::Spectrum;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Relative constraint tolerance for the admissibility flag.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Sector signs of the split symplectic form and energy.
pub const ETA: [f64; 2] = [-1.0, 1.0];

/// Hodge complex of one slice with both spectra.
#[derive(Debug, Clone)]
pub struct SliceSpectra {
    pub complex: HodgeComplex,
    pub s0: Spectrum,
    pub s1: Spectrum,
}

impl SliceSpectra {
    pub fn new(complex: HodgeComplex, mass_sq: f64) -> Result<Self> {
        let s0 = Spectrum::new(&complex, 0, mass_sq)?;
        let s1 = Spectrum::new(&complex, 1, mass_sq)?;
        Ok(Self { complex, s0, s1 })
    }

    pub fn mass_sq(&self) -> f64 {
        self.s0.mass_sq
    }

    pub fn spectrum(&self, j: usize) -> &Spectrum {
        if j == 0 {
            &self.s0
        } else {
            &self.s1
        }
    }
}

/// One set of Cauchy data with its constraint residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyData {
    pub a0: Vec<f64>,
    pub pi0: Vec<f64>,
    pub a1: Vec<f64>,
    pub pi1: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
    pub scale: f64,
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl CauchyData {
    /// Wrap components and evaluate the constraints.
    pub fn new(
        cx: &HodgeComplex,
        mass_sq: f64,
        a0: DVector<f64>,
        pi0: DVector<f64>,
        a1: DVector<f64>,
        pi1: DVector<f64>,
    ) -> Result<Self> {
        let (nv, ne) = (cx.mesh.n_nodes(), cx.mesh.n_edges());
        for (what, v, n) in [("a0", &a0, nv), ("pi0", &pi0, nv), ("a1", &a1, ne), ("pi1", &pi1, ne)] {
            if v.len() != n {
                return Err(LabError::LengthMismatch { what, expected: n, got: v.len() });
            }
        }
        let c1 = &pi0 + &cx.delta1 * &a1;
        let c2 = &cx.lap0 * &a0 + &a0 * mass_sq - &cx.delta1 * &pi1;
        let scale = [cx.norm(0, &a0), cx.norm(0, &pi0), cx.norm(1, &a1), cx.norm(1, &pi1)]
            .into_iter()
            .fold(1e-300, f64::max);
        Ok(Self {
            r1: cx.norm(0, &c1),
            r2: cx.norm(0, &c2),
            scale,
            a0: a0.as_slice().to_vec(),
            pi0: pi0.as_slice().to_vec(),
            a1: a1.as_slice().to_vec(),
            pi1: pi1.as_slice().to_vec(),
        })
    }

    /// Zero data on a complex.
    pub fn zeros(cx: &HodgeComplex) -> Self {
        let (nv, ne) = (cx.mesh.n_nodes(), cx.mesh.n_edges());
        Self {
            a0: vec![0.0; nv],
            pi0: vec![0.0; nv],
            a1: vec![0.0; ne],
            pi1: vec![0.0; ne],
            r1: 0.0,
            r2: 0.0,
            scale: 1e-300,
        }
    }

    /// Both constraint residuals below `1e-9 · scale`.
    pub fn is_admissible(&self) -> bool {
        self.r1 < ADMISSIBLE_TOL * self.scale && self.r2 < ADMISSIBLE_TOL * self.scale
    }

    /// Largest relative constraint residual.
    pub fn relative_residual(&self) -> f64 {
        self.r1.max(self.r2) / self.scale
    }

    fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(LabError::Inadmissible { r1: self.r1, r2: self.r2, scale: self.scale })
        }
    }

    fn check_mesh(&self, cx: &HodgeComplex) -> Result<()> {
        if self.a0.len() != cx.mesh.n_nodes() || self.a1.len() != cx.mesh.n_edges() {
            return Err(LabError::LatticeMismatch("Cauchy data belong to another mesh".into()));
        }
        Ok(())
    }

    pub fn components(&self) -> [DVector<f64>; 4] {
        [dv(&self.a0), dv(&self.pi0), dv(&self.a1), dv(&self.pi1)]
    }

    /// Flatten as `[a0, pi0, a1, pi1]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let v: Vec<f64> = self.a0.iter().chain(&self.pi0).chain(&self.a1).chain(&self.pi1).copied().collect();
        DVector::from_vec(v)
    }

    /// Inverse of [`CauchyData::to_vector`].
    pub fn from_vector(cx: &HodgeComplex, mass_sq: f64, v: &DVector<f64>) -> Result<Self> {
        let (nv, ne) = (cx.mesh.n_nodes(), cx.mesh.n_edges());
        if v.len() != 2 * (nv + ne) {
            return Err(LabError::LengthMismatch { what: "flattened data", expected: 2 * (nv + ne), got: v.len() });
        }
        Self::new(
            cx,
            mass_sq,
            v.rows(0, nv).into_owned(),
            v.rows(nv, nv).into_owned(),
            v.rows(2 * nv, ne).into_owned(),
            v.rows(2 * nv + ne, ne).into_owned(),
        )
    }
}

/// Admissible data generated from `(f1, f2, a1)`.
///
/// `f2` must be `None` on one-dimensional meshes.
pub fn make_constrained(
    cx: &HodgeComplex,
    mass_sq: f64,
    f1: &DVector<f64>,
    f2: Option<&DVector<f64>>,
    a1: &DVector<f64>,
) -> Result<CauchyData> {
    let ne = cx.mesh.n_edges();
    if f1.len() != ne || a1.len() != ne {
        return Err(LabError::LengthMismatch { what: "generator 1-form", expected: ne, got: f1.len().min(a1.len()) });
    }
    let mut pi1 = &cx.lap1 * f1 + f1 * mass_sq;
    match (f2, cx.mesh.dim()) {
        (Some(f2), 2) => {
            if f2.len() != cx.mesh.n_faces() {
                return Err(LabError::LengthMismatch { what: "generator 2-form", expected: cx.mesh.n_faces(), got: f2.len() });
            }
            pi1 += &cx.delta2 * f2;
        }
        (Some(_), _) => return Err(LabError::DegreeMismatch("2-form generator on a one-dimensional mesh".into())),
        (None, _) => {}
    }
    let a0 = &cx.delta1 * f1;
    let pi0 = -(&cx.delta1 * a1);
    CauchyData::new(cx, mass_sq, a0, pi0, a1.clone(), pi1)
}

/// Exact evolution by time `t` on an ultrastatic slice.
pub fn evolve_ultrastatic(data: &CauchyData, t: f64, sp: &SliceSpectra) -> Result<CauchyData> {
    data.check_mesh(&sp.complex)?;
    data.require_admissible()?;
    if t == 0.0 {
        return Ok(data.clone());
    }
    let [a0, pi0, a1, pi1] = data.components();
    let flow = |s: &Spectrum, a: &DVector<f64>, p: &DVector<f64>| {
        let a_t = s.apply(|x| (t * x.sqrt()).cos(), a) + s.apply(|x| (t * x.sqrt()).sin() / x.sqrt(), p);
        let p_t = s.apply(|x| -x.sqrt() * (t * x.sqrt()).sin(), a) + s.apply(|x| (t * x.sqrt()).cos(), p);
        (a_t, p_t)
    };
    let (a0t, pi0t) = flow(&sp.s0, &a0, &pi0);
    let (a1t, pi1t) = flow(&sp.s1, &a1, &pi1);
    CauchyData::new(&sp.complex, sp.mass_sq(), a0t, pi0t, a1t, pi1t)
}

/// Symplectic form in field-strength form:
/// `⟨a¹, π¹′ − d a⁰′⟩ − ⟨a¹′, π¹ − d a⁰⟩`.
pub fn symplectic_form(cx: &HodgeComplex, a: &CauchyData, b: &CauchyData) -> Result<f64> {
    a.check_mesh(cx)?;
    b.check_mesh(cx)?;
    let [a0, _, a1, pi1] = a.components();
    let [b0, _, b1, qi1] = b.components();
    let ea = pi1 - &cx.d0 * a0;
    let eb = qi1 - &cx.d0 * b0;
    Ok(cx.dot(1, &a1, &eb) - cx.dot(1, &b1, &ea))
}

/// Symplectic form split by sectors with signs [`ETA`].
pub fn symplectic_form_split(cx: &HodgeComplex, a: &CauchyData, b: &CauchyData) -> Result<f64> {
    a.check_mesh(cx)?;
    b.check_mesh(cx)?;
    let [a0, p0, a1, p1] = a.components();
    let [b0, q0, b1, q1] = b.components();
    let s0 = cx.dot(0, &a0, &q0) - cx.dot(0, &b0, &p0);
    let s1 = cx.dot(1, &a1, &q1) - cx.dot(1, &b1, &p1);
    Ok(ETA[0] * s0 + ETA[1] * s1)
}

/// Energy in density form and in split spectral form; requires admissible data.
pub fn energy(sp: &SliceSpectra, data: &CauchyData) -> Result<(f64, f64)> {
    data.require_admissible()?;
    Ok(energy_unchecked(sp, data))
}

/// Both energy functionals without the admissibility check.
pub fn energy_unchecked(sp: &SliceSpectra, data: &CauchyData) -> (f64, f64) {
    let cx = &sp.complex;
    let m2 = sp.mass_sq();
    let [a0, p0, a1, p1] = data.components();
    let e = &p1 - &cx.d0 * &a0;
    let mut density = cx.dot(1, &e, &e) + m2 * (cx.dot(1, &a1, &a1) + cx.dot(0, &a0, &a0));
    if cx.mesh.dim() == 2 {
        let b = &cx.d1 * &a1;
        density += cx.dot(2, &b, &b);
    }
    let sector = |j: usize, a: &DVector<f64>, p: &DVector<f64>| {
        let la = cx.laplacian(j) * a + a * m2;
        cx.dot(j, p, p) + cx.dot(j, a, &la)
    };
    let spectral = ETA[0] * sector(0, &a0, &p0) + ETA[1] * sector(1, &a1, &p1);
    (0.5 * density, 0.5 * spectral)
}

/// Admissible data spanning the constraint surface: images of the unit generators.
pub fn spanning_set(cx: &HodgeComplex, mass_sq: f64) -> Result<Vec<CauchyData>> {
    let ne = cx.mesh.n_edges();
    let nf = if cx.mesh.dim() == 2 { cx.mesh.n_faces() } else { 0 };
    let zero1 = DVector::zeros(ne);
    let mut out = Vec::with_capacity(2 * ne + nf);
    for i in 0..ne {
        let mut e = DVector::zeros(ne);
        e[i] = 1.0;
        let f2 = (nf > 0).then(|| DVector::zeros(nf));
        out.push(make_constrained(cx, mass_sq, &e, f2.as_ref(), &zero1)?);
        out.push(make_constrained(cx, mass_sq, &zero1, f2.as_ref(), &e)?);
    }
    for i in 0..nf {
        let mut f2 = DVector::zeros(nf);
        f2[i] = 1.0;
        out.push(make_constrained(cx, mass_sq, &zero1, Some(&f2), &zero1)?);
    }
    Ok(out)
}

/// Numerical rank of the span of the generators and of `σ` restricted to it.
///
/// Returns `(dimension of span, rank of σ on the span)`.
pub fn symplectic_rank(cx: &HodgeComplex, mass_sq: f64, threshold: f64) -> Result<(usize, usize)> {
    let set = spanning_set(cx, mass_sq)?;
    let cols: Vec<DVector<f64>> = set.iter().map(CauchyData::to_vector).collect();
    let span = DMatrix::from_columns(&cols);
    let svd = span.svd(true, false);
    let top = svd.singular_values.max();
    let u = svd.u.expect("left singular vectors requested");
    let basis: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > threshold * top).collect();
    let data: Vec<CauchyData> = basis
        .iter()
        .map(|&i| CauchyData::from_vector(cx, mass_sq, &u.column(i).into_owned()))
        .collect::<Result<_>>()?;
    let r = data.len();
    let mut gram = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram[(i, j)] = symplectic_form(cx, &data[i], &data[j])?;
        }
    }
    let sv = gram.singular_values();
    let gtop = sv.max();
    let rank = sv.iter().filter(|&&s| s > threshold * gtop).count();
    Ok((r, rank))
}

/// `(1 − dt²(Δ + m²)/4)^{p/2}` applied spectrally: the dispersion filter of the leapfrog scheme.
fn dispersion(s: &Spectrum, dt: f64, p: f64, f: &DVector<f64>) -> DVector<f64> {
    s.apply(|x| (1.0 - 0.25 * dt * dt * x).powf(0.5 * p), f)
}

/// Cauchy data of a spacetime solution at the cut between slices `k` and `k+1`.
///
/// Slices `k − 1 ..= k + 2` must share one metric. Configuration values are
/// time averages, momenta are time differences, and the dispersion filter
/// `K = (1 − dt²(Δ + m²)/4)^{1/2}` is folded in so that discrete solutions map
/// to exactly admissible data whose symplectic form matches the spacetime one.
pub fn extract_data(grid: &SpacetimeGrid, sp: &SliceSpectra, u: &DVector<f64>, k: usize) -> Result<CauchyData> {
    if k == 0 || k + 2 >= grid.nt() {
        return Err(LabError::InvalidArgument(format!("cut after slice {k} needs two neighbours on each side")));
    }
    let h = sp.complex.mesh.edge_metric();
    if (k - 1..=k + 2).any(|j| grid.slice(j).mesh.edge_metric() != h) || !sp.complex.mesh.same_lattice(grid.base_mesh()) {
        return Err(LabError::LatticeMismatch("extraction slices must carry the spectra's metric".into()));
    }
    let dt = grid.dt();
    let (u1k, u1n) = (grid.a1(u, k), grid.a1(u, k + 1));
    let p0 = |j: usize| grid.a0(u, j) / dt;
    let a1 = dispersion(&sp.s1, dt, -0.5, &((&u1k + &u1n) * 0.5));
    let pi1 = dispersion(&sp.s1, dt, 0.5, &((&u1n - &u1k) / dt));
    let a0 = dispersion(&sp.s0, dt, 0.5, &p0(k));
    let pi0 = dispersion(&sp.s0, dt, -0.5, &((p0(k + 1) - p0(k - 1)) / (2.0 * dt)));
    CauchyData::new(&sp.complex, sp.mass_sq(), a0, pi0, a1, pi1)
}

/// Spacetime symplectic flux through the cut between slices `k` and `k+1`.
///
/// Uses the temporal face values `F = A¹_{k+1} − A¹_k − d A⁰_{k+½}` and slice
/// averages `(A¹_k + A¹_{k+1}) / 2`; for two discrete solutions it does not
/// depend on `k`.
pub fn cut_flux(grid: &SpacetimeGrid, u: &DVector<f64>, v: &DVector<f64>, k: usize) -> f64 {
    let dt = grid.dt();
    let half = grid.half(k);
    let d0 = grid.base_mesh().incidence0();
    let field = |w: &DVector<f64>| (grid.a1(w, k + 1) - grid.a1(w, k) - d0.mul_vec(&grid.a0(w, k))) / dt;
    let avg = |w: &DVector<f64>| (grid.a1(w, k) + grid.a1(w, k + 1)) * 0.5;
    let dot = |x: &DVector<f64>, y: &DVector<f64>| half.w1.iter().zip(x.iter().zip(y.iter())).map(|(w, (a, b))| w * a * b).sum::<f64>();
    dot(&field(u), &avg(v)) - dot(&avg(u), &field(v))
}
