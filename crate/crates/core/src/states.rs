//! Quasifree states of the Proca field on an ultrastatic grid.
//!
//! The two-point function is `ω₂(f, f′) = μ(D G f, D G f′) + (i/2) σ(G f, G f′)`
//! where `G` is the causal propagator of `P`, `D` reads Cauchy data at the
//! central cut and `μ` is the ground-state covariance of the two
//! Klein–Gordon sectors. `σ(G f, G f′)` is evaluated as the spacetime
//! pairing `(G f | f′)`; the slice value is kept as a cross-check.
//!
//! Sign convention: with `G = G⁺ − G⁻` and `G⁺` future supported, the slice
//! symplectic form of two solutions satisfies `σ(Gf, Gf′) = (Gf | f′)`. The
//! commutator is therefore `ω₂(f,f′) − ω₂(f′,f) = i (G f | f′)`, and the
//! state has positive frequency: `ω₂(f_τ, f′) ∝ e^{−iωτ}` for a forward shift.

use crate::cauchy::{extract_data, symplectic_form, CauchyData, SliceSpectra, ETA};
use crate::error::{LabError, Result};
use crate::green::CausalPropagator;
use crate::spacetime::{smoothstep, OperatorKind, SpacetimeGrid};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::sync::Arc;

/// Ground-state covariance of the Proca field on an ultrastatic grid.
#[derive(Debug, Clone)]
pub struct QuasifreeState {
    grid: Arc<SpacetimeGrid>,
    spectra: SliceSpectra,
    reference: usize,
    proca: CausalPropagator,
    kg: CausalPropagator,
    /// `H_j^{+1}` and `H_j^{-1}` as dense matrices, per sector.
    h: [DMatrix<f64>; 2],
    h_inv: [DMatrix<f64>; 2],
}

/// Value of `ω₂` with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointReport {
    pub re: f64,
    pub im: f64,
    pub mu: f64,
    /// `σ(G f, G f′)` via the spacetime pairing `(G f | f′)`.
    pub sigma: f64,
    /// The same quantity from the Cauchy data at the reference cut.
    pub sigma_slice: f64,
    pub provenance: &'static str,
}

impl TwoPointReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A test section with its propagated solution and reference data.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub section: DVector<f64>,
    pub solution: DVector<f64>,
    pub data: CauchyData,
}

/// Complexified Klein–Gordon data `(a, π)` of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct KgData {
    pub a: DVector<Complex64>,
    pub pi: DVector<Complex64>,
}

impl KgData {
    pub fn from_real(a: &DVector<f64>, pi: &DVector<f64>) -> Self {
        Self { a: a.map(|x| Complex64::new(x, 0.0)), pi: pi.map(|x| Complex64::new(x, 0.0)) }
    }
}

/// Sign of a Klein–Gordon covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Positive,
    Negative,
}

/// Output of the positive-frequency diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencySpectrum {
    /// Angular frequencies in increasing order.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Correlation `c(τ)` at the offsets, as `(τ, re, im)`.
    pub correlation: Vec<(f64, f64, f64)>,
    /// Share of the magnitude carried by strictly negative frequencies.
    pub negative_ratio: f64,
    pub peak_frequency: f64,
}

impl FrequencySpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency,magnitude\n");
        for (f, m) in self.frequencies.iter().zip(&self.magnitudes) {
            out.push_str(&format!("{f:.12e},{m:.12e}\n"));
        }
        out
    }
}

fn hermitian_dot(w: &DVector<f64>, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    w.iter().zip(a.iter().zip(b.iter())).map(|(w, (x, y))| x.conj() * y * *w).sum()
}

impl QuasifreeState {
    /// Ground state on an ultrastatic grid with the reference cut after slice `nt / 2`.
    pub fn new(grid: Arc<SpacetimeGrid>) -> Result<Self> {
        if !grid.is_ultrastatic() {
            return Err(LabError::InvalidArgument("quasifree ground states need an ultrastatic grid".into()));
        }
        let reference = grid.nt() / 2;
        let spectra = SliceSpectra::new(grid.slice_complex(reference), grid.mass_sq())?;
        let proca = CausalPropagator::new(grid.clone(), OperatorKind::Proca)?;
        let kg = CausalPropagator::new(grid.clone(), OperatorKind::KleinGordon)?;
        let h = [spectra.s0.function_matrix(f64::sqrt), spectra.s1.function_matrix(f64::sqrt)];
        let h_inv = [spectra.s0.function_matrix(|x| 1.0 / x.sqrt()), spectra.s1.function_matrix(|x| 1.0 / x.sqrt())];
        Ok(Self { grid, spectra, reference, proca, kg, h, h_inv })
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn spectra(&self) -> &SliceSpectra {
        &self.spectra
    }

    pub fn propagator(&self) -> &CausalPropagator {
        &self.proca
    }

    /// Slice index whose following cut carries the reference data.
    pub fn reference_slice(&self) -> usize {
        self.reference
    }

    /// Cauchy data of a spacetime solution at the reference cut.
    pub fn data(&self, u: &DVector<f64>) -> Result<CauchyData> {
        extract_data(&self.grid, &self.spectra, u, self.reference)
    }

    fn sector_mu(&self, j: usize, a: &DVector<f64>, p: &DVector<f64>, b: &DVector<f64>, q: &DVector<f64>) -> f64 {
        let cx = &self.spectra.complex;
        0.5 * (cx.dot(j, p, &(&self.h_inv[j] * q)) + cx.dot(j, a, &(&self.h[j] * b)))
    }

    /// `μ` without admissibility checks.
    pub fn mu_unchecked(&self, x: &CauchyData, y: &CauchyData) -> f64 {
        let [a0, p0, a1, p1] = x.components();
        let [b0, q0, b1, q1] = y.components();
        ETA[0] * self.sector_mu(0, &a0, &p0, &b0, &q0) + ETA[1] * self.sector_mu(1, &a1, &p1, &b1, &q1)
    }

    /// Ground-state covariance on admissible data.
    pub fn mu_form(&self, x: &CauchyData, y: &CauchyData) -> Result<f64> {
        for d in [x, y] {
            if d.a0.len() != self.spectra.complex.mesh.n_nodes() || d.a1.len() != self.spectra.complex.mesh.n_edges() {
                return Err(LabError::LatticeMismatch("Cauchy data belong to another mesh".into()));
            }
            if !d.is_admissible() {
                return Err(LabError::Inadmissible { r1: d.r1, r2: d.r2, scale: d.scale });
            }
        }
        Ok(self.mu_unchecked(x, y))
    }

    /// Solve and read off data for a test section without support checks.
    pub fn prepare_unchecked(&self, f: &DVector<f64>) -> Result<Prepared> {
        let solution = self.proca.apply_unchecked(f)?;
        let data = self.data(&solution)?;
        Ok(Prepared { section: f.clone(), solution, data })
    }

    /// Solve and read off data; `f` must vanish on both margins.
    pub fn prepare(&self, f: &DVector<f64>) -> Result<Prepared> {
        if !self.grid.is_margined(f) {
            return Err(LabError::MarginViolation("test section reaches a margin"));
        }
        self.prepare_unchecked(f)
    }

    /// `ω₂` from prepared sections.
    pub fn two_point_prepared(&self, x: &Prepared, y: &Prepared) -> TwoPointReport {
        let mu = self.mu_unchecked(&x.data, &y.data);
        let sigma = self.grid.pairing_unchecked(&x.solution, &y.section);
        let sigma_slice = symplectic_form(&self.spectra.complex, &x.data, &y.data).unwrap_or(f64::NAN);
        TwoPointReport { re: mu, im: 0.5 * sigma, mu, sigma, sigma_slice, provenance: "pairing" }
    }

    /// `ω₂(f, f′)` for margined sections.
    pub fn two_point(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<TwoPointReport> {
        Ok(self.two_point_prepared(&self.prepare(f)?, &self.prepare(g)?))
    }

    /// `ω₂` without support checks.
    pub fn two_point_unchecked(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<Complex64> {
        Ok(self.two_point_prepared(&self.prepare_unchecked(f)?, &self.prepare_unchecked(g)?).value())
    }

    /// Klein–Gordon covariance `λ^±` of sector `j`, sesquilinear in complexified data.
    pub fn kg_covariance(&self, sign: Frequency, j: usize, x: &KgData, y: &KgData) -> Result<Complex64> {
        if j > 1 {
            return Err(LabError::DegreeMismatch(format!("Klein–Gordon sectors are 0 and 1, not {j}")));
        }
        let n = self.spectra.complex.mesh.n_cells(j);
        if [&x.a, &x.pi, &y.a, &y.pi].iter().any(|v| v.len() != n) {
            return Err(LabError::DegreeMismatch(format!("data of sector {j} must have {n} coefficients")));
        }
        let w = self.spectra.complex.weights(j);
        let hc = self.h[j].map(|v| Complex64::new(v, 0.0));
        let hic = self.h_inv[j].map(|v| Complex64::new(v, 0.0));
        let sym = hermitian_dot(w, &x.pi, &(&hic * &y.pi)) + hermitian_dot(w, &x.a, &(&hc * &y.a));
        let sigma = hermitian_dot(w, &x.a, &y.pi) - hermitian_dot(w, &x.pi, &y.a);
        let i_half = Complex64::new(0.0, 0.5);
        Ok(match sign {
            Frequency::Positive => sym * 0.5 + i_half * sigma,
            Frequency::Negative => sym * 0.5 - i_half * sigma,
        })
    }

    /// `W(f, g) = λ⁺₁ − λ⁺₀` on the data of `G_N f` and `G_N g`.
    pub fn kg_two_point(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<Complex64> {
        let df = self.data(&self.kg.apply_unchecked(f)?)?;
        let dg = self.data(&self.kg.apply_unchecked(g)?)?;
        let [fa0, fp0, fa1, fp1] = df.components();
        let [ga0, gp0, ga1, gp1] = dg.components();
        let l1 = self.kg_covariance(Frequency::Positive, 1, &KgData::from_real(&fa1, &fp1), &KgData::from_real(&ga1, &gp1))?;
        let l0 = self.kg_covariance(Frequency::Positive, 0, &KgData::from_real(&fa0, &fp0), &KgData::from_real(&ga0, &gp0))?;
        Ok(ETA[1] * l1 + ETA[0] * l0)
    }

    /// `(|ω₂(f,f′) − W(f, Q f′)|, scale)` with `scale = sqrt(ω₂(f,f) ω₂(f′,f′))`.
    pub fn fp_equivalence(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<(f64, f64)> {
        let pf = self.prepare(f)?;
        let pg = self.prepare(g)?;
        let omega = self.two_point_prepared(&pf, &pg).value();
        let qg = self.grid.q_operator().apply(g);
        let w = self.kg_two_point(f, &qg)?;
        let scale = (self.two_point_prepared(&pf, &pf).re * self.two_point_prepared(&pg, &pg).re).sqrt();
        Ok(((omega - w).norm(), scale))
    }

    /// `T f = P χ G f` with a smoothstep `χ` rising over the time window `[start, end]`.
    ///
    /// In exact arithmetic `T f` lives on the slices within two steps of the
    /// window; everything else (rounding residue of `P G f = 0` and the
    /// unenforced far-end rows) is discarded.
    pub fn localize(&self, f: &DVector<f64>, window: (f64, f64)) -> Result<DVector<f64>> {
        let g = &self.grid;
        let (start, end) = window;
        let first = (start / g.dt()).floor() - 2.0;
        let last = (end / g.dt()).ceil() + 2.0;
        if !(end > start && first >= g.margin() as f64 && last < (g.nt() - g.margin()) as f64) {
            return Err(LabError::InvalidArgument(format!(
                "localization window [{start}, {end}] plus two slices must lie between the margins"
            )));
        }
        let u = self.proca.apply(f)?;
        let chi = DVector::from_fn(g.n_dofs(), |i, _| {
            let (t, _) = crate::green::coefficient_location(g, i);
            smoothstep((t * g.dt() - start) / (end - start))
        });
        let t = g.proca().apply(&u.component_mul(&chi));
        Ok(t.component_mul(&g.slice_mask(first as usize, last as usize + 1)))
    }

    /// Shift a section forward by `tau` slices (negative shifts move it back).
    pub fn shift(&self, f: &DVector<f64>, tau: isize) -> Result<DVector<f64>> {
        let g = &self.grid;
        let stride = g.n_edges() + g.n_nodes();
        let mut out = DVector::zeros(f.len());
        for (i, &v) in f.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let j = i as isize + tau * stride as isize;
            if j < 0 || j as usize >= f.len() || g.is_temporal(i) && g.slice_of(j as usize) + 1 >= g.nt() {
                return Err(LabError::MarginViolation("shifted test section leaves the window between the margins"));
            }
            out[j as usize] = v;
        }
        if !g.is_margined(&out) {
            return Err(LabError::MarginViolation("shifted test section leaves the window between the margins"));
        }
        Ok(out)
    }

    /// Hann-windowed spectrum of `c(τ) = ω₂(f_τ, f′)` over `n_tau` offsets
    /// `τ = −n_tau/2 .. n_tau/2 − 1` slices, with transform `Σ w c e^{+iντ}`.
    pub fn positive_frequency_spectrum(&self, f: &DVector<f64>, g: &DVector<f64>, n_tau: usize) -> Result<FrequencySpectrum> {
        if n_tau < 4 || n_tau % 2 != 0 {
            return Err(LabError::InvalidArgument(format!("need an even number of offsets, got {n_tau}")));
        }
        let dt = self.grid.dt();
        let pg = self.prepare(g)?;
        let half = (n_tau / 2) as isize;
        let mut corr = Vec::with_capacity(n_tau);
        let mut buf = Vec::with_capacity(n_tau);
        for (j, tau) in (-half..half).enumerate() {
            let ft = self.shift(f, tau)?;
            let c = self.two_point_prepared(&self.prepare(&ft)?, &pg).value();
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / n_tau as f64).cos());
            corr.push((tau as f64 * dt, c.re, c.im));
            buf.push(c * w);
        }
        // The inverse transform carries e^{+2πi jm/N}, matching e^{+iντ}.
        FftPlanner::new().plan_fft_inverse(n_tau).process(&mut buf);
        let mut rows: Vec<(f64, f64)> = (0..n_tau)
            .map(|m| {
                let signed = if m < n_tau / 2 { m as isize } else { m as isize - n_tau as isize };
                (2.0 * std::f64::consts::PI * signed as f64 / (n_tau as f64 * dt), buf[m].norm())
            })
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = rows.iter().map(|r| r.1).sum();
        let negative: f64 = rows.iter().filter(|r| r.0 < 0.0).map(|r| r.1).sum();
        let peak = rows.iter().copied().fold((0.0, f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc }).0;
        Ok(FrequencySpectrum {
            frequencies: rows.iter().map(|r| r.0).collect(),
            magnitudes: rows.iter().map(|r| r.1).collect(),
            correlation: corr,
            negative_ratio: if total > 0.0 { negative / total } else { 0.0 },
            peak_frequency: peak,
        })
    }
}

/// Cauchy–Schwarz slack `4 μ(A,A) μ(B,B) − σ(A,B)²`.
pub fn cauchy_schwarz_slack(state: &QuasifreeState, a: &CauchyData, b: &CauchyData) -> Result<f64> {
    let s = symplectic_form(&state.spectra.complex, a, b)?;
    Ok(4.0 * state.mu_form(a, a)? * state.mu_form(b, b)? - s * s)
}

/// Smallest eigenvalue and spectral norm of a Hermitian matrix.
pub fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let n = m.nrows();
    // Real embedding [[Re, −Im], [Im, Re]] has the same eigenvalues, each doubled.
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let sym = (&big + big.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (min, norm)
}

/// Gram matrix `M_ab = ω₂(f_a, f_b)`.
pub fn gram<F: Fn(usize, usize) -> Result<Complex64>>(n: usize, omega: F) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] = omega(a, b)?;
        }
    }
    Ok(m)
}

/// Perfect matchings `{(i₁,i₂), …}` of `0..n` with `i_{2k−1} < i_{2k}`, in lexicographic order.
pub fn pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for (k, &partner) in tail.iter().enumerate() {
            let remaining: Vec<usize> = tail.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
            acc.push((first, partner));
            rec(&remaining, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        let idx: Vec<usize> = (0..n).collect();
        rec(&idx, &mut Vec::new(), &mut out);
    }
    out
}

/// Quasifree `n`-point value from a table of two-point values `w[i][j]`.
///
/// Odd `n` gives zero; even `n` sums the products over all perfect matchings.
pub fn wick_n_point(w: &DMatrix<Complex64>) -> Complex64 {
    let n = w.nrows();
    pairings(n).iter().map(|p| p.iter().map(|&(i, j)| w[(i, j)]).product::<Complex64>()).sum()
}

/// `ω′₂(f, h) = ω₂(R† f, R† h)` for a state transported along a Møller map.
#[derive(Debug, Clone)]
pub struct PulledBackState<'a> {
    pub state: &'a QuasifreeState,
    pub target: Arc<SpacetimeGrid>,
    pub adjoint: DMatrix<f64>,
}

impl<'a> PulledBackState<'a> {
    /// `adjoint` maps target sections to the state's grid.
    pub fn new(state: &'a QuasifreeState, target: Arc<SpacetimeGrid>, adjoint: DMatrix<f64>) -> Result<Self> {
        if adjoint.nrows() != state.grid.n_dofs() || adjoint.ncols() != target.n_dofs() || !target.compatible(&state.grid) {
            return Err(LabError::LatticeMismatch("pullback map does not end on the state's grid".into()));
        }
        Ok(Self { state, target, adjoint })
    }

    pub fn prepare(&self, f: &DVector<f64>) -> Result<Prepared> {
        if !self.target.is_margined(f) {
            return Err(LabError::MarginViolation("test section reaches a margin"));
        }
        self.state.prepare_unchecked(&(&self.adjoint * f))
    }

    pub fn two_point_prepared(&self, x: &Prepared, y: &Prepared) -> Complex64 {
        self.state.two_point_prepared(x, y).value()
    }

    pub fn two_point(&self, f: &DVector<f64>, h: &DVector<f64>) -> Result<Complex64> {
        Ok(self.two_point_prepared(&self.prepare(f)?, &self.prepare(h)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matchings_count_and_order() {
        assert_eq!(pairings(1).len(), 0);
        assert_eq!(pairings(2), vec![vec![(0, 1)]]);
        assert_eq!(pairings(4), vec![vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]);
        assert_eq!(pairings(6).len(), 15);
    }

    #[test]
    fn odd_wick_vanishes() {
        let w = DMatrix::from_element(3, 3, Complex64::new(1.0, 2.0));
        assert_eq!(wick_n_point(&w), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn real_embedding_recovers_hermitian_spectrum() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ]);
        let (min, norm) = hermitian_extremes(&m);
        assert!((min - 1.0).abs() < 1e-14 && (norm - 3.0).abs() < 1e-14);
    }
}
