//! Spectral calculus of the Hodge Laplacians.
//!
//! The Laplacian `Δ` of degree `j` is self-adjoint for the weighted inner
//! product `<f, g> = f^T W g`. The plain symmetric matrix `W^{1/2} Δ W^{-1/2}`
//! is diagonalised with a dense solver and the eigenvectors are mapped back,
//! giving a `W`-orthonormal basis `V` with `Δ = V diag(λ) V^T W`.

use crate::error::{LabError, Result};
use crate::mesh::{FormField, HodgeComplex};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative threshold below which eigenvalues are set to zero.
pub const KERNEL_CLAMP: f64 = 1e-12;

/// Tolerance on the reconstruction residual accepted after decomposition.
const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Eigen-decomposition of one Laplacian together with a mass parameter.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub degree: usize,
    /// Nondecreasing, nonnegative eigenvalues.
    pub eigenvalues: DVector<f64>,
    /// Columns are `W`-orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    pub weights: DVector<f64>,
    pub mass_sq: f64,
}

impl Spectrum {
    /// Diagonalise the Laplacian of degree `j` of `complex`.
    pub fn new(complex: &HodgeComplex, j: usize, mass_sq: f64) -> Result<Self> {
        if j > 1 {
            return Err(LabError::DegreeMismatch(format!("spectra exist for degrees 0 and 1, not {j}")));
        }
        if !(mass_sq > 0.0 && mass_sq.is_finite()) {
            return Err(LabError::NonPositiveMass(mass_sq));
        }
        let w = complex.weights(j).clone();
        let sw: DVector<f64> = w.map(f64::sqrt);
        let lap = complex.laplacian(j);
        let n = lap.nrows();
        let mut s = DMatrix::from_fn(n, n, |r, c| sw[r] * lap[(r, c)] / sw[c]);
        s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let eigenvalues = DVector::from_iterator(
            n,
            order.iter().map(|&k| {
                let l = eig.eigenvalues[k];
                if l < KERNEL_CLAMP * top {
                    0.0
                } else {
                    l
                }
            }),
        );
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])] / sw[r]);
        let spec = Self { degree: j, eigenvalues, eigenvectors, weights: w, mass_sq };
        let res = spec.reconstruction_residual(lap);
        if !(res < RECONSTRUCTION_TOL) {
            return Err(LabError::EigenResidual(res));
        }
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `‖Δ − V diag(λ) V^T W‖_F / ‖Δ‖_F`.
    pub fn reconstruction_residual(&self, lap: &DMatrix<f64>) -> f64 {
        let rebuilt = self.function_matrix(|x| x - self.mass_sq);
        let scale = lap.norm().max(1.0);
        (lap - rebuilt).norm() / scale
    }

    /// Coefficients of `f` in the eigenbasis: `V^T W f`.
    pub fn coefficients(&self, f: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.tr_mul(&f.component_mul(&self.weights))
    }

    /// `V diag(fun(λ + m²)) V^T W f`.
    pub fn apply<F: Fn(f64) -> f64>(&self, fun: F, f: &DVector<f64>) -> DVector<f64> {
        let mut c = self.coefficients(f);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= fun(self.eigenvalues[k] + self.mass_sq);
        }
        &self.eigenvectors * c
    }

    /// Checked application on a form field.
    pub fn apply_function<F: Fn(f64) -> f64>(&self, fun: F, f: &FormField) -> Result<FormField> {
        if f.degree != self.degree {
            return Err(LabError::DegreeMismatch(format!(
                "spectrum of degree {} applied to a {}-form",
                self.degree, f.degree
            )));
        }
        if f.values.len() != self.len() {
            return Err(LabError::LengthMismatch { what: "form coefficients", expected: self.len(), got: f.values.len() });
        }
        for &l in self.eigenvalues.iter() {
            let v = fun(l + self.mass_sq);
            if !v.is_finite() {
                return Err(LabError::SpectralDomain(l + self.mass_sq));
            }
        }
        Ok(FormField { degree: self.degree, values: self.apply(fun, &f.values) })
    }

    /// `(Δ + m²)^alpha f`.
    pub fn power(&self, alpha: f64, f: &DVector<f64>) -> DVector<f64> {
        self.apply(|x| x.powf(alpha), f)
    }

    /// Dense matrix of `fun(Δ + m²)`.
    pub fn function_matrix<F: Fn(f64) -> f64>(&self, fun: F) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.len(), self.len(), |r, c| {
            self.eigenvectors[(r, c)] * fun(self.eigenvalues[c] + self.mass_sq)
        });
        let vtw = DMatrix::from_fn(self.len(), self.len(), |r, c| self.eigenvectors[(c, r)] * self.weights[c]);
        scaled * vtw
    }

    /// Eigenvalue table as CSV `index,eigenvalue`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (k, l) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{k},{l:.15e}\n"));
        }
        out
    }
}

/// Direction of an intertwining check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(Δ1+m²)^α d0` against `d0 (Δ0+m²)^α`.
    Exterior,
    /// `(Δ0+m²)^α δ1` against `δ1 (Δ1+m²)^α`.
    Co,
}

/// Relative mismatch of fractional powers across `d0` or `δ1`.
///
/// `j` must be 0: the only derivative whose target Laplacian is available.
pub fn intertwine_residual(
    complex: &HodgeComplex,
    j: usize,
    alpha: f64,
    mass_sq: f64,
    direction: Direction,
) -> Result<f64> {
    if j != 0 {
        return Err(LabError::DegreeMismatch(format!("intertwining is checked across d0 only, got j = {j}")));
    }
    let s0 = Spectrum::new(complex, 0, mass_sq)?;
    let s1 = Spectrum::new(complex, 1, mass_sq)?;
    Ok(intertwine_with(&s0, &s1, complex, alpha, direction))
}

/// Same as [`intertwine_residual`] with precomputed spectra.
pub fn intertwine_with(s0: &Spectrum, s1: &Spectrum, complex: &HodgeComplex, alpha: f64, direction: Direction) -> f64 {
    let f0 = s0.function_matrix(|x| x.powf(alpha));
    let f1 = s1.function_matrix(|x| x.powf(alpha));
    let (lhs, rhs) = match direction {
        Direction::Exterior => (&f1 * &complex.d0, &complex.d0 * &f0),
        Direction::Co => (&f0 * &complex.delta1, &complex.delta1 * &f1),
    };
    let scale = lhs.norm();
    if scale == 0.0 {
        return (lhs - rhs).norm();
    }
    (lhs - rhs).norm() / scale
}
