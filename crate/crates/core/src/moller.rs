//! Møller maps between grids whose spatial metrics are interpolated in time.
//!
//! For grids `g₀` and `g_χ` that agree before the interpolation window,
//!
//! ```text
//! R₊ = κ_{χ0} − G⁺_χ (P_χ κ_{χ0} − κ_{χ0} P₀)
//! R₋ = κ_{1χ} − G⁻_1 (P₁ κ_{1χ} − κ_{1χ} P_χ)
//! ```
//!
//! and `R = R₋ R₊`. Every map is stored as a dense matrix over section
//! coefficients together with its inverse, which has the same shape with
//! the roles of the two grids exchanged.

use crate::error::{LabError, Result};
use crate::green::{Causality, GreenSolver};
use crate::spacetime::{adjoint, adjoint_dense, OperatorKind, SpacetimeGrid};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Which elementary map a chain step is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Plus,
    Minus,
}

/// A materialized Møller map from `source` sections to `target` sections.
#[derive(Debug, Clone)]
pub struct MollerOperator {
    pub source: Arc<SpacetimeGrid>,
    pub target: Arc<SpacetimeGrid>,
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub steps: Vec<StepKind>,
}

fn check_pair(a: &SpacetimeGrid, b: &SpacetimeGrid) -> Result<()> {
    if !a.compatible(b) || a.mass_sq() != b.mass_sq() {
        return Err(LabError::LatticeMismatch("Møller map between incompatible grids".into()));
    }
    Ok(())
}

fn static_equal(a: &SpacetimeGrid, b: &SpacetimeGrid, slices: impl Iterator<Item = usize>) -> bool {
    slices.into_iter().all(|k| {
        a.slice(k).mesh.edge_metric() == b.slice(k).mesh.edge_metric()
            && (k + 1 >= a.nt() || a.half(k).mesh.edge_metric() == b.half(k).mesh.edge_metric())
    })
}

/// `κ_{to,from} − G(P_to κ − κ P_from)`, built column by column.
fn elementary(
    from: &Arc<SpacetimeGrid>,
    to: &Arc<SpacetimeGrid>,
    solver_grid: &Arc<SpacetimeGrid>,
    causality: Causality,
) -> Result<DMatrix<f64>> {
    let kappa = from.fiber_isometry(to)?.matrix;
    let p_from = from.proca().matrix;
    let p_to = to.proca().matrix;
    let commutator = p_to.mul(&kappa).add(1.0, &kappa.mul(&p_from), -1.0);
    let green = GreenSolver::new(solver_grid.clone(), OperatorKind::Proca, causality)?;
    let n = from.n_dofs();
    let mut out = kappa.to_dense();
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        let src = commutator.mul_vec(&e);
        if src.iter().any(|v| *v != 0.0) {
            let col = green.solve_unchecked(&src)?;
            let mut c = out.column_mut(j);
            c -= col;
        }
        e[j] = 0.0;
    }
    Ok(out)
}

impl MollerOperator {
    /// `R₊` from `grid0` to `grid_chi`; the grids must agree on the past margin.
    pub fn plus(grid0: &Arc<SpacetimeGrid>, grid_chi: &Arc<SpacetimeGrid>) -> Result<Self> {
        check_pair(grid0, grid_chi)?;
        if !static_equal(grid0, grid_chi, 0..grid0.margin()) {
            return Err(LabError::LatticeMismatch("interpolated grid differs from the source in the past margin".into()));
        }
        let matrix = elementary(grid0, grid_chi, grid_chi, Causality::Retarded)?;
        let inverse = elementary(grid_chi, grid0, grid0, Causality::Retarded)?;
        Ok(Self { source: grid0.clone(), target: grid_chi.clone(), matrix, inverse, steps: vec![StepKind::Plus] })
    }

    /// `R₋` from `grid_chi` to `grid1`; the grids must agree on the future margin.
    pub fn minus(grid_chi: &Arc<SpacetimeGrid>, grid1: &Arc<SpacetimeGrid>) -> Result<Self> {
        check_pair(grid_chi, grid1)?;
        let nt = grid1.nt();
        if !static_equal(grid_chi, grid1, nt - grid1.margin()..nt) {
            return Err(LabError::LatticeMismatch("interpolated grid differs from the target in the future margin".into()));
        }
        let matrix = elementary(grid_chi, grid1, grid1, Causality::Advanced)?;
        let inverse = elementary(grid1, grid_chi, grid_chi, Causality::Advanced)?;
        Ok(Self { source: grid_chi.clone(), target: grid1.clone(), matrix, inverse, steps: vec![StepKind::Minus] })
    }

    /// `R = R₋ R₊` through the interpolating grid.
    pub fn full(grid0: &Arc<SpacetimeGrid>, grid_chi: &Arc<SpacetimeGrid>, grid1: &Arc<SpacetimeGrid>) -> Result<Self> {
        let plus = Self::plus(grid0, grid_chi)?;
        let minus = Self::minus(grid_chi, grid1)?;
        Self::compose(grid0, vec![plus, minus])
    }

    /// Identity map of one grid.
    pub fn identity(grid: &Arc<SpacetimeGrid>) -> Self {
        let n = grid.n_dofs();
        Self {
            source: grid.clone(),
            target: grid.clone(),
            matrix: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
            steps: Vec::new(),
        }
    }

    /// Compose `steps` in application order; an empty chain is the identity of `grid`.
    pub fn compose(grid: &Arc<SpacetimeGrid>, steps: Vec<MollerOperator>) -> Result<Self> {
        let mut iter = steps.into_iter();
        let Some(mut acc) = iter.next() else {
            return Ok(Self::identity(grid));
        };
        if !Arc::ptr_eq(&acc.source, grid) && !acc.source.compatible(grid) {
            return Err(LabError::LatticeMismatch("chain does not start on the given grid".into()));
        }
        for next in iter {
            let joined = Arc::ptr_eq(&acc.target, &next.source)
                || (acc.target.compatible(&next.source) && static_equal(&acc.target, &next.source, 0..acc.target.nt()));
            if !joined {
                return Err(LabError::LatticeMismatch("consecutive Møller steps do not share a grid".into()));
            }
            acc = Self {
                source: acc.source,
                target: next.target,
                matrix: &next.matrix * &acc.matrix,
                inverse: &acc.inverse * &next.inverse,
                steps: acc.steps.into_iter().chain(next.steps).collect(),
            };
        }
        Ok(acc)
    }

    pub fn apply(&self, f: &DVector<f64>) -> DVector<f64> {
        &self.matrix * f
    }

    pub fn apply_inverse(&self, f: &DVector<f64>) -> DVector<f64> {
        &self.inverse * f
    }

    /// Materialized adjoint `R†`, mapping target sections to source sections.
    pub fn adjoint(&self) -> Result<DMatrix<f64>> {
        adjoint_dense(&self.matrix, &self.source, &self.target)
    }

    /// Materialized adjoint of the inverse.
    pub fn inverse_adjoint(&self) -> Result<DMatrix<f64>> {
        adjoint_dense(&self.inverse, &self.target, &self.source)
    }
}

/// Closed form `P₀ κ_{χ0}† G⁻_χ h` of the adjoint of `R₊`.
pub fn plus_adjoint_closed_form(
    grid0: &Arc<SpacetimeGrid>,
    grid_chi: &Arc<SpacetimeGrid>,
    h: &DVector<f64>,
) -> Result<DVector<f64>> {
    let kappa = grid0.fiber_isometry(grid_chi)?.matrix;
    let kappa_adj = adjoint(&kappa, grid0, grid_chi)?;
    let adv = GreenSolver::new(grid_chi.clone(), OperatorKind::Proca, Causality::Advanced)?;
    let u = adv.solve_unchecked(h)?;
    Ok(grid0.proca().matrix.mul_vec(&kappa_adj.mul_vec(&u)))
}
