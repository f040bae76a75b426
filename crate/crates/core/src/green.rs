//! Retarded and advanced inverses of `N` and `P` by causal block substitution.
//!
//! Each operator couples coefficients at most one slice apart. A time block
//! collects the unknowns that become determined when one more row group is
//! enforced. Walking forward (retarded) or backward (advanced) through the
//! blocks gives a solution with zero Cauchy data on the starting end. The
//! diagonal blocks are small dense matrices factorised once.
//!
//! Because the window is finite, the rows of the far end are never
//! enforced, so identities such as `P G f = f` hold on every row except
//! the last [`crate::spacetime::BOUNDARY_LAYERS`] slices of the far end.

use crate::error::{LabError, Result};
use crate::spacetime::{OperatorHandle, OperatorKind, SpacetimeGrid};
use nalgebra::{DMatrix, DVector, Dyn, LU};
use std::sync::Arc;

/// Temporal orientation of a Green operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causality {
    /// Supported in the causal future of the source (`G⁺`).
    Retarded,
    /// Supported in the causal past of the source (`G⁻`).
    Advanced,
}

#[derive(Debug, Clone)]
struct Block {
    unknowns: Vec<usize>,
    rows: Vec<usize>,
    lu: LU<f64, Dyn, Dyn>,
}

/// Factorised causal inverse of a spacetime operator.
#[derive(Debug, Clone)]
pub struct GreenSolver {
    grid: Arc<SpacetimeGrid>,
    operator: OperatorHandle,
    causality: Causality,
    blocks: Vec<Block>,
    excluded: Vec<usize>,
    dropped: Vec<usize>,
}

impl GreenSolver {
    /// Build the solver of `N` or `P` on `grid`.
    pub fn new(grid: Arc<SpacetimeGrid>, kind: OperatorKind, causality: Causality) -> Result<Self> {
        grid.check_stability()?;
        let operator = match kind {
            OperatorKind::Proca => grid.proca(),
            OperatorKind::KleinGordon => grid.klein_gordon(),
            _ => return Err(LabError::InvalidArgument(format!("no causal inverse for {kind:?}"))),
        };
        let nt = grid.nt();
        let a1 = |k: usize| (0..grid.n_edges()).map(|e| grid.a1_index(k, e)).collect::<Vec<_>>();
        let a0 = |k: usize| (0..grid.n_nodes()).map(|v| grid.a0_index(k, v)).collect::<Vec<_>>();
        let cat = |a: Vec<usize>, b: Vec<usize>| a.into_iter().chain(b).collect::<Vec<_>>();
        // (unknowns, rows) per block, plus never-solved unknowns and never-enforced rows.
        let mut plan: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let (excluded, dropped);
        match (kind, causality) {
            (OperatorKind::Proca, Causality::Retarded) => {
                for k in 1..nt {
                    plan.push((cat(a1(k), a0(k - 1)), cat(a1(k - 1), a0(k - 1))));
                }
                excluded = a1(0);
                dropped = a1(nt - 1);
            }
            (OperatorKind::Proca, Causality::Advanced) => {
                for k in (0..nt - 1).rev() {
                    plan.push((cat(a1(k), a0(k)), cat(a1(k + 1), a0(k))));
                }
                excluded = a1(nt - 1);
                dropped = a1(0);
            }
            (_, Causality::Retarded) => {
                for k in 1..nt {
                    if k + 1 < nt {
                        plan.push((cat(a1(k), a0(k)), cat(a1(k - 1), a0(k - 1))));
                    } else {
                        plan.push((a1(k), a1(k - 1)));
                    }
                }
                excluded = cat(a1(0), a0(0));
                dropped = cat(a1(nt - 1), a0(nt - 2));
            }
            (_, Causality::Advanced) => {
                for k in (0..nt - 1).rev() {
                    if k >= 1 {
                        plan.push((cat(a1(k), a0(k - 1)), cat(a1(k + 1), a0(k))));
                    } else {
                        plan.push((a1(0), a1(1)));
                    }
                }
                excluded = cat(a1(nt - 1), a0(nt - 2));
                dropped = cat(a1(0), a0(0));
            }
        }
        let m = &operator.matrix;
        let mut known = vec![false; grid.n_dofs()];
        for &c in &excluded {
            known[c] = true;
        }
        let mut blocks = Vec::with_capacity(plan.len());
        for (index, (unknowns, rows)) in plan.into_iter().enumerate() {
            for &u in &unknowns {
                known[u] = true;
            }
            let mut local = vec![usize::MAX; grid.n_dofs()];
            for (j, &u) in unknowns.iter().enumerate() {
                local[u] = j;
            }
            let mut dense = DMatrix::zeros(rows.len(), unknowns.len());
            for (i, &r) in rows.iter().enumerate() {
                for (c, v) in m.row(r) {
                    if !known[c] {
                        return Err(LabError::InvalidArgument(format!(
                            "row {r} of block {index} reaches an unsolved coefficient {c}"
                        )));
                    }
                    if local[c] != usize::MAX {
                        dense[(i, local[c])] = v;
                    }
                }
            }
            let lu = dense.lu();
            if !lu.is_invertible() {
                return Err(LabError::SingularBlock(index));
            }
            blocks.push(Block { unknowns, rows, lu });
        }
        Ok(Self { grid, operator, causality, blocks, excluded, dropped })
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn operator(&self) -> &OperatorHandle {
        &self.operator
    }

    pub fn causality(&self) -> Causality {
        self.causality
    }

    /// Rows that the substitution never enforces.
    pub fn dropped_rows(&self) -> &[usize] {
        &self.dropped
    }

    /// Causal solve; `f` must vanish on the starting margin.
    pub fn solve(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        let ok = match self.causality {
            Causality::Retarded => self.grid.vanishes_in_past_margin(f),
            Causality::Advanced => self.grid.vanishes_in_future_margin(f),
        };
        if !ok {
            return Err(LabError::MarginViolation(match self.causality {
                Causality::Retarded => "source reaches the past margin",
                Causality::Advanced => "source reaches the future margin",
            }));
        }
        self.solve_unchecked(f)
    }

    /// Causal solve without support checks.
    pub fn solve_unchecked(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        if f.len() != self.grid.n_dofs() {
            return Err(LabError::LengthMismatch { what: "section", expected: self.grid.n_dofs(), got: f.len() });
        }
        let m = &self.operator.matrix;
        let mut x = DVector::zeros(f.len());
        for b in &self.blocks {
            let rhs = DVector::from_iterator(
                b.rows.len(),
                b.rows.iter().map(|&r| f[r] - m.row(r).map(|(c, v)| v * x[c]).sum::<f64>()),
            );
            let sol = b.lu.solve(&rhs).ok_or(LabError::SingularBlock(0))?;
            for (&u, s) in b.unknowns.iter().zip(sol.iter()) {
                x[u] = *s;
            }
        }
        Ok(x)
    }

    /// Independent solve of the same square subsystem with one dense LU.
    pub fn dense_solve(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.grid.n_dofs();
        let mut skip_col = vec![false; n];
        let mut skip_row = vec![false; n];
        for &c in &self.excluded {
            skip_col[c] = true;
        }
        for &r in &self.dropped {
            skip_row[r] = true;
        }
        let cols: Vec<usize> = (0..n).filter(|&c| !skip_col[c]).collect();
        let rows: Vec<usize> = (0..n).filter(|&r| !skip_row[r]).collect();
        let mut local = vec![usize::MAX; n];
        for (j, &c) in cols.iter().enumerate() {
            local[c] = j;
        }
        let mut a = DMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.operator.matrix.row(r) {
                if local[c] != usize::MAX {
                    a[(i, local[c])] = v;
                }
            }
        }
        let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|&r| f[r]));
        let sol = a.lu().solve(&rhs).ok_or(LabError::SingularBlock(usize::MAX))?;
        let mut x = DVector::zeros(n);
        for (&c, s) in cols.iter().zip(sol.iter()) {
            x[c] = *s;
        }
        Ok(x)
    }

    /// Dense matrix of the solver, one column per coefficient.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.n_dofs();
        let mut out = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            out.set_column(j, &self.solve_unchecked(&e)?);
            e[j] = 0.0;
        }
        Ok(out)
    }
}

/// `G = G⁺ − G⁻` for one operator.
#[derive(Debug, Clone)]
pub struct CausalPropagator {
    pub retarded: GreenSolver,
    pub advanced: GreenSolver,
}

impl CausalPropagator {
    pub fn new(grid: Arc<SpacetimeGrid>, kind: OperatorKind) -> Result<Self> {
        Ok(Self {
            retarded: GreenSolver::new(grid.clone(), kind, Causality::Retarded)?,
            advanced: GreenSolver::new(grid, kind, Causality::Advanced)?,
        })
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        self.retarded.grid()
    }

    /// `G f`; `f` must vanish on both margins.
    pub fn apply(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        if !self.grid().is_margined(f) {
            return Err(LabError::MarginViolation("propagator source reaches a margin"));
        }
        Ok(self.retarded.solve_unchecked(f)? - self.advanced.solve_unchecked(f)?)
    }

    /// `G f` without support checks.
    pub fn apply_unchecked(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.retarded.solve_unchecked(f)? - self.advanced.solve_unchecked(f)?)
    }
}

/// Time and position (in cell units) of a section coefficient.
pub fn coefficient_location(grid: &SpacetimeGrid, dof: usize) -> (f64, Vec<f64>) {
    let k = grid.slice_of(dof) as f64;
    let cell = grid.spatial_cell(dof);
    let mesh = grid.base_mesh();
    if grid.is_temporal(dof) {
        let c = mesh.node_coords(cell);
        (k + 0.5, c.iter().map(|&x| x as f64).collect())
    } else {
        let (axis, base) = mesh.edge_axis_base(cell);
        let mut c: Vec<f64> = mesh.node_coords(base).iter().map(|&x| x as f64).collect();
        c[axis] += 0.5;
        (k, c)
    }
}

/// Largest `|u_i|` outside the widened lattice cone of a point source.
///
/// The cone has apex `(t0, x0)` in slice and cell units, opens towards the
/// future for retarded responses and towards the past for advanced ones,
/// and contains every point whose periodic Chebyshev distance to `x0` is
/// at most `speed · |t − t0| + width` on the causal side, apex slice included.
pub fn cone_leakage(
    grid: &SpacetimeGrid,
    u: &DVector<f64>,
    t0: f64,
    x0: &[f64],
    speed: f64,
    width: f64,
    causality: Causality,
) -> f64 {
    let sizes = grid.base_mesh().sizes();
    let mut worst = 0.0f64;
    for (i, &v) in u.iter().enumerate() {
        let (t, x) = coefficient_location(grid, i);
        let dt = match causality {
            Causality::Retarded => t - t0,
            Causality::Advanced => t0 - t,
        };
        let dist = x
            .iter()
            .zip(x0)
            .zip(sizes)
            .map(|((a, b), &n)| {
                let d = (a - b).rem_euclid(n as f64);
                d.min(n as f64 - d)
            })
            .fold(0.0f64, f64::max);
        let inside = dt >= 0.0 && dist <= speed * dt + width;
        if !inside {
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Relative residual `‖M(a − b)‖ / max(‖a‖, tiny)` in the weighted norm of `grid`, masked.
pub fn masked_residual(grid: &SpacetimeGrid, a: &DVector<f64>, b: &DVector<f64>, mask: &DVector<f64>) -> f64 {
    let diff = (a - b).component_mul(mask);
    let scale = grid.norm(a).max(grid.norm(b)).max(1e-300);
    grid.norm(&diff) / scale
}
