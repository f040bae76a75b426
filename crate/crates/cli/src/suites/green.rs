use super::{rel, Context};
use crate::report::{Check, Comparison::*};
use nalgebra::DVector;
use proca_lab_core::cauchy::{extract_data, symplectic_form, SliceSpectra};
use proca_lab_core::green::*;
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::{OperatorKind, SpacetimeGrid};
use proca_lab_core::Result;
use std::sync::Arc;

fn margined(g: &SpacetimeGrid, rng: &mut LabRng) -> DVector<f64> {
    rng.vector(g.n_dofs()).component_mul(&g.margin_mask())
}

/// Cuts whose four neighbouring slices share one metric.
fn static_cuts(g: &SpacetimeGrid) -> Vec<usize> {
    (g.margin()..g.nt() - g.margin() - 2)
        .filter(|&k| (k - 1..=k + 2).all(|j| g.slice(j).mesh.edge_metric() == g.slice(k).mesh.edge_metric()))
        .collect()
}

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let sc = ctx.scenario;
    let tol = &ctx.tolerances;
    let g = Arc::new(sc.green.as_ref().expect("validated").build()?);
    let mut rng = ctx.rng(4);
    let interior = g.interior_mask();
    let full = DVector::from_element(g.n_dofs(), 1.0);
    let p = g.proca().matrix;
    let n = g.klein_gordon().matrix;
    let q = g.q_operator().matrix;
    let dirs = [Causality::Retarded, Causality::Advanced];
    let solvers = |kind| dirs.map(|c| GreenSolver::new(g.clone(), kind, c));
    let [pr, pa] = solvers(OperatorKind::Proca);
    let [nr, na] = solvers(OperatorKind::KleinGordon);
    let (pr, pa, nr, na) = (pr?, pa?, nr?, na?);
    let prop = CausalPropagator::new(g.clone(), OperatorKind::Proca)?;

    let (mut p_inv, mut n_inv, mut factor, mut kernel, mut anti, mut dense) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..sc.batteries.pairs {
        let f = margined(&g, &mut rng);
        for (gp, gn) in [(&pr, &nr), (&pa, &na)] {
            let x = gp.solve(&f)?;
            p_inv = p_inv.max(masked_residual(&g, &p.mul_vec(&x), &f, &interior));
            let y = gn.solve(&f)?;
            n_inv = n_inv.max(masked_residual(&g, &n.mul_vec(&y), &f, &interior));
            factor = factor.max(masked_residual(&g, &x, &q.mul_vec(&y), &interior));
            let yq = gn.solve_unchecked(&q.mul_vec(&f))?;
            factor = factor.max(masked_residual(&g, &x, &yq, &interior));
        }
        let h = rng.vector(g.n_dofs()).component_mul(&g.slice_mask(g.margin() + 2, g.nt() - g.margin() - 2));
        let ph = p.mul_vec(&h);
        kernel = kernel.max(g.norm(&prop.apply(&ph)?) / g.norm(&ph));
        let h = margined(&g, &mut rng);
        let a = g.pairing(&prop.apply(&f)?, &h)?;
        let b = g.pairing(&f, &prop.apply(&h)?)?;
        anti = anti.max(rel(a, -b, 1.0));
    }
    let f = margined(&g, &mut rng);
    dense = dense.max(masked_residual(&g, &pr.solve(&f)?, &pr.dense_solve(&f)?, &full));

    let mut leak = 0.0f64;
    let mid = g.nt() / 2;
    for (k, cell) in [(mid, 0), (mid - 3, g.n_edges() / 2)] {
        for solver in [&pr, &pa, &nr, &na] {
            let mut f = DVector::zeros(g.n_dofs());
            let i = g.a1_index(k, cell);
            f[i] = 1.0;
            let u = solver.solve(&f)?;
            let (t0, x0) = coefficient_location(&g, i);
            leak = leak.max(cone_leakage(&g, &u, t0, &x0, 1.0, 1.0, solver.causality()) / f.norm());
        }
    }

    // Data read off solutions: admissibility and the symplectic bridge in both orientations.
    let (mut adm, mut bridge, mut opposite) = (0.0f64, 0.0f64, f64::INFINITY);
    let cuts = static_cuts(&g);
    let f = margined(&g, &mut rng);
    let h = margined(&g, &mut rng);
    let (u, v) = (prop.apply(&f)?, prop.apply(&h)?);
    let expected = g.pairing(&u, &h)?;
    let reversed = g.pairing(&f, &v)?;
    for &k in &cuts {
        let sp = SliceSpectra::new(g.slice_complex(k), g.mass_sq())?;
        let du = extract_data(&g, &sp, &u, k)?;
        let dv = extract_data(&g, &sp, &v, k)?;
        adm = adm.max(du.relative_residual()).max(dv.relative_residual());
        let s = symplectic_form(&sp.complex, &du, &dv)?;
        bridge = bridge.max(rel(s, expected, 1.0));
        opposite = opposite.min(rel(s, reversed, 1.0));
    }
    let mut out = vec![
        tol.check("green", "proca-inverse", "green-causal-inverse", p_inv, 1e-8, Below),
        tol.check("green", "kg-inverse", "green-causal-inverse", n_inv, 1e-8, Below),
        tol.check("green", "proca-via-kg", "proca-green-factorization", factor, 1e-9, Below),
        tol.check("green", "cone-leakage", "causal-support", leak, 1e-10, Below),
        tol.check("green", "kernel-contains-image", "propagator-kernel", kernel, 1e-8, Below),
        tol.check("green", "antisymmetry", "propagator-antisymmetry", anti, 1e-9, Below),
        tol.check("green", "dense-agreement", "causal-solve-uniqueness", dense, 1e-9, Below),
    ];
    if !cuts.is_empty() {
        out.push(tol.check("green", "image-admissible", "solutions-give-admissible-data", adm, 1e-7, Below));
        out.push(tol.check("green", "sigma-bridge", "symplectic-pairing-bridge", bridge, 1e-8, Below));
        out.push(tol.check("green", "sigma-bridge-opposite", "symplectic-pairing-bridge", opposite, 1e-2, Above));
    }
    Ok(out)
}
