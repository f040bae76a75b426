use super::{is_uniform, Context};
use crate::report::{Check, Comparison::*};
use proca_lab_core::mesh::HodgeComplex;
use proca_lab_core::spectral::Spectrum;
use proca_lab_core::Result;

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let tol = &ctx.tolerances;
    let pairs = ctx.scenario.batteries.pairs;
    let mut rng = ctx.rng(1);
    let (mut dd, mut adj, mut flat, mut var, mut neg) = (0.0f64, 0.0f64, None::<f64>, None::<f64>, 0.0f64);
    for mesh in &ctx.meshes {
        let cx = HodgeComplex::new(mesh);
        dd = dd.max((&cx.d1 * &cx.d0).amax());
        for _ in 0..pairs {
            let f0 = rng.vector(mesh.n_nodes());
            let f1 = rng.vector(mesh.n_edges());
            let a = cx.dot(1, &(&cx.d0 * &f0), &f1);
            let b = cx.dot(0, &f0, &(&cx.delta1 * &f1));
            adj = adj.max(super::rel(a, b, 1.0));
            if mesh.dim() == 2 {
                let f2 = rng.vector(mesh.n_faces());
                let a = cx.dot(2, &(&cx.d1 * &f1), &f2);
                let b = cx.dot(1, &f1, &(&cx.delta2 * &f2));
                adj = adj.max(super::rel(a, b, 1.0));
            }
        }
        let lhs = &cx.lap1 * &cx.d0;
        let rhs = &cx.d0 * &cx.lap0;
        let r = (&lhs - &rhs).amax() / lhs.amax().max(rhs.amax()).max(1e-300);
        let slot = if is_uniform(mesh) { &mut flat } else { &mut var };
        *slot = Some(slot.unwrap_or(0.0).max(r));
        for j in 0..2 {
            let s = Spectrum::new(&cx, j, ctx.scenario.mass_sq)?;
            neg = neg.max(-s.eigenvalues.min());
        }
    }
    let mut out = vec![
        tol.check("complex", "d-squared", "d-squared-zero", dd, 0.0, AtMost),
        tol.check("complex", "adjointness", "codifferential-adjoint", adj, 1e-12, Below),
    ];
    if let Some(r) = flat {
        out.push(tol.check("complex", "laplacian-intertwining-uniform", "laplacian-intertwining", r, 0.0, AtMost));
    }
    if let Some(r) = var {
        out.push(tol.check("complex", "laplacian-intertwining-variable", "laplacian-intertwining", r, 1e-14, Below));
    }
    out.push(tol.check("complex", "nonnegative-spectrum", "laplacian-nonnegative", neg, 0.0, AtMost));
    Ok(out)
}
