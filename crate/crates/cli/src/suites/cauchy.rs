use super::{rel, Context};
use crate::report::{Check, Comparison::*};
use nalgebra::DVector;
use proca_lab_core::cauchy::*;
use proca_lab_core::mesh::HodgeComplex;
use proca_lab_core::Result;

fn random(sp: &SliceSpectra, rng: &mut proca_lab_core::rng::LabRng) -> Result<CauchyData> {
    let cx = &sp.complex;
    let ne = cx.mesh.n_edges();
    let f2 = (cx.mesh.dim() == 2).then(|| rng.vector(cx.mesh.n_faces()));
    make_constrained(cx, sp.mass_sq(), &rng.vector(ne), f2.as_ref(), &rng.vector(ne))
}

/// Datum with only `a⁰` nonzero: it violates the second constraint.
pub fn crafted_inadmissible(cx: &HodgeComplex, mass_sq: f64) -> Result<CauchyData> {
    let (nv, ne) = (cx.mesh.n_nodes(), cx.mesh.n_edges());
    let mut a0 = DVector::zeros(nv);
    a0[0] = 1.0;
    CauchyData::new(cx, mass_sq, a0, DVector::zeros(nv), DVector::zeros(ne), DVector::zeros(ne))
}

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let sc = ctx.scenario;
    let tol = &ctx.tolerances;
    let mut rng = ctx.rng(3);
    let steps = (sc.cauchy.horizon / 0.5).round() as usize;
    let (mut cons, mut prop, mut eq, mut conserve, mut split, mut sigma_t, mut rank_gap, mut gap) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize, f64::INFINITY);
    let mut first = None;
    for mesh in &ctx.meshes {
        let sp = SliceSpectra::new(HodgeComplex::new(mesh), sc.mass_sq)?;
        let cx = &sp.complex;
        for _ in 0..sc.batteries.pairs {
            let a = random(&sp, &mut rng)?;
            let b = random(&sp, &mut rng)?;
            cons = cons.max(a.relative_residual()).max(b.relative_residual());
            let (e1, e2) = energy(&sp, &a)?;
            eq = eq.max(rel(e1, e2, 1e-300));
            for k in 1..=steps {
                let at = evolve_ultrastatic(&a, 0.5 * k as f64, &sp)?;
                prop = prop.max(at.relative_residual());
                let (d, _) = energy_unchecked(&sp, &at);
                conserve = conserve.max(rel(d, e1, 1e-300));
            }
            let s = symplectic_form(cx, &a, &b)?;
            split = split.max(rel(s, symplectic_form_split(cx, &a, &b)?, 1.0));
            for &t in &sc.cauchy.times {
                let at = evolve_ultrastatic(&a, t, &sp)?;
                let bt = evolve_ultrastatic(&b, t, &sp)?;
                prop = prop.max(at.relative_residual()).max(bt.relative_residual());
                sigma_t = sigma_t.max(rel(symplectic_form(cx, &at, &bt)?, s, 1.0));
            }
        }
        let (dim, rank) = symplectic_rank(cx, sc.mass_sq, 1e-9)?;
        rank_gap = rank_gap.max(dim - rank);
        let bad = crafted_inadmissible(cx, sc.mass_sq)?;
        let (e1, e2) = energy_unchecked(&sp, &bad);
        gap = gap.min((e1 - e2).abs());
        if first.is_none() {
            first = Some(sp);
        }
    }
    let mut out = vec![
        tol.check("cauchy", "generator-constraints", "constraint-generators", cons, 1e-10, Below),
        tol.check("cauchy", "constraint-propagation", "constraint-propagation", prop, 1e-9, Below),
        tol.check("cauchy", "energy-equality", "energy-density-vs-sectors", eq, 1e-10, Below),
        tol.check("cauchy", "energy-conservation", "energy-conservation", conserve, 1e-10, Below),
        tol.check("cauchy", "symplectic-split", "symplectic-sector-split", split, 1e-10, Below),
        tol.check("cauchy", "symplectic-conservation", "symplectic-time-independence", sigma_t, 1e-9, Below),
        tol.check("cauchy", "symplectic-rank-deficit", "symplectic-nondegenerate", rank_gap as f64, 0.0, AtMost),
        tol.check("cauchy", "inadmissible-energy-gap", "energy-needs-constraints", gap, 1e-3, Above),
    ];
    if let (Some(d), Some(sp)) = (&sc.cauchy.datum, first) {
        let v = |x: &Vec<f64>| DVector::from_column_slice(x);
        let data = CauchyData::new(&sp.complex, sc.mass_sq, v(&d.a0), v(&d.pi0), v(&d.a1), v(&d.pi1))?;
        let (e1, e2) = energy_unchecked(&sp, &data);
        let r = (e1 - e2).abs() / e1.abs().max(data.scale * data.scale);
        out.push(tol.check("cauchy", "datum-energy-equality", "energy-density-vs-sectors", r, 1e-10, Below));
    }
    Ok(out)
}
