use super::Context;
use crate::report::{Check, Comparison::*};
use proca_lab_core::mesh::HodgeComplex;
use proca_lab_core::spectral::{intertwine_with, Direction, Spectrum};
use proca_lab_core::Result;

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let tol = &ctx.tolerances;
    let mut rng = ctx.rng(2);
    let (mut inter, mut recon, mut group, mut positive) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for mesh in &ctx.meshes {
        let cx = HodgeComplex::new(mesh);
        for &m2 in &ctx.scenario.spectral_masses {
            let s0 = Spectrum::new(&cx, 0, m2)?;
            let s1 = Spectrum::new(&cx, 1, m2)?;
            recon = recon.max(s0.reconstruction_residual(&cx.lap0)).max(s1.reconstruction_residual(&cx.lap1));
            for &alpha in &ctx.scenario.alphas {
                for dir in [Direction::Exterior, Direction::Co] {
                    inter = inter.max(intertwine_with(&s0, &s1, &cx, alpha, dir));
                }
                for (j, s) in [(0, &s0), (1, &s1)] {
                    let f = rng.vector(mesh.n_cells(j));
                    let beta = rng.uniform(-1.0, 1.0);
                    let two = s.power(alpha, &s.power(beta, &f));
                    let one = s.power(alpha + beta, &f);
                    group = group.max((&two - &one).amax() / one.amax().max(1e-300));
                    positive = positive.min(cx.dot(j, &f, &s.power(alpha, &f)) / cx.dot(j, &f, &f));
                }
            }
        }
    }
    Ok(vec![
        tol.check("spectral", "reconstruction", "eigendecomposition", recon, 1e-9, Below),
        tol.check("spectral", "fractional-intertwining", "fractional-power-intertwining", inter, 1e-9, Below),
        tol.check("spectral", "power-group-law", "power-group-law", group, 1e-9, Below),
        tol.check("spectral", "power-positivity", "power-positivity", positive, 0.0, Above),
    ])
}
