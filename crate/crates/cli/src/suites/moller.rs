use super::{rel, Context};
use crate::report::{Check, Comparison::*};
use nalgebra::DVector;
use proca_lab_core::green::{masked_residual, CausalPropagator};
use proca_lab_core::moller::{plus_adjoint_closed_form, MollerOperator};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::{adjoint, OperatorKind, SpacetimeGrid};
use proca_lab_core::states::{gram, hermitian_extremes, PulledBackState, QuasifreeState};
use proca_lab_core::{LabError, Result};
use std::sync::Arc;

fn margined(g: &SpacetimeGrid, rng: &mut LabRng) -> DVector<f64> {
    rng.vector(g.n_dofs()).component_mul(&g.margin_mask())
}

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let sc = ctx.scenario;
    let tol = &ctx.tolerances;
    let spec = sc.moller.as_ref().expect("validated");
    let [start, end] = spec
        .window
        .ok_or_else(|| LabError::InvalidArgument("the Møller grid needs an interpolation window".into()))?;
    let gc = Arc::new(spec.build()?);
    let static_grid = |mesh: &proca_lab_core::mesh::SpatialMesh| SpacetimeGrid::ultrastatic(mesh, spec.nt, spec.dt, spec.margins, spec.mass_sq).map(Arc::new);
    let g0 = static_grid(&gc.slice(0).mesh)?;
    let g1 = static_grid(&gc.slice(spec.nt - 1).mesh)?;
    let plus = MollerOperator::plus(&g0, &gc)?;
    let minus = MollerOperator::minus(&gc, &g1)?;
    let r = MollerOperator::compose(&g0, vec![plus.clone(), minus.clone()])?;
    let radj = r.adjoint()?;
    let inv_adj = r.inverse_adjoint()?;
    let plus_adj = plus.adjoint()?;
    let gp0 = CausalPropagator::new(g0.clone(), OperatorKind::Proca)?;
    let gp1 = CausalPropagator::new(g1.clone(), OperatorKind::Proca)?;
    let (p0, pc, p1) = (g0.proca().matrix, gc.proca().matrix, g1.proca().matrix);
    let k0c = gc.fiber_isometry(&g0)?.matrix;
    let k01 = g1.fiber_isometry(&g0)?.matrix;
    let k10 = g0.fiber_isometry(&g1)?.matrix;
    let k10_adj = adjoint(&k10, &g0, &g1)?;
    let ones = DVector::from_element(g0.n_dofs(), 1.0);
    let interior = g0.interior_mask();
    let past_end = ((start / spec.dt).floor() as usize).saturating_sub(2);
    let future_start = (end / spec.dt).ceil() as usize + 2;
    let mut rng = ctx.rng(5);

    let mut worst = [0.0f64; 9];
    for _ in 0..sc.batteries.pairs {
        let f = margined(&g0, &mut rng);
        let h = margined(&g1, &mut rng);
        let rf = r.apply(&f);
        worst[0] = worst[0].max(masked_residual(&g0, &r.apply_inverse(&rf), &f, &ones));
        if past_end > g0.margin() {
            let pf = rng.vector(g0.n_dofs()).component_mul(&g0.slice_mask(g0.margin(), past_end));
            worst[1] = worst[1].max((plus.apply(&pf) - &pf).amax() / pf.amax());
        }
        if future_start < g1.nt() - g1.margin() {
            let ff = rng.vector(g0.n_dofs()).component_mul(&g0.slice_mask(future_start, g1.nt() - g1.margin()));
            worst[1] = worst[1].max((minus.apply(&ff) - &ff).amax() / ff.amax());
        }
        let pf = p0.mul_vec(&f);
        let lhs = k0c.mul_vec(&pc.mul_vec(&plus.apply(&f)));
        worst[2] = worst[2].max(masked_residual(&g0, &lhs, &pf, &interior));
        let lhs = k01.mul_vec(&p1.mul_vec(&rf));
        worst[2] = worst[2].max(masked_residual(&g0, &lhs, &pf, &interior));
        let a = g1.pairing(&h, &rf)?;
        let b = g0.pairing(&(&radj * &h), &f)?;
        worst[3] = worst[3].max(rel(a, b, 1.0));
        let hc = margined(&gc, &mut rng);
        let closed = plus_adjoint_closed_form(&g0, &gc, &hc)?;
        worst[4] = worst[4].max(masked_residual(&g0, &closed, &(&plus_adj * &hc), &interior));
        let pushed = r.apply(&gp0.apply_unchecked(&(&radj * &h))?);
        worst[5] = worst[5].max(masked_residual(&g1, &pushed, &gp1.apply(&h)?, &ones));
        let kf = DVector::from_fn(f.len(), |i, _| f[i] / k10_adj.get(i, i));
        worst[6] = worst[6].max(masked_residual(&g0, &(&radj * p1.mul_vec(&kf)), &pf, &interior));
        worst[7] = worst[7].max(masked_residual(&g1, &(&inv_adj * (&radj * &h)), &h, &ones));
        let s = gp0.apply(&f)?;
        let rs = r.apply(&s);
        worst[8] = worst[8].max(g1.norm(&p1.mul_vec(&rs).component_mul(&interior)) / g0.norm(&s));
    }

    let state = QuasifreeState::new(g0.clone())?;
    let pulled = PulledBackState::new(&state, g1.clone(), radj)?;
    let n = sc.batteries.gram.max(2);
    let battery: Vec<DVector<f64>> = (0..n).map(|_| margined(&g1, &mut rng)).collect();
    let prepared = battery.iter().map(|f| pulled.prepare(f)).collect::<Result<Vec<_>>>()?;
    let mut ccr = 0.0f64;
    for i in 0..n / 2 {
        let a = pulled.two_point_prepared(&prepared[2 * i], &prepared[2 * i + 1]);
        let b = pulled.two_point_prepared(&prepared[2 * i + 1], &prepared[2 * i]);
        let c = g1.pairing(&gp1.apply(&battery[2 * i])?, &battery[2 * i + 1])?;
        ccr = ccr.max(((a - b).im - c).abs() / c.abs().max(1.0)).max((a - b).re.abs() / a.norm().max(1.0));
    }
    let m = gram(n, |i, j| Ok(pulled.two_point_prepared(&prepared[i], &prepared[j])))?;
    let (min, norm) = hermitian_extremes(&m);

    Ok(vec![
        tol.check("moller", "inverse", "moller-invertible", worst[0], 1e-8, Below),
        tol.check("moller", "static-identity", "moller-identity-outside-window", worst[1], 1e-10, Below),
        tol.check("moller", "intertwining", "moller-intertwining", worst[2], 1e-8, Below),
        tol.check("moller", "adjoint-duality", "moller-adjoint", worst[3], 1e-10, Below),
        tol.check("moller", "plus-adjoint-closed-form", "moller-adjoint-closed-form", worst[4], 1e-8, Below),
        tol.check("moller", "pushforward", "moller-pushforward-propagator", worst[5], 1e-7, Below),
        tol.check("moller", "adjoint-intertwining", "moller-adjoint-intertwining", worst[6], 1e-8, Below),
        tol.check("moller", "inverse-adjoint", "moller-inverse-adjoint", worst[7], 1e-8, Below),
        tol.check("moller", "solutions-to-solutions", "moller-solution-map", worst[8], 1e-7, Below),
        tol.check("moller", "pullback-ccr", "pullback-ccr", ccr, 1e-7, Below),
        tol.check("moller", "pullback-positivity", "pullback-positivity", min / norm, -1e-8, Above),
    ])
}
