//! Causal Green operators of P and N on the 16×48 grid and on small grids.

mod common;

use common::{circle, grid_16x48, margined, supported};
use nalgebra::DVector;
use proca_lab_core::green::{cone_leakage, masked_residual, CausalPropagator, Causality, GreenSolver};
use proca_lab_core::mesh::{MetricSpec, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::{ChiProfile, OperatorKind, SpacetimeGrid};
use proca_lab_core::LabError;
use std::sync::Arc;

const CAUSALITIES: [Causality; 2] = [Causality::Retarded, Causality::Advanced];

fn solver(g: &Arc<SpacetimeGrid>, kind: OperatorKind, c: Causality) -> GreenSolver {
    GreenSolver::new(g.clone(), kind, c).unwrap()
}

#[test]
fn green_operators_invert_p_and_n() {
    let g = grid_16x48();
    let interior = g.interior_mask();
    let mut rng = LabRng::new(11);
    for kind in [OperatorKind::Proca, OperatorKind::KleinGordon] {
        let op = solver(&g, kind, Causality::Retarded).operator().matrix.clone();
        for c in CAUSALITIES {
            let s = solver(&g, kind, c);
            for _ in 0..5 {
                let f = margined(&g, &mut rng);
                let u = s.solve(&f).unwrap();
                let r = masked_residual(&g, &op.mul_vec(&u), &f, &interior);
                assert!(r < 1e-8, "{kind:?} {c:?}: {r:e}");
            }
        }
    }
}

#[test]
fn proca_green_factors_through_klein_gordon() {
    let g = grid_16x48();
    let interior = g.interior_mask();
    let q = g.q_operator().matrix;
    let mut rng = LabRng::new(12);
    for c in CAUSALITIES {
        let gp = solver(&g, OperatorKind::Proca, c);
        let gn = solver(&g, OperatorKind::KleinGordon, c);
        for _ in 0..5 {
            let f = margined(&g, &mut rng);
            let x = gp.solve(&f).unwrap();
            let q_gn = q.mul_vec(&gn.solve(&f).unwrap());
            let gn_q = gn.solve_unchecked(&q.mul_vec(&f)).unwrap();
            assert!(masked_residual(&g, &x, &q_gn, &interior) < 1e-9);
            assert!(masked_residual(&g, &x, &gn_q, &interior) < 1e-9);
        }
    }
}

#[test]
fn support_is_inside_the_causal_cone() {
    let g = grid_16x48();
    for kind in [OperatorKind::Proca, OperatorKind::KleinGordon] {
        for c in CAUSALITIES {
            let s = solver(&g, kind, c);
            for (k, e) in [(24, 3), (20, 11), (30, 0)] {
                let mut f = DVector::zeros(g.n_dofs());
                f[g.a1_index(k, e)] = 1.0;
                let u = s.solve(&f).unwrap();
                let (t0, x0) = proca_lab_core::green::coefficient_location(&g, g.a1_index(k, e));
                let leak = cone_leakage(&g, &u, t0, &x0, 1.0, 1.0, c);
                assert!(leak < 1e-10 * f.norm(), "{kind:?} {c:?} ({k},{e}): {leak:e}");
                assert!(u.amax() > 0.1);
            }
            let mut f = DVector::zeros(g.n_dofs());
            f[g.a0_index(22, 5)] = 1.0;
            let u = s.solve(&f).unwrap();
            let (t0, x0) = proca_lab_core::green::coefficient_location(&g, g.a0_index(22, 5));
            assert!(cone_leakage(&g, &u, t0, &x0, 1.0, 1.0, c) < 1e-10);
        }
    }
}

#[test]
fn causal_propagator_kills_proca_images() {
    let g = grid_16x48();
    let gp = CausalPropagator::new(g.clone(), OperatorKind::Proca).unwrap();
    let p = g.proca().matrix;
    let mut rng = LabRng::new(13);
    for _ in 0..5 {
        // P of a section compactly supported inside the margins is still margined.
        let h = supported(&g, &mut rng, g.margin() + 2, g.nt() - g.margin() - 2);
        let f = p.mul_vec(&h);
        assert!(g.is_margined(&f));
        let z = gp.apply(&f).unwrap();
        assert!(g.norm(&z) / g.norm(&f) < 1e-8, "{:e}", g.norm(&z) / g.norm(&f));
    }
}

#[test]
fn causal_propagator_is_antisymmetric_and_on_shell() {
    let g = grid_16x48();
    let gp = CausalPropagator::new(g.clone(), OperatorKind::Proca).unwrap();
    let p = g.proca().matrix;
    let interior = g.interior_mask();
    let mut rng = LabRng::new(14);
    for _ in 0..5 {
        let f = margined(&g, &mut rng);
        let h = margined(&g, &mut rng);
        let gf = gp.apply(&f).unwrap();
        let a = g.pairing(&gf, &h).unwrap();
        let b = g.pairing(&f, &gp.apply(&h).unwrap()).unwrap();
        assert!((a + b).abs() < 1e-10 * a.abs().max(1.0));
        let on_shell = g.norm(&p.mul_vec(&gf).component_mul(&interior)) / g.norm(&gf);
        assert!(on_shell < 1e-10);
    }
}

fn small_grids() -> Vec<Arc<SpacetimeGrid>> {
    let torus = SpatialMesh::new(&[4, 4], &[1.0, 1.0], &MetricSpec::Constant(1.0)).unwrap();
    let var = SpatialMesh::new(&[5], &[1.0], &MetricSpec::PerEdge(vec![1.0, 1.3, 0.8, 1.1, 0.9])).unwrap();
    vec![
        Arc::new(SpacetimeGrid::ultrastatic(&circle(8, 1.0), 8, 0.4, Some(2), 1.0).unwrap()),
        Arc::new(SpacetimeGrid::ultrastatic(&circle(6, 1.0), 16, 0.4, None, 1.0).unwrap()),
        Arc::new(SpacetimeGrid::ultrastatic(&torus, 16, 0.3, None, 1.0).unwrap()),
        Arc::new(
            SpacetimeGrid::new(&circle(5, 1.0), &var, &ChiProfile::Smoothstep { start: 2.0, end: 4.0 }, 16, 0.4, None, 0.5)
                .unwrap(),
        ),
    ]
}

#[test]
fn block_solver_matches_dense_reference() {
    let mut rng = LabRng::new(15);
    for g in small_grids() {
        for kind in [OperatorKind::Proca, OperatorKind::KleinGordon] {
            for c in CAUSALITIES {
                let s = solver(&g, kind, c);
                let f = margined(&g, &mut rng);
                let a = s.solve(&f).unwrap();
                let b = s.dense_solve(&f).unwrap();
                let full = DVector::from_element(g.n_dofs(), 1.0);
                assert!(masked_residual(&g, &a, &b, &full) < 1e-10, "{kind:?} {c:?}");
                let m = s.to_dense().unwrap();
                assert!(masked_residual(&g, &(&m * &f), &a, &full) < 1e-12);
            }
        }
    }
}

#[test]
fn solver_preconditions() {
    let g = grid_16x48();
    let s = solver(&g, OperatorKind::Proca, Causality::Retarded);
    let full = DVector::from_element(g.n_dofs(), 1.0);
    assert!(matches!(s.solve(&full), Err(LabError::MarginViolation(_))));
    assert!(matches!(s.solve_unchecked(&DVector::zeros(3)), Err(LabError::LengthMismatch { .. })));
    assert!(s.solve_unchecked(&full).is_ok());
    assert!(matches!(
        GreenSolver::new(g.clone(), OperatorKind::Q, Causality::Retarded),
        Err(LabError::InvalidArgument(_))
    ));
    let m = circle(6, 1.0);
    let fast = Arc::new(SpacetimeGrid::new_unstable(&m, &m, &ChiProfile::Zero, 16, 1.0, None, 1.0).unwrap());
    assert!(matches!(
        GreenSolver::new(fast, OperatorKind::Proca, Causality::Retarded),
        Err(LabError::StabilityBound { .. })
    ));
}

#[test]
fn dropped_rows_are_the_far_end_slice() {
    let g = grid_16x48();
    let ret = solver(&g, OperatorKind::Proca, Causality::Retarded);
    let adv = solver(&g, OperatorKind::Proca, Causality::Advanced);
    let last: Vec<usize> = (0..g.n_edges()).map(|e| g.a1_index(g.nt() - 1, e)).collect();
    let first: Vec<usize> = (0..g.n_edges()).map(|e| g.a1_index(0, e)).collect();
    assert_eq!(ret.dropped_rows(), last.as_slice());
    assert_eq!(adv.dropped_rows(), first.as_slice());
}
