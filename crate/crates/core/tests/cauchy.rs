//! Constraint surface, exact evolution, symplectic form, energy, and the
//! bridge from spacetime solutions to Cauchy data.

mod common;

use common::{grid_16x48, margined};
use nalgebra::DVector;
use proca_lab_core::cauchy::*;
use proca_lab_core::green::CausalPropagator;
use proca_lab_core::mesh::{HodgeComplex, MetricSpec, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::OperatorKind;
use proca_lab_core::LabError;

fn slices() -> Vec<SliceSpectra> {
    let meshes = [
        SpatialMesh::new(&[4], &[1.0], &MetricSpec::Constant(1.0)).unwrap(),
        SpatialMesh::new(&[8], &[1.0], &MetricSpec::PerEdge(vec![1.0, 1.4, 0.7, 1.1, 2.0, 0.9, 1.3, 0.8])).unwrap(),
        SpatialMesh::new(&[4, 4], &[1.0, 1.0], &MetricSpec::Constant(1.0)).unwrap(),
        SpatialMesh::new(&[4, 4], &[1.0, 0.5], &MetricSpec::Constant(1.7)).unwrap(),
    ];
    meshes.iter().map(|m| SliceSpectra::new(HodgeComplex::new(m), 1.0).unwrap()).collect()
}

fn random_data(sp: &SliceSpectra, rng: &mut LabRng) -> CauchyData {
    let cx = &sp.complex;
    let ne = cx.mesh.n_edges();
    let f2 = (cx.mesh.dim() == 2).then(|| rng.vector(cx.mesh.n_faces()));
    make_constrained(cx, sp.mass_sq(), &rng.vector(ne), f2.as_ref(), &rng.vector(ne)).unwrap()
}

fn data_distance(a: &CauchyData, b: &CauchyData) -> f64 {
    (a.to_vector() - b.to_vector()).amax() / a.to_vector().amax().max(b.to_vector().amax())
}

#[test]
fn generators_are_admissible() {
    let mut rng = LabRng::new(21);
    for sp in slices() {
        for _ in 0..20 {
            let d = random_data(&sp, &mut rng);
            assert!(d.r1 < 1e-10 * d.scale && d.r2 < 1e-10 * d.scale, "{:e}", d.relative_residual());
            assert!(d.is_admissible());
        }
    }
}

#[test]
fn unit_a1_generator() {
    let sp = &slices()[0];
    let mut a1 = DVector::zeros(4);
    a1[2] = 1.0;
    let z = DVector::zeros(4);
    let d = make_constrained(&sp.complex, 1.0, &z, None, &a1).unwrap();
    assert_eq!(d.a0, vec![0.0; 4]);
    assert_eq!(d.pi1, vec![0.0; 4]);
    // pi0 = −δa1: the edge from node 2 to node 3 yields +1 at node 2 and −1 at node 3.
    assert_eq!(d.pi0, vec![0.0, 0.0, 1.0, -1.0]);
    assert!(d.is_admissible());
    let (e1, e2) = energy(sp, &d).unwrap();
    assert!(e1 > 0.0 && (e1 - e2).abs() < 1e-12 * e1);
}

#[test]
fn length_and_mesh_errors() {
    let sps = slices();
    let small = DVector::zeros(3);
    assert!(matches!(
        make_constrained(&sps[0].complex, 1.0, &small, None, &small),
        Err(LabError::LengthMismatch { .. })
    ));
    let mut rng = LabRng::new(22);
    let a = random_data(&sps[0], &mut rng);
    let b = random_data(&sps[1], &mut rng);
    assert!(matches!(symplectic_form(&sps[0].complex, &a, &b), Err(LabError::LatticeMismatch(_))));
    assert!(matches!(evolve_ultrastatic(&a, 1.0, &sps[1]), Err(LabError::LatticeMismatch(_))));
}

#[test]
fn evolution_group_law_and_constraint_propagation() {
    let mut rng = LabRng::new(23);
    for sp in slices() {
        let d = random_data(&sp, &mut rng);
        assert_eq!(evolve_ultrastatic(&d, 0.0, &sp).unwrap().to_vector(), d.to_vector());
        for t in [0.3, 1.0, 1.7, 2.1, 3.5, 5.0] {
            let fwd = evolve_ultrastatic(&d, t, &sp).unwrap();
            assert!(fwd.relative_residual() < 1e-9, "t={t}: {:e}", fwd.relative_residual());
            let back = evolve_ultrastatic(&fwd, -t, &sp).unwrap();
            assert!(data_distance(&back, &d) < 1e-10);
            let half = evolve_ultrastatic(&evolve_ultrastatic(&d, 0.5 * t, &sp).unwrap(), 0.5 * t, &sp).unwrap();
            assert!(data_distance(&half, &fwd) < 1e-10);
        }
    }
}

#[test]
fn single_mode_oscillates_at_root_three() {
    let sp = &slices()[0];
    let k = (0..4).find(|&k| sp.s1.eigenvalues[k] == 2.0).expect("λ = 2 on the flat 4-circle");
    let mode = sp.s1.eigenvectors.column(k).into_owned();
    let z0 = DVector::zeros(4);
    // a0 = π1 = 0 satisfies the second constraint; the first fixes π0.
    let d = CauchyData::new(&sp.complex, 1.0, z0.clone(), -(&sp.complex.delta1 * &mode), mode.clone(), DVector::zeros(4)).unwrap();
    assert!(d.is_admissible());
    for t in [0.3, 1.0, 2.5] {
        let e = evolve_ultrastatic(&d, t, sp).unwrap();
        let expected = &mode * (3f64.sqrt() * t).cos();
        let got = DVector::from_column_slice(&e.a1);
        assert!((got - expected).amax() < 1e-12);
    }
}

#[test]
fn energy_forms_agree_and_are_conserved() {
    let mut rng = LabRng::new(24);
    for sp in slices() {
        for _ in 0..5 {
            let d = random_data(&sp, &mut rng);
            let (e1, e2) = energy(&sp, &d).unwrap();
            assert!(e1 > 0.0);
            assert!((e1 - e2).abs() < 1e-10 * d.scale.powi(2).max(e1));
            for k in 1..=10 {
                let t = 0.5 * k as f64;
                let (f1, f2) = energy(&sp, &evolve_ultrastatic(&d, t, &sp).unwrap()).unwrap();
                assert!((f1 - e1).abs() < 1e-10 * e1, "t={t}");
                assert!((f2 - e1).abs() < 1e-10 * e1);
            }
        }
        let z = CauchyData::zeros(&sp.complex);
        assert_eq!(energy(&sp, &z).unwrap(), (0.0, 0.0));
    }
}

#[test]
fn inadmissible_datum_breaks_energy_equality() {
    let sp = &slices()[0];
    let mut a0 = DVector::zeros(4);
    a0[1] = 1.0;
    let z0 = DVector::zeros(4);
    let bad = CauchyData::new(&sp.complex, 1.0, a0, z0.clone(), DVector::zeros(4), DVector::zeros(4)).unwrap();
    assert!(!bad.is_admissible());
    assert!(matches!(energy(sp, &bad), Err(LabError::Inadmissible { .. })));
    assert!(matches!(evolve_ultrastatic(&bad, 1.0, sp), Err(LabError::Inadmissible { .. })));
    let (e1, e2) = energy_unchecked(sp, &bad);
    assert!((e1 - e2).abs() > 1e-3, "{e1} {e2}");
}

#[test]
fn symplectic_form_properties() {
    let mut rng = LabRng::new(25);
    for sp in slices() {
        let cx = &sp.complex;
        for _ in 0..5 {
            let a = random_data(&sp, &mut rng);
            let b = random_data(&sp, &mut rng);
            assert_eq!(symplectic_form(cx, &a, &a).unwrap(), 0.0);
            let s = symplectic_form(cx, &a, &b).unwrap();
            assert_eq!(symplectic_form(cx, &b, &a).unwrap(), -s);
            let split = symplectic_form_split(cx, &a, &b).unwrap();
            assert!((s - split).abs() < 1e-10 * s.abs().max(1.0));
            for t in [0.3, 1.7] {
                let at = evolve_ultrastatic(&a, t, &sp).unwrap();
                let bt = evolve_ultrastatic(&b, t, &sp).unwrap();
                let st = symplectic_form(cx, &at, &bt).unwrap();
                assert!((st - s).abs() < 1e-9 * s.abs().max(1.0), "t={t}");
            }
        }
    }
}

#[test]
fn symplectic_gram_has_full_rank() {
    for sp in slices() {
        let (dim, rank) = symplectic_rank(&sp.complex, 1.0, 1e-9).unwrap();
        assert_eq!(rank, dim);
        // Admissible data are fixed by (a1, π1): the span is 2·E dimensional.
        assert_eq!(dim, 2 * sp.complex.mesh.n_edges());
    }
}

#[test]
fn data_serialize_to_json() {
    let sp = &slices()[0];
    let mut rng = LabRng::new(26);
    let d = random_data(sp, &mut rng);
    let v: serde_json::Value = serde_json::to_value(&d).unwrap();
    for key in ["a0", "pi0", "a1", "pi1", "r1", "r2", "scale"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["a1"].as_array().unwrap().len(), 4);
    let back = CauchyData::from_vector(&sp.complex, 1.0, &d.to_vector()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn solutions_yield_admissible_data_with_matching_symplectic_form() {
    let g = grid_16x48();
    let sp = SliceSpectra::new(g.slice_complex(24), 1.0).unwrap();
    let gp = CausalPropagator::new(g.clone(), OperatorKind::Proca).unwrap();
    let mut rng = LabRng::new(27);
    for _ in 0..3 {
        let f = margined(&g, &mut rng);
        let h = margined(&g, &mut rng);
        let u = gp.apply(&f).unwrap();
        let v = gp.apply(&h).unwrap();
        let expected = g.pairing(&u, &h).unwrap();
        let opposite = g.pairing(&f, &v).unwrap();
        for k in 3..g.nt() - 4 {
            let du = extract_data(&g, &sp, &u, k).unwrap();
            assert!(du.relative_residual() < 1e-7, "k={k}: {:e}", du.relative_residual());
            let dv = extract_data(&g, &sp, &v, k).unwrap();
            let s = symplectic_form(&sp.complex, &du, &dv).unwrap();
            assert!((s - expected).abs() < 1e-8 * expected.abs().max(1.0), "k={k}");
            assert!((cut_flux(&g, &u, &v, k) + s).abs() < 1e-8 * s.abs().max(1.0));
            // The opposite orientation of the bridge fails by twice the value.
            assert!((s - opposite).abs() > 1e-2 * s.abs());
            let (e1, e2) = energy(&sp, &du).unwrap();
            assert!((e1 - e2).abs() < 1e-10 * e1.max(du.scale.powi(2)));
        }
    }
}

#[test]
fn extraction_rejects_edge_cuts() {
    let g = grid_16x48();
    let sp = SliceSpectra::new(g.slice_complex(0), 1.0).unwrap();
    let u = DVector::zeros(g.n_dofs());
    assert!(extract_data(&g, &sp, &u, 0).is_err());
    assert!(extract_data(&g, &sp, &u, g.nt() - 2).is_err());
    assert!(extract_data(&g, &sp, &u, 10).is_ok());
}
