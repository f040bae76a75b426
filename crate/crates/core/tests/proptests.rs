//! Randomized invariants over meshes, metrics, fields and data.

mod common;

use nalgebra::DVector;
use proca_lab_core::cauchy::{energy, evolve_ultrastatic, make_constrained, symplectic_form, SliceSpectra};
use proca_lab_core::mesh::{HodgeComplex, MetricSpec, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::{ChiProfile, SpacetimeGrid};
use proca_lab_core::spectral::Spectrum;
use proca_lab_core::states::{pairings, wick_n_point};
use proptest::prelude::*;

/// A periodic lattice with a random positive per-edge metric.
fn mesh_strategy() -> impl Strategy<Value = SpatialMesh> {
    prop_oneof![
        (3usize..10, 0.5f64..2.0).prop_map(|(n, dx)| (vec![n], vec![dx])),
        (3usize..6, 3usize..6, 0.5f64..2.0, 0.5f64..2.0).prop_map(|(a, b, x, y)| (vec![a, b], vec![x, y])),
    ]
    .prop_flat_map(|(sizes, spacing)| {
        let edges = sizes.iter().product::<usize>() * sizes.len();
        (Just(sizes), Just(spacing), proptest::collection::vec(0.3f64..3.0, edges))
    })
    .prop_map(|(sizes, spacing, h)| SpatialMesh::new(&sizes, &spacing, &MetricSpec::PerEdge(h)).unwrap())
}

fn vector(rng: &mut LabRng, n: usize) -> DVector<f64> {
    rng.vector(n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exterior_derivative_squares_to_zero(mesh in mesh_strategy()) {
        let cx = HodgeComplex::new(&mesh);
        prop_assert_eq!((&cx.d1 * &cx.d0).amax(), 0.0);
    }

    #[test]
    fn codifferential_is_the_weighted_adjoint(mesh in mesh_strategy(), seed in any::<u64>()) {
        let cx = HodgeComplex::new(&mesh);
        let mut rng = LabRng::new(seed);
        let f = vector(&mut rng, mesh.n_nodes());
        let g = vector(&mut rng, mesh.n_edges());
        let lhs = cx.dot(1, &(&cx.d0 * &f), &g);
        let rhs = cx.dot(0, &f, &(&cx.delta1 * &g));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        if mesh.dim() == 2 {
            let b = vector(&mut rng, mesh.n_faces());
            let lhs = cx.dot(2, &(&cx.d1 * &g), &b);
            let rhs = cx.dot(1, &g, &(&cx.delta2 * &b));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }

    #[test]
    fn laplacians_are_nonnegative(mesh in mesh_strategy(), seed in any::<u64>()) {
        let cx = HodgeComplex::new(&mesh);
        let mut rng = LabRng::new(seed);
        for j in 0..2 {
            let f = vector(&mut rng, mesh.n_cells(j));
            let q = cx.dot(j, &f, &(cx.laplacian(j) * &f));
            prop_assert!(q >= -1e-12 * cx.dot(j, &f, &f));
        }
    }

    #[test]
    fn spectral_powers_form_a_group(mesh in mesh_strategy(), seed in any::<u64>(), a in -1.0f64..1.0, b in -1.0f64..1.0, m2 in 0.25f64..4.0) {
        let cx = HodgeComplex::new(&mesh);
        let mut rng = LabRng::new(seed);
        for j in 0..2 {
            let s = Spectrum::new(&cx, j, m2).unwrap();
            let f = vector(&mut rng, mesh.n_cells(j));
            let two = s.power(a, &s.power(b, &f));
            let one = s.power(a + b, &f);
            prop_assert!((&two - &one).amax() < 1e-9 * one.amax().max(f.amax()));
            prop_assert!(cx.dot(j, &f, &s.power(a, &f)) > 0.0);
            let c = rng.symmetric() * 10.0;
            let scaled = s.power(a, &(&f * c));
            prop_assert!((scaled - s.power(a, &f) * c).amax() <= 1e-12 * (c.abs() * one.amax()).max(1e-300));
        }
    }

    #[test]
    fn constrained_data_evolve_admissibly(mesh in mesh_strategy(), seed in any::<u64>(), t in -5.0f64..5.0) {
        let sp = SliceSpectra::new(HodgeComplex::new(&mesh), 1.0).unwrap();
        let cx = &sp.complex;
        let mut rng = LabRng::new(seed);
        let make = |rng: &mut LabRng| {
            let f2 = (mesh.dim() == 2).then(|| rng.vector(mesh.n_faces()));
            make_constrained(cx, 1.0, &rng.vector(mesh.n_edges()), f2.as_ref(), &rng.vector(mesh.n_edges())).unwrap()
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        prop_assert!(a.relative_residual() < 1e-10);
        let at = evolve_ultrastatic(&a, t, &sp).unwrap();
        let bt = evolve_ultrastatic(&b, t, &sp).unwrap();
        prop_assert!(at.relative_residual() < 1e-9);
        let s0 = symplectic_form(cx, &a, &b).unwrap();
        let st = symplectic_form(cx, &at, &bt).unwrap();
        prop_assert!((s0 - st).abs() < 1e-9 * s0.abs().max(1.0));
        let (e0, spectral0) = energy(&sp, &a).unwrap();
        let (et, _) = energy(&sp, &at).unwrap();
        prop_assert!(e0 > 0.0);
        prop_assert!((e0 - spectral0).abs() < 1e-10 * e0);
        prop_assert!((e0 - et).abs() < 1e-10 * e0);
    }

    #[test]
    fn fiber_isometry_preserves_the_pointwise_metric(h0 in 0.3f64..3.0, h1 in proptest::collection::vec(0.3f64..3.0, 6), seed in any::<u64>()) {
        let a = SpatialMesh::new(&[6], &[1.0], &MetricSpec::Constant(h0)).unwrap();
        let b = SpatialMesh::new(&[6], &[1.0], &MetricSpec::PerEdge(h1.clone())).unwrap();
        let ga = SpacetimeGrid::new_unstable(&a, &a, &ChiProfile::Zero, 8, 0.1, Some(2), 1.0).unwrap();
        let gb = SpacetimeGrid::new_unstable(&b, &b, &ChiProfile::Zero, 8, 0.1, Some(2), 1.0).unwrap();
        let k = ga.fiber_isometry(&gb).unwrap().matrix;
        let mut rng = LabRng::new(seed);
        let f = rng.vector(ga.n_dofs());
        let kf = k.mul_vec(&f);
        for slice in 0..8 {
            for e in 0..6 {
                let i = ga.a1_index(slice, e);
                let lhs = kf[i] * kf[i] / h1[e];
                let rhs = f[i] * f[i] / h0;
                prop_assert!((lhs - rhs).abs() <= 1e-14 * lhs.max(rhs).max(1e-300));
            }
        }
        for i in (0..ga.n_dofs()).filter(|&i| ga.is_temporal(i)) {
            prop_assert_eq!(kf[i], f[i]);
        }
    }

    #[test]
    fn lorentzian_pairing_is_symmetric(seed in any::<u64>(), h in proptest::collection::vec(0.5f64..2.0, 5)) {
        let m = SpatialMesh::new(&[5], &[1.0], &MetricSpec::PerEdge(h)).unwrap();
        let g = SpacetimeGrid::ultrastatic(&m, 16, 0.2, None, 1.0).unwrap();
        let mut rng = LabRng::new(seed);
        let f = common::margined(&g, &mut rng);
        let u = rng.vector(g.n_dofs());
        prop_assert_eq!(g.pairing(&f, &u).unwrap(), g.pairing(&u, &f).unwrap());
    }

    #[test]
    fn wick_pairing_counts(n in 0usize..9) {
        let count = pairings(n).len();
        let expected = if n % 2 == 1 { 0 } else { (1..n).step_by(2).product::<usize>() };
        prop_assert_eq!(count, expected);
    }

    #[test]
    fn wick_of_constant_table(n in 1usize..7, re in -2.0f64..2.0) {
        let w = nalgebra::DMatrix::from_element(n, n, num_complex::Complex64::new(re, 0.0));
        let value = wick_n_point(&w);
        let expected = if n % 2 == 1 { 0.0 } else { pairings(n).len() as f64 * re.powi((n / 2) as i32) };
        prop_assert!((value.re - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn rng_is_reproducible(seed in any::<u64>()) {
        let a = LabRng::new(seed).vector(16);
        let b = LabRng::new(seed).vector(16);
        prop_assert_eq!(a, b);
    }
}
