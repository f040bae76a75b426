//! Identities of the spatial Hodge complex and its spectral calculus.

mod common;

use nalgebra::DMatrix;
use proca_lab_core::mesh::{HodgeComplex, MetricSpec, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spectral::{intertwine_residual, Direction, Spectrum};

/// Flat and variable-metric versions of every lattice in the test set.
fn lattices() -> Vec<(String, SpatialMesh, bool)> {
    let mut rng = LabRng::new(11);
    let mut out = Vec::new();
    for sizes in [vec![4usize], vec![8], vec![32], vec![4, 4], vec![8, 8]] {
        let flat = SpatialMesh::new(&sizes, &vec![1.0; sizes.len()], &MetricSpec::Constant(1.0)).unwrap();
        let metric = MetricSpec::PerEdge((0..flat.n_edges()).map(|_| rng.uniform(0.5, 2.0)).collect());
        let spacing: Vec<f64> = sizes.iter().map(|_| rng.uniform(0.5, 1.5)).collect();
        let var = SpatialMesh::new(&sizes, &spacing, &metric).unwrap();
        out.push((format!("{sizes:?} flat"), flat, true));
        out.push((format!("{sizes:?} variable"), var, false));
    }
    out
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

#[test]
fn d_squared_vanishes_bitwise() {
    for (name, m, _) in lattices() {
        let cx = HodgeComplex::new(&m);
        assert_eq!((&cx.d1 * &cx.d0).amax(), 0.0, "{name}");
    }
}

#[test]
fn codifferential_is_weighted_adjoint() {
    let mut rng = LabRng::new(12);
    for (name, m, _) in lattices() {
        let cx = HodgeComplex::new(&m);
        for _ in 0..5 {
            let f0 = rng.vector(m.n_nodes());
            let f1 = rng.vector(m.n_edges());
            let lhs = cx.dot(1, &(&cx.d0 * &f0), &f1);
            let rhs = cx.dot(0, &f0, &(&cx.delta1 * &f1));
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{name}: {lhs} vs {rhs}");
            if m.dim() == 2 {
                let f2 = rng.vector(m.n_faces());
                let lhs = cx.dot(2, &(&cx.d1 * &f1), &f2);
                let rhs = cx.dot(1, &f1, &(&cx.delta2 * &f2));
                assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{name}");
            }
        }
    }
}

#[test]
fn laplacians_intertwine_across_d0() {
    for (name, m, flat) in lattices() {
        let cx = HodgeComplex::new(&m);
        let lhs = &cx.lap1 * &cx.d0;
        let rhs = &cx.d0 * &cx.lap0;
        if flat {
            assert_eq!((&lhs - &rhs).amax(), 0.0, "{name}");
        } else {
            assert!(rel(&lhs, &rhs) < 1e-14, "{name}: {:e}", rel(&lhs, &rhs));
        }
    }
}

#[test]
fn laplacians_are_self_adjoint_and_nonnegative() {
    for (name, m, _) in lattices() {
        let cx = HodgeComplex::new(&m);
        for j in 0..2 {
            let w = DMatrix::from_diagonal(cx.weights(j));
            let wl = &w * cx.laplacian(j);
            assert!(rel(&wl, &wl.transpose()) < 1e-13, "{name} degree {j}");
            let s = Spectrum::new(&cx, j, 1.0).unwrap();
            assert!(s.eigenvalues.iter().all(|&l| l >= 0.0), "{name}");
        }
    }
}

#[test]
fn fractional_powers_intertwine() {
    for (name, m, _) in lattices() {
        let cx = HodgeComplex::new(&m);
        for m2 in [0.25, 1.0, 25.0] {
            for alpha in [-1.0, -0.5, 0.5, 1.0] {
                for dir in [Direction::Exterior, Direction::Co] {
                    let r = intertwine_residual(&cx, 0, alpha, m2, dir).unwrap();
                    assert!(r < 1e-9, "{name} m2={m2} alpha={alpha} {dir:?}: {r:e}");
                }
            }
        }
    }
}

#[test]
fn intertwining_rejects_degree_one() {
    let cx = HodgeComplex::new(&common::circle(4, 1.0));
    assert!(intertwine_residual(&cx, 1, 0.5, 1.0, Direction::Exterior).is_err());
}

#[test]
fn circle_spectrum_matches_closed_form() {
    // Eigenvalues of the flat N-cycle are 2 − 2 cos(2πk/N), on both degrees.
    for n in [4usize, 8, 32] {
        let cx = HodgeComplex::new(&common::circle(n, 1.0));
        let mut expected: Vec<f64> =
            (0..n).map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for j in 0..2 {
            let s = Spectrum::new(&cx, j, 1.0).unwrap();
            for (a, b) in s.eigenvalues.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "N={n} j={j}");
            }
        }
    }
}

#[test]
fn uniform_metric_scales_spectrum() {
    // h ≡ c multiplies the flat Laplacian by 1/c.
    let flat = Spectrum::new(&HodgeComplex::new(&common::circle(8, 1.0)), 0, 1.0).unwrap();
    let scaled = Spectrum::new(&HodgeComplex::new(&common::circle(8, 4.0)), 0, 1.0).unwrap();
    for (a, b) in flat.eigenvalues.iter().zip(scaled.eigenvalues.iter()) {
        assert!((a / 4.0 - b).abs() < 1e-12);
    }
}
