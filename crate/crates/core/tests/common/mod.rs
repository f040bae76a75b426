#![allow(dead_code)]

use nalgebra::DVector;
use proca_lab_core::mesh::{MetricSpec, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::SpacetimeGrid;
use std::sync::Arc;

pub fn circle(n: usize, h: f64) -> SpatialMesh {
    SpatialMesh::new(&[n], &[1.0], &MetricSpec::Constant(h)).unwrap()
}

/// Flat 1+1 grid with 16 spatial cells and 48 slices.
pub fn grid_16x48() -> Arc<SpacetimeGrid> {
    Arc::new(SpacetimeGrid::ultrastatic(&circle(16, 1.0), 48, 0.5, None, 1.0).unwrap())
}

/// Random section supported strictly between the margins.
pub fn margined(grid: &SpacetimeGrid, rng: &mut LabRng) -> DVector<f64> {
    rng.vector(grid.n_dofs()).component_mul(&grid.margin_mask())
}

/// Random section supported on slices `[lo, hi)`.
pub fn supported(grid: &SpacetimeGrid, rng: &mut LabRng, lo: usize, hi: usize) -> DVector<f64> {
    rng.vector(grid.n_dofs()).component_mul(&grid.slice_mask(lo, hi))
}

/// Grids `g₀` (h ≡ 1), `g_χ` (smoothstep over times 8..16) and `g₁` (h ≡ 1.5) on 16×48.
pub fn moller_grids() -> (Arc<SpacetimeGrid>, Arc<SpacetimeGrid>, Arc<SpacetimeGrid>) {
    use proca_lab_core::spacetime::ChiProfile;
    let m0 = circle(16, 1.0);
    let m1 = circle(16, 1.5);
    let g0 = SpacetimeGrid::ultrastatic(&m0, 48, 0.5, None, 1.0).unwrap();
    let gc = SpacetimeGrid::new(&m0, &m1, &ChiProfile::Smoothstep { start: 8.0, end: 16.0 }, 48, 0.5, None, 1.0).unwrap();
    let g1 = SpacetimeGrid::ultrastatic(&m1, 48, 0.5, None, 1.0).unwrap();
    (Arc::new(g0), Arc::new(gc), Arc::new(g1))
}
