use super::Context;
use crate::report::{Check, Comparison::*};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proca_lab_core::cauchy::{make_constrained, spanning_set};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::SpacetimeGrid;
use proca_lab_core::states::*;
use proca_lab_core::{LabError, Result};
use std::sync::Arc;

fn margined(g: &SpacetimeGrid, rng: &mut LabRng) -> DVector<f64> {
    rng.vector(g.n_dofs()).component_mul(&g.margin_mask())
}

/// A section on slices around `center` built from one `Δ₁` eigenmode.
pub fn single_mode_section(st: &QuasifreeState, center: usize) -> (DVector<f64>, f64) {
    let g = st.grid();
    let s1 = &st.spectra().s1;
    let k = (0..s1.len())
        .filter(|&k| s1.eigenvalues[k] > 0.0)
        .min_by(|&a, &b| (s1.eigenvalues[a] - 2.0).abs().total_cmp(&(s1.eigenvalues[b] - 2.0).abs()))
        .unwrap_or(0);
    let mode = s1.eigenvectors.column(k);
    let mut f = DVector::zeros(g.n_dofs());
    for sl in center - 2..=center + 2 {
        let envelope = 1.0 / (1.0 + (sl as f64 - center as f64).powi(2));
        for e in 0..g.n_edges() {
            f[g.a1_index(sl, e)] = mode[e] * envelope;
        }
    }
    (f, (s1.eigenvalues[k] + st.spectra().mass_sq()).sqrt())
}

pub fn proxy_state(spec: &proca_lab_core::spacetime::GridSpec, nt: usize) -> Result<QuasifreeState> {
    let mesh = spec.mesh0.build()?;
    let g = SpacetimeGrid::ultrastatic(&mesh, nt, spec.dt, None, spec.mass_sq)?;
    QuasifreeState::new(Arc::new(g))
}

pub fn run(ctx: &Context) -> Result<Vec<Check>> {
    let sc = ctx.scenario;
    let tol = &ctx.tolerances;
    let spec = sc.state.as_ref().expect("validated");
    let g = Arc::new(spec.build()?);
    let st = QuasifreeState::new(g.clone())?;
    let cx = &st.spectra().complex;
    let m2 = g.mass_sq();
    let mut rng = ctx.rng(6);

    let rayleigh = spanning_set(cx, m2)?
        .iter()
        .map(|d| Ok(st.mu_form(d, d)? / d.to_vector().norm_squared()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let ne = cx.mesh.n_edges();
    let f2 = |rng: &mut LabRng| (cx.mesh.dim() == 2).then(|| rng.vector(cx.mesh.n_faces()));
    let mut violations = 0usize;
    for _ in 0..sc.batteries.cauchy_schwarz {
        let a = make_constrained(cx, m2, &rng.vector(ne), f2(&mut rng).as_ref(), &rng.vector(ne))?;
        let b = make_constrained(cx, m2, &rng.vector(ne), f2(&mut rng).as_ref(), &rng.vector(ne))?;
        if cauchy_schwarz_slack(&st, &a, &b)? < 0.0 {
            violations += 1;
        }
    }

    let (mut ccr, mut shell, mut fp, mut loc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..sc.batteries.pairs {
        let f = margined(&g, &mut rng);
        let h = margined(&g, &mut rng);
        let a = st.two_point(&f, &h)?;
        let b = st.two_point(&h, &f)?;
        let c = g.pairing(&st.propagator().apply(&f)?, &h)?;
        let d = a.value() - b.value();
        ccr = ccr.max((d.im - c).abs() / c.abs().max(1.0)).max(d.re.abs() / a.re.abs().max(1.0));
        let w = rng.vector(g.n_dofs()).component_mul(&g.slice_mask(g.margin() + 2, g.nt() - g.margin() - 2));
        let pw = g.proca().apply(&w);
        let scale = (st.two_point(&f, &f)?.re * st.two_point(&pw, &pw)?.re).sqrt().max(1.0);
        shell = shell.max(st.two_point(&f, &pw)?.value().norm() / scale);
        shell = shell.max(st.two_point(&pw, &f)?.value().norm() / scale);
        let lo = (g.margin() + 3) as f64 * g.dt();
        let hi = (g.nt() - g.margin() - 4) as f64 * g.dt();
        let (tf, th) = (st.localize(&f, (lo, hi))?, st.localize(&h, (lo, hi))?);
        let scale = (st.two_point(&f, &f)?.re * st.two_point(&h, &h)?.re).sqrt();
        loc = loc.max((st.two_point(&tf, &th)?.value() - a.value()).norm() / scale);
    }
    for _ in 0..sc.batteries.fp_pairs {
        let (r, s) = st.fp_equivalence(&margined(&g, &mut rng), &margined(&g, &mut rng))?;
        fp = fp.max(r / s);
    }

    let n = sc.batteries.gram.max(4);
    let prepared = (0..n).map(|_| st.prepare(&margined(&g, &mut rng))).collect::<Result<Vec<_>>>()?;
    let w = DMatrix::from_fn(n, n, |i, j| st.two_point_prepared(&prepared[i], &prepared[j]).value());
    let (min, norm) = hermitian_extremes(&gram(n, |i, j| Ok(w[(i, j)]))?);
    let four = w[(0, 1)] * w[(2, 3)] + w[(0, 2)] * w[(1, 3)] + w[(0, 3)] * w[(1, 2)];
    let wick = (wick_n_point(&w.view((0, 0), (4, 4)).into_owned()) - four).norm()
        + wick_n_point(&w.view((0, 0), (3, 3)).into_owned()).norm();

    let mut split = 0.0f64;
    let cplx = |rng: &mut LabRng, k: usize| DVector::from_fn(k, |_, _| Complex64::new(rng.symmetric(), rng.symmetric()));
    for j in 0..2 {
        let k = cx.mesh.n_cells(j);
        let wts = cx.weights(j);
        let x = KgData { a: cplx(&mut rng, k), pi: cplx(&mut rng, k) };
        let y = KgData { a: cplx(&mut rng, k), pi: cplx(&mut rng, k) };
        let plus = st.kg_covariance(Frequency::Positive, j, &x, &y)?;
        let minus = st.kg_covariance(Frequency::Negative, j, &x, &y)?;
        let sigma: Complex64 = (0..k).map(|i| (x.a[i].conj() * y.pi[i] - x.pi[i].conj() * y.a[i]) * wts[i]).sum();
        split = split.max((plus - minus - Complex64::i() * sigma).norm() / plus.norm().max(1.0));
    }

    let long = proxy_state(spec, sc.proxy.nt)?;
    let center = sc.proxy.nt / 2;
    let (mode, omega) = single_mode_section(&long, center);
    let single = long.positive_frequency_spectrum(&mode, &mode, sc.proxy.n_tau)?;
    let bin = 2.0 * std::f64::consts::PI / (sc.proxy.n_tau as f64 * long.grid().dt());
    let mut broad = 0.0f64;
    for _ in 0..3 {
        let f = rng
            .vector(long.grid().n_dofs())
            .component_mul(&long.grid().slice_mask(center - 4, center + 4));
        broad = broad.max(long.positive_frequency_spectrum(&f, &f, sc.proxy.n_tau)?.negative_ratio);
    }
    if !single.peak_frequency.is_finite() {
        return Err(LabError::InvalidArgument("empty frequency table".into()));
    }

    Ok(vec![
        tol.check("states", "mu-min-rayleigh", "mu-positive", rayleigh, 0.0, Above),
        tol.check("states", "cauchy-schwarz-violations", "mu-dominates-sigma", violations as f64, 0.0, AtMost),
        tol.check("states", "ccr", "ccr", ccr, 1e-9, Below),
        tol.check("states", "on-shell", "on-shell", shell, 1e-8, Below),
        tol.check("states", "wick-four-point", "quasifree-pairings", wick, 0.0, AtMost),
        tol.check("states", "gram-min-eigenvalue", "two-point-positivity", min / norm, -1e-9, Above),
        tol.check("states", "kg-covariance-split", "kg-covariance-difference", split, 1e-10, Below),
        tol.check("states", "kg-equivalence", "kg-route-equivalence", fp, 1e-8, Below),
        tol.check("states", "localization", "localization-invariance", loc, 1e-8, Below),
        tol.check("states", "single-mode-negative-ratio", "positive-frequency-proxy", single.negative_ratio, 0.01, Below),
        tol.check("states", "single-mode-peak-offset", "positive-frequency-proxy", (single.peak_frequency - omega).abs() / bin, 0.5, AtMost),
        tol.check("states", "broadband-negative-ratio", "positive-frequency-proxy", broad, 0.05, Below),
    ])
}
