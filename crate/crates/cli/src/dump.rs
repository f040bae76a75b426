//! CSV tables: spectra, impulse responses, frequency content, energy traces.

use crate::scenario::{Scenario, ScenarioError};
use crate::suites::states::{proxy_state, single_mode_section};
use nalgebra::DVector;
use proca_lab_core::cauchy::{energy_unchecked, evolve_ultrastatic, make_constrained, SliceSpectra};
use proca_lab_core::green::{coefficient_location, Causality, GreenSolver};
use proca_lab_core::mesh::HodgeComplex;
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::OperatorKind;
use proca_lab_core::spectral::Spectrum;
use std::fmt::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Spectrum,
    Impulse,
    Frequency,
    EnergyTrace,
}

impl std::str::FromStr for Artifact {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectrum" => Ok(Self::Spectrum),
            "impulse" => Ok(Self::Impulse),
            "frequency" => Ok(Self::Frequency),
            "energy-trace" => Ok(Self::EnergyTrace),
            other => Err(ScenarioError(format!(
                "unknown artifact {other:?}; expected spectrum, impulse, frequency or energy-trace"
            ))),
        }
    }
}

fn missing(what: &str) -> ScenarioError {
    ScenarioError(format!("this artifact needs a {what} in the scenario"))
}

/// Produce the CSV text of one artifact. `degree` selects the Laplacian for spectra.
pub fn dump(sc: &Scenario, artifact: Artifact, degree: usize) -> Result<String, ScenarioError> {
    match artifact {
        Artifact::Spectrum => {
            let mesh = sc.build_meshes()?.into_iter().next().ok_or_else(|| missing("mesh"))?;
            Ok(Spectrum::new(&HodgeComplex::new(&mesh), degree, sc.mass_sq)?.to_csv())
        }
        Artifact::Impulse => {
            let g = Arc::new(sc.green.as_ref().ok_or_else(|| missing("green grid"))?.build()?);
            let solver = GreenSolver::new(g.clone(), OperatorKind::Proca, Causality::Retarded)?;
            let mut f = DVector::zeros(g.n_dofs());
            f[g.a1_index(g.nt() / 2, 0)] = 1.0;
            let u = solver.solve(&f)?;
            let mut out = String::from("t,position,component,value\n");
            for (i, v) in u.iter().enumerate() {
                let (t, x) = coefficient_location(&g, i);
                let pos: Vec<String> = x.iter().map(|c| format!("{c}")).collect();
                let comp = if g.is_temporal(i) { "a0" } else { "a1" };
                writeln!(out, "{},{},{comp},{v:.12e}", t * g.dt(), pos.join(";")).expect("write to string");
            }
            Ok(out)
        }
        Artifact::Frequency => {
            let spec = sc.state.as_ref().ok_or_else(|| missing("state grid"))?;
            let st = proxy_state(spec, sc.proxy.nt)?;
            let (f, _) = single_mode_section(&st, sc.proxy.nt / 2);
            Ok(st.positive_frequency_spectrum(&f, &f, sc.proxy.n_tau)?.to_csv())
        }
        Artifact::EnergyTrace => {
            let mesh = sc.build_meshes()?.into_iter().next().ok_or_else(|| missing("mesh"))?;
            let sp = SliceSpectra::new(HodgeComplex::new(&mesh), sc.mass_sq)?;
            let mut rng = LabRng::new(sc.seed);
            let ne = mesh.n_edges();
            let f2 = (mesh.dim() == 2).then(|| rng.vector(mesh.n_faces()));
            let data = make_constrained(&sp.complex, sc.mass_sq, &rng.vector(ne), f2.as_ref(), &rng.vector(ne))?;
            let mut out = String::from("t,E_density,E_spectral,r1,r2\n");
            let steps = (sc.cauchy.horizon / 0.1).round() as usize;
            for k in 0..=steps {
                let t = 0.1 * k as f64;
                let d = evolve_ultrastatic(&data, t, &sp)?;
                let (e1, e2) = energy_unchecked(&sp, &d);
                writeln!(out, "{t:.1},{e1:.15e},{e2:.15e},{:.6e},{:.6e}", d.r1, d.r2).expect("write to string");
            }
            Ok(out)
        }
    }
}
