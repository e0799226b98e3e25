//! Parameter sweeps: the scenario re-evaluated over a knob grid, parallel
//! across grid points.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;

use ocs_core::{
    dynamics, lattice_params, observables, units, AssemblyOptions, PhysicalConfig, TargetKind,
};

use crate::config::ResolvedConfig;
use crate::manifest::RunManifest;
use crate::scenario::params_for;

/// Knobs that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Long-lattice phase θ (radians).
    Theta,
    /// Superlattice depth V₀′ (recoil units).
    V0p,
    /// Scattering length a_S (nanometers).
    ScatteringLength,
    /// Tilt per site g·a (recoil units).
    Tilt,
}

impl SweepParam {
    pub fn parse(name: &str) -> anyhow::Result<Self> {
        Ok(match name {
            "theta" => SweepParam::Theta,
            "v0p" => SweepParam::V0p,
            "as" => SweepParam::ScatteringLength,
            "g" => SweepParam::Tilt,
            other => bail!("unknown sweep parameter '{other}' (expected theta, v0p, as or g)"),
        })
    }

    fn apply(&self, phys: &PhysicalConfig, value: f64) -> PhysicalConfig {
        let mut c = phys.clone();
        match self {
            SweepParam::Theta => c.theta = value,
            SweepParam::V0p => c.v0p = value,
            SweepParam::ScatteringLength => c.scattering_len_as = value * 1e-9,
            SweepParam::Tilt => c.tilt_ga = value,
        }
        c
    }
}

struct PointResult {
    value: f64,
    outcome: anyhow::Result<(Option<f64>, f64, Option<f64>)>, // (J_Ising est, residual, peak F)
}

/// Run the scenario's parameter chain per grid point; `with_fidelity` also
/// evolves the configured schedule and records the peak optimized fidelity.
pub fn run_sweep(
    r: &ResolvedConfig,
    param: SweepParam,
    from: f64,
    to: f64,
    points: usize,
    with_fidelity: bool,
) -> anyhow::Result<PathBuf> {
    if points == 0 {
        bail!("sweep needs at least one grid point");
    }
    let started = Instant::now();
    let dir = PathBuf::from(&r.output_directory);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let phys = r.physical();
    let grid: Vec<f64> = if points == 1 {
        vec![from]
    } else {
        (0..points)
            .map(|k| from + (to - from) * k as f64 / (points - 1) as f64)
            .collect()
    };

    let results: Vec<PointResult> = grid
        .par_iter()
        .map(|&value| PointResult {
            value,
            outcome: evaluate_point(r, &param.apply(&phys, value), with_fidelity),
        })
        .collect();

    let header = if with_fidelity {
        "param_value j_ising_est_recoil residual_recoil peak_fidelity"
    } else {
        "param_value j_ising_est_recoil residual_recoil"
    };
    let mut rows = Vec::with_capacity(results.len());
    let mut first_failure: Option<anyhow::Error> = None;
    for p in results {
        match p.outcome {
            Ok((est, residual, peak)) => {
                let est_s = est.map_or_else(|| "on-resonance".into(), |v| format!("{:.10e}", v));
                let mut line = format!("{:.10e} {} {:.10e}", p.value, est_s, residual);
                if let Some(f) = peak {
                    line.push_str(&format!(" {:.10e}", f));
                }
                rows.push(line);
            }
            Err(e) => {
                rows.push(format!("{:.10e} FAILED", p.value));
                if first_failure.is_none() {
                    first_failure = Some(e.context(format!("sweep point {}", p.value)));
                }
            }
        }
    }

    // partial results are preserved on disk even when a point failed
    let mut text = String::from(header);
    text.push('\n');
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    let path = dir.join("sweep.dat");
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;

    let mut manifest = RunManifest::new(r.clone());
    manifest.add_output(&path)?;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    if let Some(e) = first_failure {
        return Err(e);
    }
    Ok(path)
}

fn evaluate_point(
    r: &ResolvedConfig,
    phys: &PhysicalConfig,
    with_fidelity: bool,
) -> anyhow::Result<(Option<f64>, f64, Option<f64>)> {
    let p = params_for(r, phys)?;
    let diag = lattice_params::perturbative_ising(&p);
    let peak = if with_fidelity && r.duration_ms > 0.0 {
        let kappa = units::recoil_energy(phys).rad_per_ms();
        let init = dynamics::prepare_plus_product(phys.n_sites)?;
        let target = ocs_core::build_target(TargetKind::BellPairs, phys.n_sites)?;
        let n_samples = (r.duration_ms / r.sample_interval_ms + 1e-9).floor() as usize;
        let times: Vec<f64> = (1..=n_samples).map(|k| k as f64 * r.sample_interval_ms).collect();
        let mut best = 0.0_f64;
        dynamics::evolve_with(
            &init,
            &[(r.duration_ms, p)],
            kappa,
            &times,
            &r.krylov(),
            AssemblyOptions::default(),
            |_, state| {
                let reg = observables::computational_amplitudes(state);
                let (f, _) = observables::fidelity_optimized(&reg, &target);
                best = best.max(f);
            },
        )?;
        Some(best)
    } else {
        None
    };
    Ok((diag.j_ising_est[0], diag.resonance_residual[0], peak))
}
