//! Configuration parsing and resolution.
//!
//! The on-disk format is sectioned key-value text (TOML syntax) with units
//! spelled out in the key names. Every key is optional except the scenario
//! name; the selected scenario supplies the remaining defaults, and the
//! fully resolved configuration is echoed into the run manifest.

use std::path::Path;

use anyhow::{bail, Context};
use ocs_core::{bloch, units, PhysicalConfig};
use serde::{Deserialize, Serialize};

/// Raw file contents; unknown keys anywhere are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    #[serde(default)]
    pub physical: PhysicalSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub atom_mass_amu: Option<f64>,
    pub lattice_const_nm: Option<f64>,
    pub scattering_len_nm: Option<f64>,
    pub v0_recoil: Option<f64>,
    pub v0p_recoil: Option<f64>,
    pub theta_rad: Option<f64>,
    pub tilt_ga_recoil: Option<f64>,
    pub n_sites: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub duration_ms: Option<f64>,
    pub shift_time_ms: Option<f64>,
    pub second_duration_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub plane_wave_cutoff: Option<usize>,
    pub n_q: Option<usize>,
    pub n_periods: Option<usize>,
    pub krylov_tolerance: Option<f64>,
    pub max_krylov_dim: Option<usize>,
    pub sample_interval_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<String>,
}

/// The built-in experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Parameter tables of the deep working point (V₀=15, V₀′=4).
    Fig1Params,
    /// Two-site Bell-pair generation traces (V₀=10, V₀′=6.2).
    Fig3Bell,
    /// Tilted pair-wise scheme, n ∈ {4, 6} (V₀=18, V₀′=4).
    Fig5Pairwise,
    /// Pair-wise scheme with a cell shift, chain-cluster trace.
    Fig5cShift,
}

impl Scenario {
    pub fn parse(name: &str) -> anyhow::Result<Self> {
        Ok(match name {
            "fig1-params" => Scenario::Fig1Params,
            "fig3-bell" => Scenario::Fig3Bell,
            "fig5-pairwise" => Scenario::Fig5Pairwise,
            "fig5c-shift" => Scenario::Fig5cShift,
            other => bail!(
                "unknown scenario '{other}' (expected fig1-params, fig3-bell, \
                 fig5-pairwise or fig5c-shift)"
            ),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig1Params => "fig1-params",
            Scenario::Fig3Bell => "fig3-bell",
            Scenario::Fig5Pairwise => "fig5-pairwise",
            Scenario::Fig5cShift => "fig5c-shift",
        }
    }
}

// serialized under the same name the config file accepts, so a manifest's
// resolved configuration can be fed straight back in
impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl Scenario {
    /// Scenario-specific defaults for everything the file leaves unset.
    fn default_physical(&self) -> PhysicalConfig {
        match self {
            Scenario::Fig1Params => PhysicalConfig {
                v0: 15.0,
                v0p: 4.0,
                tilt_ga: 0.0,
                ..PhysicalConfig::bell_point()
            },
            Scenario::Fig3Bell => PhysicalConfig::bell_point(),
            Scenario::Fig5Pairwise => PhysicalConfig::pairwise_point(4),
            Scenario::Fig5cShift => PhysicalConfig::pairwise_point(4),
        }
    }

    fn default_duration_ms(&self) -> f64 {
        match self {
            Scenario::Fig1Params => 0.0,
            Scenario::Fig3Bell => 4.0,
            Scenario::Fig5Pairwise => 5.0,
            Scenario::Fig5cShift => 3.7,
        }
    }
}

/// Fully resolved configuration: every default filled in, ready to run and
/// to be reproduced from the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub scenario: Scenario,
    pub atom_mass_amu: f64,
    pub lattice_const_nm: f64,
    pub scattering_len_nm: f64,
    pub v0_recoil: f64,
    pub v0p_recoil: f64,
    pub theta_rad: f64,
    pub tilt_ga_recoil: f64,
    pub n_sites: usize,
    pub duration_ms: f64,
    pub shift_time_ms: f64,
    pub second_duration_ms: f64,
    pub plane_wave_cutoff: usize,
    pub n_q: usize,
    pub n_periods: usize,
    pub krylov_tolerance: f64,
    pub max_krylov_dim: usize,
    pub sample_interval_ms: f64,
    pub output_directory: String,
}

impl ResolvedConfig {
    pub fn physical(&self) -> PhysicalConfig {
        PhysicalConfig {
            atom_mass: self.atom_mass_amu * units::AMU,
            lattice_const_a: self.lattice_const_nm * 1e-9,
            scattering_len_as: self.scattering_len_nm * 1e-9,
            v0: self.v0_recoil,
            v0p: self.v0p_recoil,
            theta: self.theta_rad,
            tilt_ga: self.tilt_ga_recoil,
            n_sites: self.n_sites,
            n_orbitals: 2,
        }
    }

    pub fn krylov(&self) -> ocs_core::KrylovOptions {
        ocs_core::KrylovOptions {
            tolerance: self.krylov_tolerance,
            max_dim: self.max_krylov_dim,
            ..ocs_core::KrylovOptions::default()
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.physical().validate().context("physical block")?;
        if self.sample_interval_ms.is_nan() || self.sample_interval_ms <= 0.0 {
            bail!("sample_interval_ms must be positive");
        }
        if self.duration_ms < 0.0 || self.shift_time_ms <= 0.0 || self.second_duration_ms <= 0.0 {
            bail!("schedule times must be non-negative (durations of shift rounds positive)");
        }
        if !(self.krylov_tolerance > 0.0 && self.krylov_tolerance < 1e-3) {
            bail!("krylov_tolerance must be in (0, 1e-3)");
        }
        if self.max_krylov_dim < 8 || self.max_krylov_dim > 200 {
            bail!("max_krylov_dim must be in [8, 200]");
        }
        Ok(())
    }
}

/// Parse a config file and fill every unset key from the scenario defaults.
pub fn load(path: &Path) -> anyhow::Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: FileConfig = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    resolve(file)
}

pub fn resolve(file: FileConfig) -> anyhow::Result<ResolvedConfig> {
    let scenario = Scenario::parse(
        file.scenario
            .as_deref()
            .context("config must set `scenario`")?,
    )?;
    let d = scenario.default_physical();
    let p = &file.physical;
    let s = &file.schedule;
    let n = &file.numerics;
    let resolved = ResolvedConfig {
        scenario,
        atom_mass_amu: p.atom_mass_amu.unwrap_or(d.atom_mass / units::AMU),
        lattice_const_nm: p.lattice_const_nm.unwrap_or(d.lattice_const_a * 1e9),
        scattering_len_nm: p.scattering_len_nm.unwrap_or(d.scattering_len_as * 1e9),
        v0_recoil: p.v0_recoil.unwrap_or(d.v0),
        v0p_recoil: p.v0p_recoil.unwrap_or(d.v0p),
        theta_rad: p.theta_rad.unwrap_or(d.theta),
        tilt_ga_recoil: p.tilt_ga_recoil.unwrap_or(d.tilt_ga),
        n_sites: p.n_sites.unwrap_or(d.n_sites),
        duration_ms: s.duration_ms.unwrap_or(scenario.default_duration_ms()),
        shift_time_ms: s.shift_time_ms.unwrap_or(ocs_core::dynamics::DEFAULT_SHIFT_TIME_MS),
        second_duration_ms: s
            .second_duration_ms
            .or(s.shift_time_ms)
            .unwrap_or(ocs_core::dynamics::DEFAULT_SHIFT_TIME_MS),
        plane_wave_cutoff: n.plane_wave_cutoff.unwrap_or(bloch::DEFAULT_CUTOFF),
        n_q: n.n_q.unwrap_or(bloch::DEFAULT_NQ),
        n_periods: n.n_periods.unwrap_or(bloch::DEFAULT_N_PERIODS),
        krylov_tolerance: n.krylov_tolerance.unwrap_or(1e-12),
        max_krylov_dim: n.max_krylov_dim.unwrap_or(40),
        sample_interval_ms: n.sample_interval_ms.unwrap_or(0.01),
        output_directory: file.output.directory.unwrap_or_else(|| "out".into()),
    };
    resolved.validate()?;
    Ok(resolved)
}
