//! Physical constants, experiment knobs, and unit conversions.
//!
//! Everything downstream works in recoil energies (`E_r`) and milliseconds;
//! SI quantities only appear here, at the boundary. The primary lattice is
//! V(x) = (V₀/2)·cos(2πx/a) (period `a`, minima at x = a/2 + i·a) and the
//! long lattice is V′(x) = (V₀′/2)·cos(πx/a + θ) (period 2a), so the depth
//! parameters V₀, V₀′ are peak-to-trough depths and E_r = ħ²k_L²/2M with
//! k_L = π/a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of ⁴⁰K, kg.
pub const MASS_K40: f64 = 39.963_984_8 * AMU;

/// All experimental knobs, in explicit physical units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Atom mass, kg.
    pub atom_mass: f64,
    /// Lattice constant a, m.
    pub lattice_const_a: f64,
    /// s-wave scattering length a_S, m (sign included).
    pub scattering_len_as: f64,
    /// Primary lattice depth V₀, in recoil energies.
    pub v0: f64,
    /// Long-lattice (superlattice) depth V₀′, in recoil energies.
    pub v0p: f64,
    /// Relative phase θ of the long lattice, radians.
    pub theta: f64,
    /// Tilt energy per site g·a, in recoil energies (sign selects direction).
    pub tilt_ga: f64,
    /// Number of lattice sites in the chain.
    pub n_sites: usize,
    /// Number of retained orbitals per site (2 unless extending the model).
    pub n_orbitals: usize,
}

impl PhysicalConfig {
    /// The two-site, Bell-pair working point: V₀=10 E_r, V₀′=6.2 E_r,
    /// a_S=−50 nm, θ=π/2, no tilt.
    pub fn bell_point() -> Self {
        Self {
            atom_mass: MASS_K40,
            lattice_const_a: 413e-9,
            scattering_len_as: -50e-9,
            v0: 10.0,
            v0p: 6.2,
            theta: std::f64::consts::FRAC_PI_2,
            tilt_ga: 0.0,
            n_sites: 2,
            n_orbitals: 2,
        }
    }

    /// The tilted pair-wise working point (V₀=18 E_r, V₀′=4 E_r). The
    /// scattering length still needs retuning onto the intra-cell resonance;
    /// see `lattice_params::find_resonance`.
    pub fn pairwise_point(n_sites: usize) -> Self {
        Self {
            v0: 18.0,
            v0p: 4.0,
            tilt_ga: 0.5,
            n_sites,
            ..Self::bell_point()
        }
    }

    /// Validate the invariants every module relies on.
    pub fn validate(&self) -> Result<()> {
        if self.atom_mass.is_nan() || self.atom_mass <= 0.0 {
            return Err(Error::config("atom_mass must be > 0"));
        }
        if self.lattice_const_a.is_nan() || self.lattice_const_a <= 0.0 {
            return Err(Error::config("lattice_const_a must be > 0"));
        }
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::config("n_sites must be even and >= 2"));
        }
        if self.n_orbitals < 2 {
            return Err(Error::config("n_orbitals must be >= 2"));
        }
        if self.v0.is_nan() || self.v0 < 0.0 || self.v0p.is_nan() || self.v0p < 0.0 {
            return Err(Error::config("lattice depths must be >= 0"));
        }
        if !self.theta.is_finite() || !self.tilt_ga.is_finite() || !self.scattering_len_as.is_finite() {
            return Err(Error::config("theta, tilt_ga, scattering_len_as must be finite"));
        }
        Ok(())
    }
}

/// Recoil energy with conversion views. Derived from (mass, a); never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoilEnergy {
    /// E_r in joules.
    pub joules: f64,
}

impl RecoilEnergy {
    /// E_r in Hz (E_r / h).
    pub fn hz(&self) -> f64 {
        self.joules / H_PLANCK
    }

    /// Angular frequency per millisecond: multiply an energy in E_r by this
    /// to get the phase in radians accumulated in one ms.
    pub fn rad_per_ms(&self) -> f64 {
        self.joules / HBAR * 1e-3
    }

    /// Convert an energy in E_r units to joules.
    pub fn to_joules(&self, e_recoil: f64) -> f64 {
        e_recoil * self.joules
    }

    /// Convert an energy in joules to E_r units.
    pub fn from_joules(&self, e_joules: f64) -> f64 {
        e_joules / self.joules
    }
}

/// E_r = ħ²k_L²/(2M) with k_L = π/a.
pub fn recoil_energy(cfg: &PhysicalConfig) -> RecoilEnergy {
    let k_l = std::f64::consts::PI / cfg.lattice_const_a;
    RecoilEnergy {
        joules: HBAR * HBAR * k_l * k_l / (2.0 * cfg.atom_mass),
    }
}
