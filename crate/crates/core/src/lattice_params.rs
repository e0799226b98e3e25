//! Ab initio coefficients of the second-quantized model: base Hubbard part
//! (ε_α, J_αβ, U_αβ), superlattice part (ε′_{i,α}, J′_{i,αβ}), tilt, plus
//! perturbative diagnostics and the resonance search.

use serde::Serialize;

use crate::bloch::{self, BandStructure, WannierSet};
use crate::error::{Error, Result};
use crate::units::{self, PhysicalConfig, HBAR};

/// Every coefficient of H + H′ + tilt, in E_r units.
///
/// Site dependence of the superlattice terms has period 2, so ε′ and J′ are
/// stored per site/bond parity and expanded through the accessors.
#[derive(Clone, Debug, Serialize)]
pub struct HubbardParams {
    /// On-site orbital energies ε_α (band averages).
    pub eps: Vec<f64>,
    /// Intra-orbital nearest-neighbor hopping J_αα.
    pub hop: Vec<f64>,
    /// Inter-orbital hopping of the base lattice (vanishes by orthogonality).
    pub hop_cross: f64,
    /// Contact interactions U_αβ, symmetric in (α, β).
    pub u: Vec<Vec<f64>>,
    /// ε′_{i,α} for i = 0, 1 (period 2 in the site index).
    pub eps_prime: [Vec<f64>; 2],
    /// J′_{i,αβ} for bonds starting at even/odd i; indexed [i%2][α][β],
    /// where α lives on site i and β on site i+1.
    pub hop_prime: [Vec<Vec<f64>>; 2],
    /// Tilt energy per site, g·a.
    pub tilt_ga: f64,
    pub n_sites: usize,
    pub n_orbitals: usize,
}

impl HubbardParams {
    pub fn eps_prime_at(&self, site: usize, orbital: usize) -> f64 {
        self.eps_prime[site % 2][orbital]
    }

    /// J′ on bond (i, i+1) moving an atom between orbital β at site i+1 and
    /// orbital α at site i.
    pub fn hop_prime_at(&self, bond: usize, alpha: usize, beta: usize) -> f64 {
        self.hop_prime[bond % 2][alpha][beta]
    }

    pub fn tilt_at(&self, site: usize) -> f64 {
        self.tilt_ga * site as f64
    }

    /// Full diagonal single-particle energy at (site, orbital).
    pub fn onsite(&self, site: usize, orbital: usize) -> f64 {
        self.eps[orbital] + self.eps_prime_at(site, orbital) + self.tilt_at(site)
    }

    pub fn n_bonds(&self) -> usize {
        self.n_sites - 1
    }
}

/// Perturbative strength estimates around the doublon resonance.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbativeDiagnostics {
    /// Bond-resolved gap Δ_i = ε₂−ε₁ + ε′_{i,2} − ε′_{i+1,1} − g·a
    /// (energy cost of moving the site-i+1 atom into orbital 2 at site i,
    /// before interactions).
    pub delta: Vec<f64>,
    /// Resonance residual Δ_i + U₁₂ per bond.
    pub resonance_residual: Vec<f64>,
    /// J_Ising estimate |J′₁₂|²/(Δ+U₁₂) − |J′₁₂|²/Δ per bond; `None` when the
    /// bond is within the on-resonance guard (perturbation theory invalid).
    pub j_ising_est: Vec<Option<f64>>,
    /// J_Heisenberg estimate J₁₁²/U₁₁ (proportionality constant 1).
    pub j_heisenberg_est: f64,
}

/// Residual magnitude below which a bond is flagged as on-resonance.
pub const RESONANCE_GUARD: f64 = 1e-4;

/// Compute ε_α, J_αα and U_αβ from the band structure and Wannier integrals.
///
/// U_αβ = (4πħ²a_S/M)·∫|w_α|²|w_β|² d³r with the transverse directions frozen
/// to the lowest-band orbital of the same lattice depth (separable factor
/// squared).
pub fn compute_base_params(
    w: &WannierSet,
    bands: &BandStructure,
    cfg: &PhysicalConfig,
) -> Result<HubbardParams> {
    cfg.validate()?;
    let n_orb = cfg.n_orbitals;
    if w.orbitals.len() < n_orb || bands.n_bands() < n_orb {
        return Err(Error::config("need Wannier orbitals and bands for every retained orbital"));
    }
    let eps: Vec<f64> = (0..n_orb).map(|b| bands.band_average(b)).collect();
    let hop: Vec<f64> = (0..n_orb).map(|b| bands.hopping(b)).collect();
    let hop_cross = cross_band_hopping(bands, 0, 1);

    // dimensionless quartic overlaps I_αβ = ∫ w̃_α² w̃_β² dx̃  (x̃ = x/a)
    let dx = w.dx();
    let quartic = |a: usize, b: usize| -> f64 {
        w.orbitals[a]
            .iter()
            .zip(&w.orbitals[b])
            .map(|(wa, wb)| wa * wa * wb * wb)
            .sum::<f64>()
            * dx
    };
    let i_perp = quartic(0, 0);
    let er = units::recoil_energy(cfg).joules;
    let a = cfg.lattice_const_a;
    let g3d = 4.0 * std::f64::consts::PI * HBAR * HBAR * cfg.scattering_len_as / cfg.atom_mass;
    let mut u = vec![vec![0.0; n_orb]; n_orb];
    for (alpha, row) in u.iter_mut().enumerate() {
        for (beta, cell) in row.iter_mut().enumerate() {
            *cell = g3d * (quartic(alpha, beta) / a) * (i_perp / a).powi(2) / er;
        }
    }

    Ok(HubbardParams {
        eps,
        hop,
        hop_cross,
        u,
        eps_prime: [vec![0.0; n_orb], vec![0.0; n_orb]],
        hop_prime: [vec![vec![0.0; n_orb]; n_orb], vec![vec![0.0; n_orb]; n_orb]],
        tilt_ga: cfg.tilt_ga,
        n_sites: cfg.n_sites,
        n_orbitals: n_orb,
    })
}

/// ⟨w_{0α}|H₀|w_{1β}⟩ evaluated in the Bloch representation; vanishes for
/// α ≠ β by band orthogonality at fixed quasimomentum.
fn cross_band_hopping(bands: &BandStructure, alpha: usize, beta: usize) -> f64 {
    let n_q = bands.q_grid.len();
    let mut s = 0.0;
    for (iq, &q) in bands.q_grid.iter().enumerate() {
        let dot: f64 = bands.bloch_coeffs[iq][alpha]
            .iter()
            .zip(&bands.bloch_coeffs[iq][beta])
            .map(|(x, y)| x * y)
            .sum();
        s += (std::f64::consts::PI * q).cos() * bands.energies[beta][iq] * dot;
    }
    s / n_q as f64
}

/// Fill in the superlattice coefficients ε′_{i,α} and J′_{i,αβ} by real-space
/// quadrature of V′(x) = (V₀′/2)·cos(πx/a + θ) against the Wannier orbitals.
pub fn compute_superlattice_params(
    params: &mut HubbardParams,
    w: &WannierSet,
    cfg: &PhysicalConfig,
) -> Result<()> {
    let n_orb = params.n_orbitals;
    if w.orbitals.len() < n_orb {
        return Err(Error::config("WannierSet does not cover every retained orbital"));
    }
    let ppp = w.points_per_period;
    let dx = w.dx();
    for i in 0..2 {
        // superlattice sampled in the frame of site i (orbital center at x = 1/2)
        let vp: Vec<f64> = w
            .grid
            .iter()
            .map(|&x| {
                cfg.v0p / 2.0 * (std::f64::consts::PI * (x + i as f64) + cfg.theta).cos()
            })
            .collect();
        for alpha in 0..n_orb {
            let wa = &w.orbitals[alpha];
            params.eps_prime[i][alpha] =
                wa.iter().zip(&vp).map(|(v, p)| v * v * p).sum::<f64>() * dx;
            for beta in 0..n_orb {
                let wb = &w.orbitals[beta];
                // neighbor orbital w_β(x − 1): shift by one period, zero-padded
                let mut s = 0.0;
                for k in ppp..wa.len() {
                    s += wa[k] * vp[k] * wb[k - ppp];
                }
                params.hop_prime[i][alpha][beta] = s * dx;
            }
        }
    }
    Ok(())
}

/// Convenience: solve bands, build Wannier orbitals and produce the full
/// parameter set for `cfg` with default numerical settings.
pub fn ab_initio_params(cfg: &PhysicalConfig) -> Result<(BandStructure, WannierSet, HubbardParams)> {
    let bands = bloch::solve_bands(cfg, bloch::DEFAULT_CUTOFF, bloch::DEFAULT_NQ)?;
    let w = bloch::build_wannier(&bands, bloch::DEFAULT_N_PERIODS)?;
    let mut p = compute_base_params(&w, &bands, cfg)?;
    compute_superlattice_params(&mut p, &w, cfg)?;
    Ok((bands, w, p))
}

/// Perturbative Ising/Heisenberg strengths and the bond-resolved resonance
/// residual.
pub fn perturbative_ising(p: &HubbardParams) -> PerturbativeDiagnostics {
    let gap = p.eps[1] - p.eps[0];
    let u12 = p.u[0][1];
    let mut delta = Vec::with_capacity(p.n_bonds());
    let mut resonance_residual = Vec::with_capacity(p.n_bonds());
    let mut j_ising_est = Vec::with_capacity(p.n_bonds());
    for bond in 0..p.n_bonds() {
        let d = gap + p.eps_prime_at(bond, 1) - p.eps_prime_at(bond + 1, 0) - p.tilt_ga;
        let r = d + u12;
        let jp = p.hop_prime_at(bond, 0, 1).abs();
        let est = if r.abs() < RESONANCE_GUARD || d.abs() < RESONANCE_GUARD {
            None // on-resonance; perturbative estimate invalid
        } else {
            Some(jp * jp / r - jp * jp / d)
        };
        delta.push(d);
        resonance_residual.push(r);
        j_ising_est.push(est);
    }
    let j_heisenberg_est = if p.u[0][0].abs() > 0.0 { p.hop[0] * p.hop[0] / p.u[0][0] } else { 0.0 };
    PerturbativeDiagnostics { delta, resonance_residual, j_ising_est, j_heisenberg_est }
}

/// Which experimental knob the resonance search adjusts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResonanceKnob {
    /// Superlattice depth V₀′ (recoil units).
    V0p,
    /// Scattering length a_S (meters).
    ScatteringLength,
}

/// Residual Δ + U₁₂ on `bond` for the given configuration (full ab initio
/// parameter chain).
pub fn bond_residual(cfg: &PhysicalConfig, bond: usize) -> Result<f64> {
    let (_, _, p) = ab_initio_params(cfg)?;
    if bond >= p.n_bonds() {
        return Err(Error::config(format!("bond {} out of range", bond)));
    }
    Ok(perturbative_ising(&p).resonance_residual[bond])
}

/// Root-find the knob value at which the residual Δ+U₁₂ on `target_bond`
/// equals `target_residual` (bisection; residual tolerance 1e-6 E_r).
///
/// Returns (knob value, achieved residual). The caller supplies a bracket in
/// knob units within which the shifted residual changes sign.
pub fn find_resonance(
    knob: ResonanceKnob,
    target_bond: usize,
    cfg: &PhysicalConfig,
    bracket: (f64, f64),
    target_residual: f64,
) -> Result<(f64, f64)> {
    let apply = |value: f64| -> PhysicalConfig {
        let mut c = cfg.clone();
        match knob {
            ResonanceKnob::V0p => c.v0p = value,
            ResonanceKnob::ScatteringLength => c.scattering_len_as = value,
        }
        c
    };
    let f = |value: f64| -> Result<f64> {
        Ok(bond_residual(&apply(value), target_bond)? - target_residual)
    };
    let (mut lo, mut hi) = bracket;
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo * fhi > 0.0 {
        return Err(Error::numeric(format!(
            "no resonance in bracket: residual-target is {:.6} at {:.6} and {:.6} at {:.6}",
            flo, lo, fhi, hi
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < 1e-6 {
            return Ok((mid, fm + target_residual));
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Err(Error::numeric("resonance bisection did not reach tolerance in 200 iterations"))
}
