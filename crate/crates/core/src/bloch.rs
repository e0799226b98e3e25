//! Single-particle problem of the periodic lattice: Bloch bands by plane-wave
//! diagonalization and real, localized Wannier orbitals.
//!
//! Lengths are in units of the lattice constant `a`, momenta in units of
//! k_L = π/a, energies in E_r. In these units the plane-wave Hamiltonian at
//! quasimomentum q has kinetic diagonal (q + 2n)² and potential off-diagonal
//! V₀/4 between adjacent reciprocal vectors; site centers (potential minima)
//! sit at x = 1/2 + i.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::units::PhysicalConfig;

/// Default plane-wave cutoff (reciprocal vectors each side of zero).
pub const DEFAULT_CUTOFF: usize = 16;
/// Default number of quasimomentum grid points.
pub const DEFAULT_NQ: usize = 64;
/// Default number of lattice periods spanned by the real-space grid.
pub const DEFAULT_N_PERIODS: usize = 17;
/// Real-space grid points per lattice period.
pub const POINTS_PER_PERIOD: usize = 128;

/// Bloch bands on a uniform quasimomentum grid over the first Brillouin zone.
#[derive(Clone, Debug)]
pub struct BandStructure {
    /// Quasimomenta in units of k_L, uniform over [-1, 1).
    pub q_grid: Vec<f64>,
    /// energies[band][iq] in E_r; bands ordered by energy.
    pub energies: Vec<Vec<f64>>,
    /// bloch_coeffs[iq][band] = plane-wave coefficients c_n, n = -cutoff..=cutoff.
    pub bloch_coeffs: Vec<Vec<Vec<f64>>>,
    /// Max reciprocal-lattice index retained.
    pub plane_wave_cutoff: usize,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    /// Mean of E_α(q) over the Brillouin zone (the Wannier on-site energy ε_α).
    pub fn band_average(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        e.iter().sum::<f64>() / e.len() as f64
    }

    /// Nearest-neighbor Fourier component of the dispersion,
    /// J_αα = (1/N_q) Σ_q E_α(q)·cos(πq); equals ⟨w_{0α}|H₀|w_{1α}⟩.
    pub fn hopping(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        e.iter()
            .zip(&self.q_grid)
            .map(|(en, q)| en * (std::f64::consts::PI * q).cos())
            .sum::<f64>()
            / e.len() as f64
    }
}

/// Real-space Wannier orbitals of the lowest bands, all centered on site 0.
#[derive(Clone, Debug)]
pub struct WannierSet {
    /// Uniform grid in units of a, centered on the site-0 center x = 1/2.
    pub grid: Vec<f64>,
    /// orbitals[band][k]: real w_α(x_k), normalized with Σ w² Δx = 1.
    pub orbitals: Vec<Vec<f64>>,
    /// Site centers x_i = 1/2 + i covered by the grid.
    pub home_site_positions: Vec<f64>,
    /// Grid points per lattice period (Δx = 1/points_per_period).
    pub points_per_period: usize,
}

impl WannierSet {
    pub fn dx(&self) -> f64 {
        1.0 / self.points_per_period as f64
    }

    /// Quadrature overlap ⟨w_α | w_β shifted by `shift` sites⟩.
    pub fn overlap(&self, a: usize, b: usize, shift: usize) -> f64 {
        let ppp = self.points_per_period;
        let off = shift * ppp;
        let wa = &self.orbitals[a];
        let wb = &self.orbitals[b];
        let mut s = 0.0;
        for k in off..wa.len() {
            s += wa[k] * wb[k - off];
        }
        s * self.dx()
    }
}

/// Diagonalize the plane-wave Hamiltonian on the quasimomentum grid.
///
/// Returns the lowest `n_orbitals + 2` bands (the extra bands are kept for
/// convergence checks only).
pub fn solve_bands(cfg: &PhysicalConfig, cutoff: usize, n_q: usize) -> Result<BandStructure> {
    cfg.validate()?;
    if cutoff < 8 {
        return Err(Error::config("plane-wave cutoff must be >= 8"));
    }
    if n_q < 32 || !n_q.is_multiple_of(2) {
        return Err(Error::config("n_q must be even and >= 32"));
    }
    let n_bands = cfg.n_orbitals + 2;
    let dim = 2 * cutoff + 1;
    let q_grid: Vec<f64> = (0..n_q).map(|j| -1.0 + 2.0 * j as f64 / n_q as f64).collect();

    let per_q: Vec<(Vec<f64>, Vec<Vec<f64>>)> = q_grid
        .par_iter()
        .map(|&q| {
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..dim {
                let n = i as f64 - cutoff as f64;
                h[(i, i)] = (q + 2.0 * n).powi(2);
                if i + 1 < dim {
                    h[(i, i + 1)] = cfg.v0 / 4.0;
                    h[(i + 1, i)] = cfg.v0 / 4.0;
                }
            }
            let eig = h.symmetric_eigen();
            // sort ascending by eigenvalue
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let evs: Vec<f64> = order.iter().take(n_bands).map(|&i| eig.eigenvalues[i]).collect();
            let vecs: Vec<Vec<f64>> = order
                .iter()
                .take(n_bands)
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect();
            (evs, vecs)
        })
        .collect();

    let mut energies = vec![vec![0.0; n_q]; n_bands];
    let mut bloch_coeffs = Vec::with_capacity(n_q);
    for (iq, (evs, vecs)) in per_q.into_iter().enumerate() {
        for b in 0..n_bands {
            energies[b][iq] = evs[b];
        }
        bloch_coeffs.push(vecs);
    }
    for b in 0..n_bands.saturating_sub(1) {
        for iq in 0..n_q {
            if energies[b][iq] > energies[b + 1][iq] {
                return Err(Error::numeric(format!(
                    "band ordering violated at q={} between bands {} and {}",
                    q_grid[iq], b, b + 1
                )));
            }
        }
    }
    Ok(BandStructure { q_grid, energies, bloch_coeffs, plane_wave_cutoff: cutoff })
}

/// Width (units of a) of the Gaussian test function used to fix the Bloch gauge.
const GAUGE_SIGMA: f64 = 0.15;

/// Build real Wannier orbitals by gauge-fixed Bloch summation.
///
/// The gauge of each Bloch function is fixed by projection onto a localized
/// test function of the band's parity at the site-0 center (Gaussian for even
/// bands, Gaussian×(x−x₀) for odd bands); this yields the standard real,
/// definite-parity 1D construction.
pub fn build_wannier(bands: &BandStructure, n_periods: usize) -> Result<WannierSet> {
    if n_periods.is_multiple_of(2) || n_periods < 11 {
        return Err(Error::config("n_periods must be odd and >= 11"));
    }
    let ppp = POINTS_PER_PERIOD;
    let nx = n_periods * ppp;
    let cutoff = bands.plane_wave_cutoff as i64;
    let grid: Vec<f64> = (0..nx)
        .map(|k| 0.5 + (k as f64 - (nx / 2) as f64) / ppp as f64)
        .collect();
    let n_bands = bands.n_bands().min(4);

    let orbitals: Result<Vec<Vec<f64>>> = (0..n_bands)
        .into_par_iter()
        .map(|band| {
            let mut w = vec![num_complex::Complex64::new(0.0, 0.0); nx];
            for (iq, &q) in bands.q_grid.iter().enumerate() {
                let c = &bands.bloch_coeffs[iq][band];
                // psi_q(x) = sum_n c_n exp(i π (q + 2n) x)
                let mut psi = vec![num_complex::Complex64::new(0.0, 0.0); nx];
                for (i, &cn) in c.iter().enumerate() {
                    let kk = std::f64::consts::PI * (q + 2.0 * (i as i64 - cutoff) as f64);
                    for (k, &x) in grid.iter().enumerate() {
                        psi[k] += cn * num_complex::Complex64::from_polar(1.0, kk * x);
                    }
                }
                // gauge projection onto the parity-matched test function
                let mut f = num_complex::Complex64::new(0.0, 0.0);
                for (k, &x) in grid.iter().enumerate() {
                    let u = x - 0.5;
                    let mut g = (-(u / GAUGE_SIGMA).powi(2)).exp();
                    if band % 2 == 1 {
                        g *= u;
                    }
                    f += g * psi[k];
                }
                f /= ppp as f64;
                if f.norm() < 1e-12 {
                    return Err(Error::numeric(format!(
                        "Wannier gauge fixing failed at q={} for band {} (test-function projection vanished)",
                        q, band
                    )));
                }
                let phase = f.conj() / f.norm();
                for k in 0..nx {
                    w[k] += phase * psi[k];
                }
            }
            let norm = (w.iter().map(|z| z.norm_sqr()).sum::<f64>() / ppp as f64).sqrt();
            let max_imag = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / norm;
            if max_imag > 1e-8 {
                return Err(Error::numeric(format!(
                    "Wannier orbital for band {} not real after gauge fixing (max imag {:.2e})",
                    band, max_imag
                )));
            }
            Ok(w.iter().map(|z| z.re / norm).collect())
        })
        .collect();

    let half = n_periods / 2;
    let home_site_positions: Vec<f64> =
        (-(half as i64)..=half as i64).map(|i| 0.5 + i as f64).collect();
    Ok(WannierSet { grid, orbitals: orbitals?, home_site_positions, points_per_period: ppp })
}
