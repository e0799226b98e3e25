//! Fermionic many-body basis and sparse operator assembly.
//!
//! Modes are linearly indexed as m = site·4 + spin·2 + orbital with
//! spin ∈ {↑=0, ↓=1} and orbital ∈ {0 = ground band, 1 = first excited band}.
//! Occupation bitmasks put mode m at bit m; all fermionic signs follow from
//! this fixed ascending mode order (Jordan-Wigner strings count set bits
//! below the acted-on mode). The chain is open.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice_params::HubbardParams;

pub const SPIN_UP: usize = 0;
pub const SPIN_DOWN: usize = 1;

/// Linear mode index of (site, spin, orbital).
#[inline]
pub fn mode_index(site: usize, spin: usize, orbital: usize) -> usize {
    site * 4 + spin * 2 + orbital
}

/// Sign of applying c†_m (or c_m) to a bitmask: parity of occupied modes
/// below m.
#[inline]
pub fn jw_sign(state: u64, m: usize) -> f64 {
    if (state & ((1u64 << m) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Apply c†_m; returns None if the mode is already occupied.
#[inline]
pub fn apply_cdag(state: u64, m: usize) -> Option<(u64, f64)> {
    if state >> m & 1 == 1 {
        None
    } else {
        Some((state | 1 << m, jw_sign(state, m)))
    }
}

/// Apply c_m; returns None if the mode is empty.
#[inline]
pub fn apply_c(state: u64, m: usize) -> Option<(u64, f64)> {
    if state >> m & 1 == 0 {
        None
    } else {
        Some((state & !(1 << m), jw_sign(state, m)))
    }
}

/// One (N↑, N↓) symmetry block of the occupation basis.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub n_sites: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// Bitmasks in strictly ascending order.
    pub states: Vec<u64>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Position of a bitmask in the basis (binary search).
    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

fn combinations_bits(positions: &[usize], k: usize) -> Vec<u64> {
    fn rec(positions: &[usize], k: usize, start: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..=positions.len().saturating_sub(k) {
            rec(positions, k - 1, i + 1, acc | 1u64 << positions[i], out);
        }
    }
    let mut out = Vec::new();
    if k <= positions.len() {
        rec(positions, k, 0, 0, &mut out);
    }
    out
}

/// Enumerate the (N↑, N↓) sector for a chain of `n_sites` (two orbitals).
pub fn build_sector(n_sites: usize, n_up: usize, n_down: usize) -> Result<SectorBasis> {
    let per_spin = 2 * n_sites;
    if n_up > per_spin || n_down > per_spin {
        return Err(Error::config("particle number exceeds mode count"));
    }
    if 4 * n_sites > 64 {
        return Err(Error::config("chains beyond 16 sites exceed the 64-bit basis"));
    }
    let up_modes: Vec<usize> = (0..n_sites)
        .flat_map(|i| [mode_index(i, SPIN_UP, 0), mode_index(i, SPIN_UP, 1)])
        .collect();
    let down_modes: Vec<usize> = (0..n_sites)
        .flat_map(|i| [mode_index(i, SPIN_DOWN, 0), mode_index(i, SPIN_DOWN, 1)])
        .collect();
    let ups = combinations_bits(&up_modes, n_up);
    let downs = combinations_bits(&down_modes, n_down);
    let mut states = Vec::with_capacity(ups.len() * downs.len());
    for &u in &ups {
        for &d in &downs {
            states.push(u | d);
        }
    }
    states.sort_unstable();
    Ok(SectorBasis { n_sites, n_up, n_down, states })
}

/// Real-symmetric sparse operator on one sector, compressed row form.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
    pub hermitian: bool,
}

impl SparseOperator {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// y = O·x (complex amplitudes over the sector basis).
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            *yr = acc;
        });
    }

    /// ⟨x|O|x⟩ for hermitian O.
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest Gershgorin bound on |eigenvalue|, used for step sizing.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.val[k].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Model-term switches for Hamiltonian assembly.
///
/// The interaction defaults to the density-density channel only. The
/// inter-orbital exchange term U₁₂(c†_↑1 c_↑2 c†_↓2 c_↓1 + h.c.) is available
/// behind a flag but off by default: together with the density terms it makes
/// the interaction spin-rotation invariant, and an SU(2)-invariant interaction
/// cannot generate any Ising phase from the fully symmetric Π|+⟩ start (the
/// initial state is a maximal-spin state). The reported dynamics require the
/// density-only channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct AssemblyOptions {
    pub include_exchange: bool,
}


/// Assemble the full H + H′ + tilt Hamiltonian on one sector.
pub fn assemble_hamiltonian(
    p: &HubbardParams,
    sector: &SectorBasis,
    opts: AssemblyOptions,
) -> Result<SparseOperator> {
    if p.n_sites != sector.n_sites {
        return Err(Error::config("parameter set and sector disagree on n_sites"));
    }
    if p.n_orbitals != 2 {
        return Err(Error::config("operator assembly supports exactly two orbitals"));
    }
    let n = p.n_sites;
    let dim = sector.len();

    // directed hop terms (m_to, m_from, amplitude); both directions present
    let mut hops: Vec<(usize, usize, f64)> = Vec::new();
    for bond in 0..n - 1 {
        for spin in [SPIN_UP, SPIN_DOWN] {
            for alpha in 0..2 {
                for beta in 0..2 {
                    let t = if alpha == beta { p.hop[alpha] } else { 0.0 }
                        + p.hop_prime_at(bond, alpha, beta);
                    if t != 0.0 {
                        let m_left = mode_index(bond, spin, alpha);
                        let m_right = mode_index(bond + 1, spin, beta);
                        hops.push((m_left, m_right, t));
                        hops.push((m_right, m_left, t));
                    }
                }
            }
        }
    }

    let rows: Vec<Vec<(u32, f64)>> = sector
        .states
        .par_iter()
        .map(|&s| {
            let mut entries: Vec<(u32, f64)> = Vec::with_capacity(16);
            // diagonal: single-particle energies + density-density interaction
            let mut diag = 0.0;
            for site in 0..n {
                for spin in [SPIN_UP, SPIN_DOWN] {
                    for orb in 0..2 {
                        if s >> mode_index(site, spin, orb) & 1 == 1 {
                            diag += p.onsite(site, orb);
                        }
                    }
                }
                for alpha in 0..2 {
                    if s >> mode_index(site, SPIN_UP, alpha) & 1 == 0 {
                        continue;
                    }
                    for beta in 0..2 {
                        if s >> mode_index(site, SPIN_DOWN, beta) & 1 == 1 {
                            diag += p.u[alpha][beta];
                        }
                    }
                }
            }
            entries.push((sector.index_of(s).unwrap() as u32, diag));
            // hopping
            for &(m_to, m_from, t) in &hops {
                if let Some((s1, sg1)) = apply_c(s, m_from) {
                    if let Some((s2, sg2)) = apply_cdag(s1, m_to) {
                        let j = sector
                            .index_of(s2)
                            .expect("hopping conserves (N_up, N_down)");
                        entries.push((j as u32, t * sg1 * sg2));
                    }
                }
            }
            // optional inter-orbital exchange, U12 per site, hermitized
            if opts.include_exchange {
                let u12 = p.u[0][1];
                for site in 0..n {
                    for dir in 0..2 {
                        // dir 0: c†_↑0 c_↑1 c†_↓1 c_↓0 applied right to left;
                        // dir 1: hermitian conjugate
                        let (an1, cr1, an2, cr2) = if dir == 0 {
                            (
                                mode_index(site, SPIN_DOWN, 0),
                                mode_index(site, SPIN_DOWN, 1),
                                mode_index(site, SPIN_UP, 1),
                                mode_index(site, SPIN_UP, 0),
                            )
                        } else {
                            (
                                mode_index(site, SPIN_DOWN, 1),
                                mode_index(site, SPIN_DOWN, 0),
                                mode_index(site, SPIN_UP, 0),
                                mode_index(site, SPIN_UP, 1),
                            )
                        };
                        let step = apply_c(s, an1)
                            .and_then(|(s1, g1)| {
                                apply_cdag(s1, cr1).map(|(s2, g2)| (s2, g1 * g2))
                            })
                            .and_then(|(s2, g)| {
                                apply_c(s2, an2).map(|(s3, g3)| (s3, g * g3))
                            })
                            .and_then(|(s3, g)| {
                                apply_cdag(s3, cr2).map(|(s4, g4)| (s4, g * g4))
                            });
                        if let Some((s4, g)) = step {
                            let j = sector
                                .index_of(s4)
                                .expect("exchange conserves (N_up, N_down)");
                            entries.push((j as u32, u12 * g));
                        }
                    }
                }
            }
            entries.sort_unstable_by_key(|e| e.0);
            // merge duplicate columns
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0.0);
            merged
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let mut col = Vec::new();
    let mut val = Vec::new();
    for row in rows {
        for (c, v) in row {
            col.push(c);
            val.push(v);
        }
        row_ptr.push(col.len());
    }
    Ok(SparseOperator { dim, row_ptr, col, val, hermitian: true })
}

/// Diagonal figure-of-merit operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalKind {
    /// Number of sites whose total occupation (all spins and orbitals) is ≥ 2.
    DoubleOccupancySites,
    /// Number of atoms in the second orbital.
    SecondOrbitalCount,
}

/// Assemble D or N_2nd on a sector (both diagonal in the occupation basis).
pub fn assemble_diagonal_observable(kind: DiagonalKind, sector: &SectorBasis) -> SparseOperator {
    let dim = sector.len();
    let mut val = Vec::with_capacity(dim);
    for &s in &sector.states {
        let mut v = 0.0;
        match kind {
            DiagonalKind::DoubleOccupancySites => {
                for site in 0..sector.n_sites {
                    if (s >> (4 * site) & 0xF).count_ones() >= 2 {
                        v += 1.0;
                    }
                }
            }
            DiagonalKind::SecondOrbitalCount => {
                for site in 0..sector.n_sites {
                    for spin in [SPIN_UP, SPIN_DOWN] {
                        if s >> mode_index(site, spin, 1) & 1 == 1 {
                            v += 1.0;
                        }
                    }
                }
            }
        }
        val.push(v);
    }
    SparseOperator {
        dim,
        row_ptr: (0..=dim).collect(),
        col: (0..dim as u32).collect(),
        val,
        hermitian: true,
    }
}
