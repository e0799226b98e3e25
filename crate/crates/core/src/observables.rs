//! Qubit embedding, target states, fidelities, and diagonal observables.
//!
//! A chain of n singly-occupied sites encodes n qubits: site i carries one
//! first-orbital atom whose spin is the qubit (↑ = 0, ↓ = 1). Everything
//! outside that subspace (doublons, second-orbital population, holes) is
//! non-computational and is removed by post-selection.

use num_complex::Complex64;

use crate::dynamics::ManyBodyState;
use crate::error::{Error, Result};
use crate::fock::{self, DiagonalKind, SPIN_DOWN, SPIN_UP};

/// Amplitudes over the 2^n computational z-basis states.
#[derive(Clone, Debug)]
pub struct QubitRegister {
    pub n_qubits: usize,
    /// amps[z], z a little-endian bit word (bit i = qubit i, ↓ = 1).
    pub amps: Vec<Complex64>,
}

impl QubitRegister {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Occupation bitmask of computational z-word `z`: one first-orbital atom
/// per site with spin z_i.
pub fn computational_bitmask(n_qubits: usize, z: u64) -> u64 {
    let mut mask = 0u64;
    for site in 0..n_qubits {
        let spin = if z >> site & 1 == 1 { SPIN_DOWN } else { SPIN_UP };
        mask |= 1 << fock::mode_index(site, spin, 0);
    }
    mask
}

/// Project a many-body state onto the computational subspace.
///
/// With modes ordered site-major, the fermionic basis kets of singly
/// occupied chains carry no extra Jordan-Wigner sign relative to the qubit
/// kets, so the projection is a plain amplitude lookup.
pub fn computational_amplitudes(state: &ManyBodyState) -> QubitRegister {
    let n = state.n_sites;
    let amps = (0..1u64 << n)
        .map(|z| state.amplitude(computational_bitmask(n, z)))
        .collect();
    QubitRegister { n_qubits: n, amps }
}

/// Graph-state targets: the vertices are the qubits, edges carry CZ gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    /// Disjoint pairs (0,1), (2,3), …: a product of Bell-type two-qubit
    /// cluster states, one per unit cell.
    BellPairs,
    /// The linear chain (0,1), (1,2), …, (n−2,n−1): a 1D cluster state.
    ChainCluster,
}

fn target_bonds(kind: TargetKind, n: usize) -> Result<Vec<(usize, usize)>> {
    match kind {
        TargetKind::BellPairs => {
            if !n.is_multiple_of(2) {
                return Err(Error::config("Bell-pair target needs an even qubit count"));
            }
            Ok((0..n / 2).map(|c| (2 * c, 2 * c + 1)).collect())
        }
        TargetKind::ChainCluster => {
            if n < 2 {
                return Err(Error::config("chain cluster needs at least two qubits"));
            }
            Ok((0..n - 1).map(|i| (i, i + 1)).collect())
        }
    }
}

/// |target⟩ = Π_edges CZ · Π|+⟩: amplitude 2^{−n/2}·(−1)^{Σ_edges z_i z_j}.
pub fn build_target(kind: TargetKind, n_qubits: usize) -> Result<QubitRegister> {
    let bonds = target_bonds(kind, n_qubits)?;
    let amp = 2.0_f64.powi(-(n_qubits as i32)).sqrt();
    let amps = (0..1u64 << n_qubits)
        .map(|z| {
            let sign = bonds
                .iter()
                .filter(|&&(i, j)| z >> i & 1 == 1 && z >> j & 1 == 1)
                .count();
            Complex64::new(if sign % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect();
    Ok(QubitRegister { n_qubits, amps })
}

/// |⟨target|ψ⟩|² with the amplitudes as they stand.
pub fn fidelity_raw(reg: &QubitRegister, target: &QubitRegister) -> f64 {
    overlap(&reg.amps, &target.amps, &vec![0.0; reg.n_qubits]).norm_sqr()
}

fn overlap(amps: &[Complex64], target: &[Complex64], phases: &[f64]) -> Complex64 {
    let n = phases.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (z, (a, t)) in amps.iter().zip(target).enumerate() {
        let mut ph = 0.0;
        for (i, phase) in phases.iter().enumerate().take(n) {
            if z >> i & 1 == 1 {
                ph += phase;
            }
        }
        acc += t.conj() * a * Complex64::from_polar(1.0, ph);
    }
    acc
}

/// max over single-qubit z-rotations of |⟨target| Π_i e^{iφ_i Z_i/…} |ψ⟩|².
///
/// Coordinate ascent with a closed-form per-qubit update; several
/// deterministic starting points guard against the product-state saddle at
/// all-zero phases. Returns the fidelity and the maximizing phases.
pub fn fidelity_optimized(reg: &QubitRegister, target: &QubitRegister) -> (f64, Vec<f64>) {
    let n = reg.n_qubits;
    assert_eq!(target.n_qubits, n);
    let seeds: Vec<Vec<f64>> = vec![
        vec![0.0; n],
        (0..n).map(|k| 0.1 * (1.7 * k as f64 + 0.3).cos()).collect(),
        (0..n).map(|k| 1.3 * (0.9 * k as f64 - 0.4).sin() + 0.7).collect(),
    ];
    let mut best = (fidelity_raw(reg, target), vec![0.0; n]);
    for mut phases in seeds {
        for _pass in 0..300 {
            let mut delta = 0.0;
            for k in 0..n {
                // S(φ_k) = A + e^{iφ_k}·B with the other phases held fixed
                let mut a = Complex64::new(0.0, 0.0);
                let mut b = Complex64::new(0.0, 0.0);
                for (z, (amp, t)) in reg.amps.iter().zip(&target.amps).enumerate() {
                    let mut ph = 0.0;
                    for (i, phase) in phases.iter().enumerate() {
                        if i != k && z >> i & 1 == 1 {
                            ph += phase;
                        }
                    }
                    let term = t.conj() * amp * Complex64::from_polar(1.0, ph);
                    if z >> k & 1 == 1 {
                        b += term;
                    } else {
                        a += term;
                    }
                }
                let new = if b.norm() < 1e-300 {
                    phases[k]
                } else {
                    (a * b.conj()).arg()
                };
                delta += (new - phases[k]).abs();
                phases[k] = new;
            }
            if delta < 1e-13 {
                break;
            }
        }
        let f = overlap(&reg.amps, &target.amps, &phases).norm_sqr();
        if f > best.0 {
            best = (f, phases);
        }
    }
    best
}

/// Post-selection summary of a many-body state against a target.
#[derive(Clone, Debug)]
pub struct PostSelected {
    /// Weight of the computational subspace.
    pub success_probability: f64,
    /// Phase-optimized fidelity without post-selection.
    pub fidelity: f64,
    /// Phase-optimized fidelity of the renormalized post-selected state.
    pub fidelity_post_selected: f64,
    pub phases: Vec<f64>,
}

/// Project onto the computational subspace, renormalize, and report both the
/// plain and the post-selected phase-optimized fidelity.
pub fn post_selected_fidelity(
    state: &ManyBodyState,
    target: &QubitRegister,
) -> Result<PostSelected> {
    let reg = computational_amplitudes(state);
    let p = reg.norm_sqr();
    if p < 1e-14 {
        return Err(Error::numeric(
            "post-selection success probability below 1e-14: no computational weight",
        ));
    }
    let (f, phases) = fidelity_optimized(&reg, target);
    Ok(PostSelected {
        success_probability: p,
        fidelity: f,
        fidelity_post_selected: f / p,
        phases,
    })
}

/// ⟨state| O |state⟩ for a diagonal figure-of-merit operator, summed over
/// sectors.
pub fn expectation(state: &ManyBodyState, kind: DiagonalKind) -> f64 {
    state
        .sectors
        .iter()
        .map(|slot| {
            fock::assemble_diagonal_observable(kind, &slot.basis).expectation(&slot.amps)
        })
        .sum()
}

/// Per-cell figure from a many-cell one: the n_cells-th root.
pub fn rescale_per_cell(value: f64, n_cells: usize) -> f64 {
    assert!(n_cells > 0);
    value.powf(1.0 / n_cells as f64)
}
