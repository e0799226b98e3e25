//! Independent oracles shared by the integration tests.
//!
//! Everything here is built from first principles without calling into the
//! library's own solvers: Mathieu characteristic values by continued
//! fractions, dense Jordan-Wigner operators on the full Fock space, and a
//! dense eigendecomposition propagator.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use ocs_core::lattice_params::HubbardParams;
use ocs_core::{fock, SectorBasis};

// ---------------------------------------------------------------------------
// Mathieu characteristic values
// ---------------------------------------------------------------------------

/// Tail ratio of the three-term recurrence with denominators `den(r)`,
/// evaluated by backward recurrence from depth `top`:
/// G_r = q / (den(r) − q·G_{r+1}).
fn tail_ratio(q: f64, a: f64, den: impl Fn(usize, f64) -> f64, start: usize, top: usize) -> f64 {
    let mut g = 0.0;
    for r in (start..=top).rev() {
        g = q / (den(r, a) - q * g);
    }
    g
}

/// Characteristic determinant for a₀ (even, period π):
/// a − 2q²/(a − 4 − q·G₂) with G from den(r) = a − (2r)².
fn f_a0(a: f64, q: f64) -> f64 {
    let g2 = tail_ratio(q, a, |r, a| a - (2.0 * r as f64).powi(2), 2, 60);
    a - 2.0 * q * q / (a - 4.0 - q * g2)
}

/// Characteristic determinant for b₁ (odd, period 2π):
/// a − 1 + q − q·G₁ with G from den(r) = a − (2r+1)².
fn f_b1(a: f64, q: f64) -> f64 {
    let g = tail_ratio(q, a, |r, a| a - (2.0 * r as f64 + 1.0).powi(2), 1, 60);
    a - 1.0 + q - q * g
}

/// Characteristic determinant for a₁ (even, period 2π): a − 1 − q − q·G₁.
fn f_a1(a: f64, q: f64) -> f64 {
    let g = tail_ratio(q, a, |r, a| a - (2.0 * r as f64 + 1.0).powi(2), 1, 60);
    a - 1.0 - q - q * g
}

/// Characteristic determinant for b₂ (odd, period π): a − 4 − q·G₂.
fn f_b2(a: f64, q: f64) -> f64 {
    let g2 = tail_ratio(q, a, |r, a| a - (2.0 * r as f64).powi(2), 2, 60);
    a - 4.0 - q * g2
}

/// Lowest root of `f` above `a_min`, by grid scan + bisection to 1e-12.
/// Pole crossings of the continued fraction are rejected by requiring the
/// bracketing values to stay bounded.
fn lowest_root(f: impl Fn(f64) -> f64, a_min: f64, a_max: f64) -> f64 {
    let steps = 4000;
    let h = (a_max - a_min) / steps as f64;
    let mut prev = f(a_min);
    for i in 1..=steps {
        let a = a_min + i as f64 * h;
        let cur = f(a);
        if prev.is_finite() && cur.is_finite() && prev * cur < 0.0 && prev.abs() < 1e3 && cur.abs() < 1e3
        {
            let (mut lo, mut hi, mut flo) = (a - h, a, prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 || hi - lo < 1e-13 {
                    return mid;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev = cur;
    }
    panic!("no root of characteristic equation in [{a_min}, {a_max}]");
}

/// Band edges (E₁(0), E₁(π/a), E₂(π/a), E₂(0)) of −ψ″ + (V₀/2)cos(2x)ψ in
/// recoil units: the Mathieu characteristic values (a₀, b₁, a₁, b₂) at
/// q = V₀/4.
pub fn mathieu_band_edges(v0: f64) -> [f64; 4] {
    let q = v0 / 4.0;
    let a0 = lowest_root(|a| f_a0(a, q), -2.0 * q - 2.0, 1.0);
    let b1 = lowest_root(|a| f_b1(a, q), a0 - 0.5, q * 2.0 + 4.0);
    let a1 = lowest_root(|a| f_a1(a, q), a0 - 0.5, q * 2.0 + 6.0);
    let b2 = lowest_root(|a| f_b2(a, q), b1 + 1e-6, q * 2.0 + 10.0);
    [a0, b1, a1, b2]
}

// ---------------------------------------------------------------------------
// Dense Jordan-Wigner construction on the full Fock space
// ---------------------------------------------------------------------------

/// Dense c†_m on the 2^n_modes Fock space (basis index = occupation bitmask).
/// The Jordan-Wigner string is computed here from scratch so the construction
/// shares no sign code with the library.
pub fn dense_cdag(n_modes: usize, m: usize) -> DMatrix<f64> {
    let dim = 1usize << n_modes;
    let mut out = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        if s >> m & 1 == 0 {
            let mut sign = 1.0;
            for lower in 0..m {
                if s >> lower & 1 == 1 {
                    sign = -sign;
                }
            }
            out[(s | 1 << m, s)] = sign;
        }
    }
    out
}

/// Dense full-Fock Hamiltonian assembled from dense operator products —
/// a construction path independent of the sparse sector assembly.
pub fn dense_full_fock_h(p: &HubbardParams) -> DMatrix<f64> {
    let n_modes = 4 * p.n_sites;
    let dim = 1usize << n_modes;
    let cd: Vec<DMatrix<f64>> = (0..n_modes).map(|m| dense_cdag(n_modes, m)).collect();
    let c: Vec<DMatrix<f64>> = cd.iter().map(|m| m.transpose()).collect();
    let num: Vec<DMatrix<f64>> = (0..n_modes).map(|m| &cd[m] * &c[m]).collect();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for site in 0..p.n_sites {
        for spin in [fock::SPIN_UP, fock::SPIN_DOWN] {
            for orb in 0..2 {
                h += p.onsite(site, orb) * &num[fock::mode_index(site, spin, orb)];
            }
        }
        for alpha in 0..2 {
            for beta in 0..2 {
                h += p.u[alpha][beta]
                    * (&num[fock::mode_index(site, fock::SPIN_UP, alpha)]
                        * &num[fock::mode_index(site, fock::SPIN_DOWN, beta)]);
            }
        }
    }
    for bond in 0..p.n_bonds() {
        for spin in [fock::SPIN_UP, fock::SPIN_DOWN] {
            for alpha in 0..2 {
                for beta in 0..2 {
                    let t = if alpha == beta { p.hop[alpha] } else { 0.0 }
                        + p.hop_prime_at(bond, alpha, beta);
                    if t != 0.0 {
                        let a = fock::mode_index(bond, spin, alpha);
                        let b = fock::mode_index(bond + 1, spin, beta);
                        let term = &cd[a] * &c[b];
                        h += t * (&term + term.transpose());
                    }
                }
            }
        }
    }
    h
}

/// Embed a sector-sparse operator into the full Fock space for comparison.
pub fn embed_sector(
    op: &ocs_core::SparseOperator,
    sector: &SectorBasis,
    n_modes: usize,
) -> DMatrix<f64> {
    let dim = 1usize << n_modes;
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..op.dim {
        let sr = sector.states[r] as usize;
        for k in op.row_ptr[r]..op.row_ptr[r + 1] {
            let sc = sector.states[op.col[k] as usize] as usize;
            out[(sr, sc)] = op.val[k];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Dense eigendecomposition propagator
// ---------------------------------------------------------------------------

/// Propagator by full diagonalization: ψ(t) = U·exp(−iΛκt)·Uᵀ·ψ(0).
pub struct DensePropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl DensePropagator {
    pub fn new(h: DMatrix<f64>) -> Self {
        let eig = h.symmetric_eigen();
        Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors }
    }

    pub fn apply(&self, psi0: &[Complex64], kappa_t: f64) -> Vec<Complex64> {
        let dim = psi0.len();
        assert_eq!(dim, self.eigenvalues.len());
        // coefficients in the eigenbasis
        let mut coeff = vec![Complex64::new(0.0, 0.0); dim];
        for (k, ck) in coeff.iter_mut().enumerate() {
            for (i, p) in psi0.iter().enumerate() {
                *ck += self.eigenvectors[(i, k)] * p;
            }
        }
        for (k, ck) in coeff.iter_mut().enumerate() {
            *ck *= Complex64::from_polar(1.0, -self.eigenvalues[k] * kappa_t);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (i, oi) in out.iter_mut().enumerate() {
            for (k, ck) in coeff.iter().enumerate() {
                *oi += self.eigenvectors[(i, k)] * ck;
            }
        }
        out
    }
}
