//! Sparse sector Hamiltonians vs a dense full-Fock construction.

mod common;

use ocs_core::{
    assemble_hamiltonian, build_sector, fock, AssemblyOptions, PhysicalConfig,
};

/// Every (N↑, N↓) sector of the two-site chain, embedded in the 256-dim full
/// Fock space, must agree entrywise to 1e-12 with the dense Jordan-Wigner
/// product construction.
#[test]
fn sparse_matches_dense_full_fock() {
    let cfg = PhysicalConfig::bell_point();
    let p = ocs_core::ab_initio_params(&cfg).unwrap().2;
    let n_modes = 4 * p.n_sites;
    let dense = common::dense_full_fock_h(&p);

    let mut covered = 0usize;
    for n_up in 0..=4 {
        for n_down in 0..=4 {
            let sector = build_sector(2, n_up, n_down).unwrap();
            let h = assemble_hamiltonian(&p, &sector, AssemblyOptions::default()).unwrap();
            let emb = common::embed_sector(&h, &sector, n_modes);
            // compare rows belonging to this sector
            for &s in &sector.states {
                for sc in 0..1usize << n_modes {
                    let d = dense[(s as usize, sc)];
                    let e = emb[(s as usize, sc)];
                    assert!(
                        (d - e).abs() < 1e-12,
                        "H[{s},{sc}] sparse {e} vs dense {d} in sector ({n_up},{n_down})"
                    );
                }
            }
            covered += sector.len();
        }
    }
    assert_eq!(covered, 256, "sectors must tile the full Fock space");
}

/// The dense construction confirms that sectors do not couple: matrix
/// elements between different (N↑, N↓) blocks vanish identically.
#[test]
fn dense_h_is_block_diagonal_in_sectors() {
    let cfg = PhysicalConfig::bell_point();
    let p = ocs_core::ab_initio_params(&cfg).unwrap().2;
    let dense = common::dense_full_fock_h(&p);
    let count = |s: u64, spin: usize| -> usize {
        (0..2)
            .flat_map(|site| (0..2).map(move |orb| fock::mode_index(site, spin, orb)))
            .filter(|&m| s >> m & 1 == 1)
            .count()
    };
    for r in 0..256u64 {
        for c in 0..256u64 {
            if count(r, fock::SPIN_UP) != count(c, fock::SPIN_UP)
                || count(r, fock::SPIN_DOWN) != count(c, fock::SPIN_DOWN)
            {
                assert_eq!(dense[(r as usize, c as usize)], 0.0);
            }
        }
    }
}
