//! Randomized invariants: norm and sector-weight conservation, hermiticity,
//! fidelity inequalities, and the perturbative sign flip at the resonance.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use ocs_core::{
    assemble_hamiltonian, build_sector, dynamics, fidelity_optimized, fidelity_raw,
    lattice_params, observables, units, AssemblyOptions, HubbardParams, KrylovOptions,
    PhysicalConfig, QubitRegister, ResonanceKnob, TargetKind,
};

fn arb_params(n_sites: usize) -> impl Strategy<Value = HubbardParams> {
    (
        prop::collection::vec(-3.0..3.0f64, 2),          // eps
        prop::collection::vec(-0.5..0.5f64, 2),          // hop
        prop::collection::vec(-2.0..2.0f64, 4),          // u (symmetrized)
        prop::collection::vec(-3.0..3.0f64, 4),          // eps_prime
        prop::collection::vec(-0.2..0.2f64, 8),          // hop_prime
        -0.6..0.6f64,                                    // tilt
    )
        .prop_map(move |(eps, hop, u, ep, hp, tilt)| HubbardParams {
            eps,
            hop,
            hop_cross: 0.0,
            u: vec![vec![u[0], u[1]], vec![u[1], u[3]]],
            eps_prime: [vec![ep[0], ep[1]], vec![ep[2], ep[3]]],
            hop_prime: [
                vec![vec![hp[0], hp[1]], vec![hp[2], hp[3]]],
                vec![vec![hp[4], hp[5]], vec![hp[6], hp[7]]],
            ],
            tilt_ga: tilt,
            n_sites,
            n_orbitals: 2,
        })
}

fn arb_register(n: usize) -> impl Strategy<Value = QubitRegister> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map(
        "nonzero register",
        move |pairs| {
            let amps: Vec<Complex64> =
                pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                return None;
            }
            Some(QubitRegister {
                n_qubits: n,
                amps: amps.into_iter().map(|a| a / norm).collect(),
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_conserves_norm_and_sector_weights(
        p in arb_params(3),
        duration in 0.1..2.0f64,
    ) {
        let kappa = 45.97565493984133; // rad/ms per E_r for the default atom
        let init = dynamics::prepare_plus_product(3).unwrap();
        let w0 = init.sector_weights();
        let out = dynamics::evolve_with(
            &init, &[(duration, p)], kappa, &[],
            &KrylovOptions::default(), AssemblyOptions::default(), |_, _| {},
        ).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-9);
        for ((k0, v0), (k1, v1)) in w0.iter().zip(&out.sector_weights()) {
            prop_assert_eq!(k0, k1);
            prop_assert!((v0 - v1).abs() < 1e-12, "sector {:?}: {} vs {}", k0, v0, v1);
        }
    }

    #[test]
    fn assembled_hamiltonians_are_hermitian(p in arb_params(3)) {
        for (n_up, n_down) in [(1, 2), (2, 1), (3, 0)] {
            let sector = build_sector(3, n_up, n_down).unwrap();
            let h = assemble_hamiltonian(&p, &sector, AssemblyOptions::default()).unwrap();
            let mut dense = nalgebra::DMatrix::<f64>::zeros(h.dim, h.dim);
            for r in 0..h.dim {
                for k in h.row_ptr[r]..h.row_ptr[r + 1] {
                    dense[(r, h.col[k] as usize)] = h.val[k];
                }
            }
            let asym = (&dense - dense.transpose()).abs().max();
            prop_assert!(asym < 1e-12);
        }
    }

    #[test]
    fn optimization_never_decreases_fidelity(reg in arb_register(3)) {
        let target = ocs_core::build_target(TargetKind::ChainCluster, 3).unwrap();
        let raw = fidelity_raw(&reg, &target);
        let (opt, _) = fidelity_optimized(&reg, &target);
        prop_assert!(opt >= raw - 1e-12);
    }

    #[test]
    fn post_selection_inequality(
        p in arb_params(2),
        duration in 0.1..1.5f64,
    ) {
        let kappa = 45.97565493984133;
        let init = dynamics::prepare_plus_product(2).unwrap();
        let out = dynamics::evolve_with(
            &init, &[(duration, p)], kappa, &[],
            &KrylovOptions::default(), AssemblyOptions::default(), |_, _| {},
        ).unwrap();
        let target = ocs_core::build_target(TargetKind::BellPairs, 2).unwrap();
        if let Ok(ps) = observables::post_selected_fidelity(&out, &target) {
            // F ≤ F_PS and F ≤ F_PS·P_suc + (1 − P_suc), within slack
            prop_assert!(ps.fidelity <= ps.fidelity_post_selected + 1e-12);
            prop_assert!(
                ps.fidelity
                    <= ps.fidelity_post_selected * ps.success_probability
                        + (1.0 - ps.success_probability)
                        + 1e-12
            );
            prop_assert!(ps.success_probability <= 1.0 + 1e-12);
        }
    }
}

/// The perturbative Ising estimate changes sign across the resonance root
/// found by the knob search (deterministic, not randomized).
#[test]
fn ising_sign_flips_across_resonance() {
    let cfg = PhysicalConfig::bell_point();
    let (root, residual) = lattice_params::find_resonance(
        ResonanceKnob::ScatteringLength,
        0,
        &cfg,
        (-60e-9, -5e-9),
        0.0,
    )
    .unwrap();
    assert!(residual.abs() < 1e-6);
    let est_at = |a_s: f64| {
        let mut c = cfg.clone();
        c.scattering_len_as = a_s;
        let p = ocs_core::ab_initio_params(&c).unwrap().2;
        lattice_params::perturbative_ising(&p).j_ising_est[0]
            .expect("off-resonance point must have an estimate")
    };
    let below = est_at(root * 1.2); // more negative a_S: residual < 0
    let above = est_at(root * 0.8);
    assert!(
        below * above < 0.0,
        "estimate must flip sign across the root: {below} vs {above}"
    );
}

/// Reflection-symmetric parameters give reflection-symmetric traces.
#[test]
fn chain_reversal_symmetry() {
    // a 2-site parameter set with mirror symmetry: equal onsite terms, no tilt
    let mut p = ocs_core::ab_initio_params(&PhysicalConfig::bell_point()).unwrap().2;
    p.eps_prime = [vec![0.0; 2], vec![0.0; 2]];
    p.tilt_ga = 0.0;
    let kappa = 45.97565493984133;
    let init = dynamics::prepare_plus_product(2).unwrap();
    let out = dynamics::evolve_with(
        &init,
        &[(1.0, p)],
        kappa,
        &[],
        &KrylovOptions::default(),
        AssemblyOptions::default(),
        |_, _| {},
    )
    .unwrap();
    let reg = observables::computational_amplitudes(&out);
    // swapping the two qubits must leave the amplitudes unchanged
    assert!((reg.amps[0b01] - reg.amps[0b10]).norm() < 1e-10);
}

/// Time scale sanity: evolving by t at κ equals evolving by 2t at κ/2.
#[test]
fn kappa_time_rescaling() {
    let p = ocs_core::ab_initio_params(&PhysicalConfig::bell_point()).unwrap().2;
    let kappa = units::recoil_energy(&PhysicalConfig::bell_point()).rad_per_ms();
    let init = dynamics::prepare_plus_product(2).unwrap();
    let opts = KrylovOptions::default();
    let a = dynamics::evolve_with(
        &init, &[(1.0, p.clone())], kappa, &[], &opts, AssemblyOptions::default(), |_, _| {},
    )
    .unwrap();
    let b = dynamics::evolve_with(
        &init, &[(2.0, p)], kappa / 2.0, &[], &opts, AssemblyOptions::default(), |_, _| {},
    )
    .unwrap();
    let diff: f64 = a
        .sectors
        .iter()
        .zip(&b.sectors)
        .flat_map(|(x, y)| x.amps.iter().zip(&y.amps))
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(diff < 1e-9);
}
