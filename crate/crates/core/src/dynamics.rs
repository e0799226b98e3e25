//! Initial-state preparation and Krylov time evolution under piecewise-constant
//! schedules, including the unit-cell shift event.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{self, AssemblyOptions, SectorBasis, SparseOperator};
use crate::lattice_params::{self, HubbardParams};
use crate::units::{self, PhysicalConfig};

/// Default boundary time of the cell-shift event, ms.
pub const DEFAULT_SHIFT_TIME_MS: f64 = 3.7;

/// One (N↑, N↓) block of a many-body state.
#[derive(Clone, Debug)]
pub struct SectorSlot {
    pub basis: Arc<SectorBasis>,
    pub amps: Vec<Complex64>,
}

/// Complex amplitudes blocked by the conserved (N↑, N↓) sectors.
#[derive(Clone, Debug)]
pub struct ManyBodyState {
    pub n_sites: usize,
    pub sectors: Vec<SectorSlot>,
}

impl ManyBodyState {
    pub fn norm(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.amps.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Squared weight carried by each sector, keyed (N↑, N↓).
    pub fn sector_weights(&self) -> Vec<((usize, usize), f64)> {
        self.sectors
            .iter()
            .map(|s| {
                (
                    (s.basis.n_up, s.basis.n_down),
                    s.amps.iter().map(|z| z.norm_sqr()).sum(),
                )
            })
            .collect()
    }

    /// Amplitude of a specific occupation bitmask (zero if outside all sectors).
    pub fn amplitude(&self, bitmask: u64) -> Complex64 {
        for s in &self.sectors {
            if let Some(i) = s.basis.index_of(bitmask) {
                return s.amps[i];
            }
        }
        Complex64::new(0.0, 0.0)
    }
}

/// Π_i (c†_{i,↑,1} + c†_{i,↓,1})/√2 |vac⟩: one orbital-1 atom per site, each
/// in the spin |+⟩ state, expanded over all (N↑, N↓ = n−N↑) sectors.
///
/// In the ascending-mode-order sign convention every spin configuration
/// enters with amplitude +2^{−n/2} (the creation operators are applied in
/// ascending site order, and site order dominates the mode order).
pub fn prepare_plus_product(n_sites: usize) -> Result<ManyBodyState> {
    if n_sites < 2 {
        return Err(Error::config("need at least two sites"));
    }
    let amp = 0.5_f64.powi(n_sites as i32 / 2)
        * if n_sites % 2 == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    let mut sectors = Vec::new();
    for n_down in 0..=n_sites {
        let n_up = n_sites - n_down;
        let basis = Arc::new(fock::build_sector(n_sites, n_up, n_down)?);
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.len()];
        // every spin word z with popcount(z) = n_down, one orbital-1 atom/site
        for z in 0u64..1 << n_sites {
            if z.count_ones() as usize != n_down {
                continue;
            }
            let mut mask = 0u64;
            for site in 0..n_sites {
                let spin = (z >> site & 1) as usize;
                mask |= 1 << fock::mode_index(site, spin, 0);
            }
            let idx = basis
                .index_of(mask)
                .ok_or_else(|| Error::numeric("prepared configuration missing from sector"))?;
            amps[idx] = Complex64::new(amp, 0.0);
        }
        sectors.push(SectorSlot { basis, amps });
    }
    Ok(ManyBodyState { n_sites, sectors })
}

/// One piecewise-constant segment of the experimental schedule.
#[derive(Clone, Debug)]
pub struct ScheduleSegment {
    pub duration_ms: f64,
    pub cfg: PhysicalConfig,
}

/// Ordered segments with instantaneous parameter changes at the boundaries.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub segments: Vec<ScheduleSegment>,
}

impl Schedule {
    pub fn single(cfg: PhysicalConfig, duration_ms: f64) -> Self {
        Self { segments: vec![ScheduleSegment { duration_ms, cfg }] }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Ok(());
        }
        for s in &self.segments {
            if s.duration_ms.is_nan() || s.duration_ms <= 0.0 {
                return Err(Error::config("segment durations must be positive"));
            }
            s.cfg.validate()?;
        }
        Ok(())
    }
}

/// How the second round re-pairs the unit cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftKind {
    /// Flip the sign of the tilt g.
    TiltSign,
    /// Advance the long-lattice phase θ by π (π/2 → 3π/2).
    ThetaAdvance,
}

/// Append the cell-shift round: the first round is cut at `shift_time_ms` and
/// a second segment with re-paired cells runs for `second_duration_ms`.
pub fn shift_unit_cells(
    first_round: &Schedule,
    shift_time_ms: f64,
    second_duration_ms: f64,
    kind: ShiftKind,
) -> Result<Schedule> {
    let seg = first_round
        .segments
        .first()
        .ok_or_else(|| Error::config("first-round schedule is empty"))?;
    if shift_time_ms.is_nan()
        || shift_time_ms <= 0.0
        || second_duration_ms.is_nan()
        || second_duration_ms <= 0.0
    {
        return Err(Error::config("shift and second-round times must be positive"));
    }
    let mut second_cfg = seg.cfg.clone();
    match kind {
        ShiftKind::TiltSign => second_cfg.tilt_ga = -second_cfg.tilt_ga,
        ShiftKind::ThetaAdvance => second_cfg.theta += std::f64::consts::PI,
    }
    Ok(Schedule {
        segments: vec![
            ScheduleSegment { duration_ms: shift_time_ms, cfg: seg.cfg.clone() },
            ScheduleSegment { duration_ms: second_duration_ms, cfg: second_cfg },
        ],
    })
}

/// Numerical controls of the propagator.
#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Local error budget per millisecond of evolved time (per unit norm);
    /// each step of length dt must have an error estimate below
    /// tolerance·dt.
    pub tolerance: f64,
    pub min_dim: usize,
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, min_dim: 8, max_dim: 40 }
    }
}

/// Propagate the amplitudes of one sector by `duration_ms` under `h`
/// (energies in E_r, `kappa` = rad/ms per E_r) with adaptive-order,
/// adaptive-step Lanczos.
pub fn propagate_sector(
    h: &SparseOperator,
    amps: &mut [Complex64],
    duration_ms: f64,
    kappa: f64,
    opts: &KrylovOptions,
) -> Result<()> {
    let dim = amps.len();
    let weight = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if weight < 1e-150 || duration_ms == 0.0 {
        return Ok(());
    }
    if dim == 1 {
        // 1×1 sector: exact phase
        let e = if h.nnz() > 0 { h.val[0] } else { 0.0 };
        amps[0] *= Complex64::from_polar(1.0, -e * kappa * duration_ms);
        return Ok(());
    }
    let scale = h.norm_bound().max(1e-12);
    let mut t = 0.0;
    let mut dt = (opts.max_dim as f64 / (kappa * scale)).min(duration_ms);
    let mut v: Vec<Vec<Complex64>> = Vec::new();
    while t < duration_ms - 1e-15 * duration_ms {
        dt = dt.min(duration_ms - t);
        // Lanczos basis from the current vector
        v.clear();
        v.push(amps.iter().map(|z| z / weight).collect());
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut happy = false;
        let mut accepted: Option<Vec<Complex64>> = None;
        while v.len() <= opts.max_dim {
            let j = v.len() - 1;
            h.matvec(&v[j], &mut w);
            let a_j = v[j].iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            alpha.push(a_j);
            for (wk, vk) in w.iter_mut().zip(&v[j]) {
                *wk -= a_j * vk;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wk, vk) in w.iter_mut().zip(&v[j - 1]) {
                    *wk -= b * vk;
                }
            }
            // full reorthogonalization for propagation-grade accuracy
            for vprev in &v {
                let c: Complex64 =
                    vprev.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wk, vk) in w.iter_mut().zip(vprev) {
                    *wk -= c * vk;
                }
            }
            let b_j = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let m = alpha.len();
            if b_j < 1e-13 * scale {
                // happy breakdown: the Krylov space is invariant, step exact
                let y = small_exp(&alpha, &beta, kappa * dt);
                accepted = Some(y);
                happy = true;
                break;
            }
            if m >= opts.min_dim && m.is_multiple_of(2) {
                let y = small_exp(&alpha, &beta, kappa * dt);
                let err = b_j * y[m - 1].norm() * kappa * dt;
                if err < opts.tolerance * dt {
                    accepted = Some(y);
                    break;
                }
            }
            beta.push(b_j);
            v.push(w.iter().map(|z| z / b_j).collect());
        }
        match accepted {
            Some(y) => {
                for a in amps.iter_mut() {
                    *a = Complex64::new(0.0, 0.0);
                }
                for (j, yj) in y.iter().enumerate() {
                    let c = yj * weight;
                    for (a, vk) in amps.iter_mut().zip(&v[j]) {
                        *a += c * vk;
                    }
                }
                t += dt;
                if !happy {
                    dt *= 1.25;
                }
            }
            None => {
                dt *= 0.5;
                if dt < 1e-12 {
                    return Err(Error::numeric(
                        "Krylov step size underflow: error estimate would not converge",
                    ));
                }
            }
        }
    }
    Ok(())
}

/// y = exp(−i·T·phase)·e₁ for the real symmetric tridiagonal T = (alpha, beta).
fn small_exp(alpha: &[f64], beta: &[f64], phase: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let uk1 = eig.eigenvectors[(0, k)];
        let ph = Complex64::from_polar(1.0, -eig.eigenvalues[k] * phase);
        for (yi, &v) in y.iter_mut().zip(eig.eigenvectors.column(k).iter()) {
            *yi += v * uk1 * ph;
        }
    }
    y
}

/// Evolve under explicit per-segment parameter sets, invoking `on_sample`
/// at each requested time. Sample times are global (measured from schedule
/// start), strictly increasing, and must lie within the total duration.
pub fn evolve_with<F>(
    state: &ManyBodyState,
    segments: &[(f64, HubbardParams)],
    kappa: f64,
    sample_times: &[f64],
    opts: &KrylovOptions,
    assembly: AssemblyOptions,
    mut on_sample: F,
) -> Result<ManyBodyState>
where
    F: FnMut(f64, &ManyBodyState),
{
    let total: f64 = segments.iter().map(|s| s.0).sum();
    if sample_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sample times must be strictly increasing"));
    }
    if sample_times.last().is_some_and(|&t| t > total + 1e-9) {
        return Err(Error::config("sample time beyond schedule duration"));
    }
    let mut current = state.clone();
    let mut samples = sample_times.iter().copied().peekable();
    let mut t_global = 0.0;
    // sample at t = 0 if requested
    while let Some(&ts) = samples.peek() {
        if ts <= t_global + 1e-12 {
            on_sample(ts, &current);
            samples.next();
        } else {
            break;
        }
    }
    for (duration, params) in segments {
        let hs: Vec<SparseOperator> = current
            .sectors
            .iter()
            .map(|slot| fock::assemble_hamiltonian(params, &slot.basis, assembly))
            .collect::<Result<_>>()?;
        let t_seg_end = t_global + duration;
        loop {
            let next_stop = match samples.peek() {
                Some(&ts) if ts < t_seg_end - 1e-12 => ts,
                _ => t_seg_end,
            };
            let dt = next_stop - t_global;
            if dt > 0.0 {
                current
                    .sectors
                    .par_iter_mut()
                    .zip(hs.par_iter())
                    .try_for_each(|(slot, h)| {
                        propagate_sector(h, &mut slot.amps, dt, kappa, opts)
                    })?;
                t_global = next_stop;
            }
            while let Some(&ts) = samples.peek() {
                if ts <= t_global + 1e-12 {
                    on_sample(ts, &current);
                    samples.next();
                } else {
                    break;
                }
            }
            if t_global >= t_seg_end - 1e-12 {
                break;
            }
        }
    }
    Ok(current)
}

/// Evolve under a physical schedule, deriving every segment's parameters
/// ab initio from its configuration.
pub fn evolve<F>(
    state: &ManyBodyState,
    schedule: &Schedule,
    sample_times: &[f64],
    opts: &KrylovOptions,
    assembly: AssemblyOptions,
    on_sample: F,
) -> Result<ManyBodyState>
where
    F: FnMut(f64, &ManyBodyState),
{
    schedule.validate()?;
    if schedule.segments.is_empty() {
        return Ok(state.clone());
    }
    let kappa = units::recoil_energy(&schedule.segments[0].cfg).rad_per_ms();
    let segments: Vec<(f64, HubbardParams)> = schedule
        .segments
        .iter()
        .map(|seg| Ok((seg.duration_ms, lattice_params::ab_initio_params(&seg.cfg)?.2)))
        .collect::<Result<_>>()?;
    evolve_with(state, &segments, kappa, sample_times, opts, assembly, on_sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plus_product_structure() {
        let st = prepare_plus_product(2).unwrap();
        assert_relative_eq!(st.norm(), 1.0, epsilon = 1e-14);
        let w = st.sector_weights();
        let get = |nu: usize, nd: usize| {
            w.iter().find(|(k, _)| *k == (nu, nd)).map(|(_, v)| *v).unwrap()
        };
        assert_relative_eq!(get(2, 0), 0.25, epsilon = 1e-14);
        assert_relative_eq!(get(1, 1), 0.5, epsilon = 1e-14);
        assert_relative_eq!(get(0, 2), 0.25, epsilon = 1e-14);
        // D and N_2nd vanish on the prepared state
        for slot in &st.sectors {
            let d = fock::assemble_diagonal_observable(
                fock::DiagonalKind::DoubleOccupancySites,
                &slot.basis,
            );
            let n2 = fock::assemble_diagonal_observable(
                fock::DiagonalKind::SecondOrbitalCount,
                &slot.basis,
            );
            assert!(d.expectation(&slot.amps).abs() < 1e-14);
            assert!(n2.expectation(&slot.amps).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_evolution_is_exact_phases() {
        // all couplings zero except eps1: every amplitude must rotate by
        // exp(-i·eps1·N·kappa·t)
        let cfg = PhysicalConfig::bell_point();
        let kappa = units::recoil_energy(&cfg).rad_per_ms();
        let mut p = lattice_params::ab_initio_params(&cfg).unwrap().2;
        p.hop = vec![0.0, 0.0];
        p.hop_prime = [vec![vec![0.0; 2]; 2], vec![vec![0.0; 2]; 2]];
        p.eps = vec![0.8, 0.8];
        p.eps_prime = [vec![0.0; 2], vec![0.0; 2]];
        p.u = vec![vec![0.0; 2]; 2];
        let st = prepare_plus_product(2).unwrap();
        let t = 0.37;
        let out = evolve_with(
            &st,
            &[(t, p)],
            kappa,
            &[],
            &KrylovOptions::default(),
            AssemblyOptions::default(),
            |_, _| {},
        )
        .unwrap();
        let expect = Complex64::from_polar(1.0, -0.8 * 2.0 * kappa * t);
        for (slot_in, slot_out) in st.sectors.iter().zip(&out.sectors) {
            for (a_in, a_out) in slot_in.amps.iter().zip(&slot_out.amps) {
                assert!((a_out - a_in * expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_schedule_returns_initial_state() {
        let st = prepare_plus_product(2).unwrap();
        let sched = Schedule { segments: vec![] };
        let out = evolve(
            &st,
            &sched,
            &[],
            &KrylovOptions::default(),
            AssemblyOptions::default(),
            |_, _| {},
        )
        .unwrap();
        for (a, b) in st.sectors.iter().zip(&out.sectors) {
            assert_eq!(a.amps, b.amps);
        }
    }

    #[test]
    fn shift_builder_involution_and_theta() {
        let cfg = PhysicalConfig::pairwise_point(4);
        let sched = Schedule::single(cfg.clone(), 5.0);
        let shifted = shift_unit_cells(&sched, 3.7, 3.7, ShiftKind::TiltSign).unwrap();
        assert_eq!(shifted.segments.len(), 2);
        assert_eq!(shifted.segments[1].cfg.tilt_ga, -cfg.tilt_ga);
        let twice = shift_unit_cells(
            &Schedule::single(shifted.segments[1].cfg.clone(), 3.7),
            3.7,
            3.7,
            ShiftKind::TiltSign,
        )
        .unwrap();
        assert_eq!(twice.segments[1].cfg.tilt_ga, cfg.tilt_ga);
        let theta = shift_unit_cells(&sched, 3.7, 3.7, ShiftKind::ThetaAdvance).unwrap();
        assert_relative_eq!(
            theta.segments[1].cfg.theta,
            cfg.theta + std::f64::consts::PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn norm_and_energy_conserved_at_working_point() {
        let cfg = PhysicalConfig::bell_point();
        let kappa = units::recoil_energy(&cfg).rad_per_ms();
        let p = lattice_params::ab_initio_params(&cfg).unwrap().2;
        let st = prepare_plus_product(2).unwrap();
        let hs: Vec<_> = st
            .sectors
            .iter()
            .map(|s| {
                fock::assemble_hamiltonian(&p, &s.basis, AssemblyOptions::default()).unwrap()
            })
            .collect();
        let e0: f64 = st
            .sectors
            .iter()
            .zip(&hs)
            .map(|(s, h)| h.expectation(&s.amps))
            .sum();
        let out = evolve_with(
            &st,
            &[(2.0, p)],
            kappa,
            &[],
            &KrylovOptions::default(),
            AssemblyOptions::default(),
            |_, _| {},
        )
        .unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
        let e1: f64 = out
            .sectors
            .iter()
            .zip(&hs)
            .map(|(s, h)| h.expectation(&s.amps))
            .sum();
        assert!((e1 - e0).abs() < 1e-8, "energy drift {}", (e1 - e0).abs());
    }

    #[test]
    fn time_reversal() {
        let cfg = PhysicalConfig::bell_point();
        let kappa = units::recoil_energy(&cfg).rad_per_ms();
        let p = lattice_params::ab_initio_params(&cfg).unwrap().2;
        let mut neg = p.clone();
        neg.eps.iter_mut().for_each(|v| *v = -*v);
        neg.hop.iter_mut().for_each(|v| *v = -*v);
        neg.u.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v = -*v));
        for i in 0..2 {
            neg.eps_prime[i].iter_mut().for_each(|v| *v = -*v);
            neg.hop_prime[i]
                .iter_mut()
                .for_each(|r| r.iter_mut().for_each(|v| *v = -*v));
        }
        let st = prepare_plus_product(2).unwrap();
        let fwd_back = evolve_with(
            &st,
            &[(1.3, p), (1.3, neg)],
            kappa,
            &[],
            &KrylovOptions::default(),
            AssemblyOptions::default(),
            |_, _| {},
        )
        .unwrap();
        let diff: f64 = st
            .sectors
            .iter()
            .zip(&fwd_back.sectors)
            .flat_map(|(a, b)| a.amps.iter().zip(&b.amps))
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-8, "time-reversal mismatch {diff}");
    }
}
