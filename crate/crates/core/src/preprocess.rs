//! From echo cubes to offset-free feature vectors.
//!
//! Per TBS: remove the (estimated) NLoS steering phases and the payload
//! symbol, average coherently over all antenna pairs to build the NLoS
//! delay-Doppler matrix; do the same for the LoS path with its known angle
//! and delay; cross-correlate the two elementwise (NLCC) so the shared
//! CFO/TO terms cancel; then compress the corrected matrix along each axis
//! into a range feature vector and a velocity feature vector.

use ndarray::Array2;

use crate::channel::EchoCube;
use crate::error::{Error, Result};
use crate::C64;

/// Which stage of the chain a delay-Doppler matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdKind {
    /// Compensated/accumulated NLoS path; still carries CFO/TO.
    Nlos,
    /// Compensated/accumulated LoS path; carries only CFO/TO.
    Los,
    /// NLCC output; offsets cancelled, only target delay/Doppler remain.
    Corrected,
}

/// Complex matrix of shape `(N_c, M_sym)` whose subcarrier-axis phase ramp
/// encodes delay and symbol-axis ramp encodes Doppler.
#[derive(Debug, Clone)]
pub struct DelayDopplerMatrix {
    pub matrix: Array2<C64>,
    pub kind: DdKind,
    pub tbs_index: usize,
}

/// Range (length `N_c - 1`) and velocity (length `M_sym - 1`) feature
/// vectors of one TBS. Entry `i` of `range_fv` corresponds to subcarrier
/// offset `n' = i + 1` from the reference row and carries phase
/// `-2π n' Δf τ`; entry `i` of `velocity_fv` corresponds to symbol offset
/// `m' = i + 1` and carries phase `+2π m' T f_d`.
#[derive(Debug, Clone)]
pub struct FeatureVectors {
    pub range_fv: Vec<C64>,
    pub velocity_fv: Vec<C64>,
    pub tbs_index: usize,
}

/// Coherent accumulation loss of a ULA phase-compensated with an angle
/// error: `(1/N) * Σ_{J=1..N} e^{jJψ}` with
/// `ψ = 2π(d/λ)(sin(true) - sin(estimate))`. Equals 1 at zero error.
pub fn accumulation_loss(
    n_elements: usize,
    element_spacing_m: f64,
    wavelength_m: f64,
    true_angle_rad: f64,
    est_angle_rad: f64,
) -> C64 {
    let psi = std::f64::consts::TAU * (element_spacing_m / wavelength_m)
        * (true_angle_rad.sin() - est_angle_rad.sin());
    let sum: C64 = (1..=n_elements).map(|j| C64::cis(j as f64 * psi)).sum();
    sum / n_elements as f64
}

/// Shared compensation/accumulation core. `extra_phase(n, m)` multiplies each
/// element before averaging (used to strip the known LoS delay).
fn compensate_accumulate(
    cube: &EchoCube,
    path: &ndarray::Array4<C64>,
    rx_angle_rad: f64,
    tx_angle_rad: f64,
    element_spacing_m: f64,
    wavelength_m: f64,
    kind: DdKind,
    mut extra_phase: impl FnMut(usize, usize) -> C64,
) -> DelayDopplerMatrix {
    let (n_c, m_sym, n_rx, n_tx) = path.dim();
    let tau = std::f64::consts::TAU;
    let zeta_rx = tau * (element_spacing_m / wavelength_m) * rx_angle_rad.sin();
    let zeta_tx = tau * (element_spacing_m / wavelength_m) * tx_angle_rad.sin();
    // conj of the steering outer product, row-major over (J, k)
    let comp: Vec<C64> = (1..=n_rx)
        .flat_map(|j| {
            (1..=n_tx).map(move |k| C64::cis(-(j as f64) * zeta_rx - (k as f64) * zeta_tx))
        })
        .collect();
    let scale = 1.0 / (n_rx * n_tx) as f64;

    let mut out = Array2::<C64>::zeros((n_c, m_sym));
    for n in 0..n_c {
        for m in 0..m_sym {
            let plane = path.slice(ndarray::s![n, m, .., ..]);
            let v = plane.to_slice().expect("contiguous plane");
            let acc: C64 = v.iter().zip(comp.iter()).map(|(x, c)| x * c).sum();
            // demap the unit-modulus payload symbol
            let demap = cube.tx_symbols[[m, n]].conj();
            out[[n, m]] = acc * scale * demap * extra_phase(n, m);
        }
    }
    DelayDopplerMatrix {
        matrix: out,
        kind,
        tbs_index: cube.tbs_index,
    }
}

/// Strips the estimated AoA/AoD phases and the payload from the NLoS path and
/// averages over all antenna pairs. The result per `(n, m)` is
/// `κ b e^{j2πmT[f+ξ_f(m)]} e^{-j2πnΔf[τ+ξ_τ(m)]}` plus noise, with `κ` the
/// accumulation-loss product of both arrays (1 for perfect estimates).
pub fn compensate_accumulate_nlos(
    cube: &EchoCube,
    aoa_rad: f64,
    aod_rad: f64,
    element_spacing_m: f64,
    wavelength_m: f64,
) -> DelayDopplerMatrix {
    compensate_accumulate(
        cube,
        &cube.nlos,
        aoa_rad,
        aod_rad,
        element_spacing_m,
        wavelength_m,
        DdKind::Nlos,
        |_, _| C64::new(1.0, 0.0),
    )
}

/// Same for the LoS path, whose angle and delay are known and removed
/// outright: the residual element is `κ b e^{j2πmTξ_f(m)} e^{-j2πnΔfξ_τ(m)}`
/// plus noise.
pub fn compensate_accumulate_los(
    cube: &EchoCube,
    element_spacing_m: f64,
    wavelength_m: f64,
    subcarrier_spacing_hz: f64,
) -> DelayDopplerMatrix {
    let los_angle = cube.truth.paths.los_angle_rad;
    let tau_los = cube.truth.paths.tau_los_s;
    let w = std::f64::consts::TAU * subcarrier_spacing_hz * tau_los;
    compensate_accumulate(
        cube,
        &cube.los,
        los_angle,
        los_angle,
        element_spacing_m,
        wavelength_m,
        DdKind::Los,
        |n, _| C64::cis(n as f64 * w),
    )
}

/// NLoS/LoS cross-correlation: elementwise `D_nlos ∘ conj(D_los)`.
///
/// Both matrices of one TBS carry identical `ξ_f(m)`, `ξ_τ(m)` factors, so
/// the product cancels them exactly per element even when they vary with
/// `m`, leaving only the target Doppler and delay ramps.
pub fn nlcc(nlos: &DelayDopplerMatrix, los: &DelayDopplerMatrix) -> Result<DelayDopplerMatrix> {
    if nlos.matrix.dim() != los.matrix.dim() {
        return Err(Error::ShapeMismatch(format!(
            "NLoS {:?} vs LoS {:?}",
            nlos.matrix.dim(),
            los.matrix.dim()
        )));
    }
    if nlos.tbs_index != los.tbs_index {
        return Err(Error::ShapeMismatch(format!(
            "NLoS from TBS {} but LoS from TBS {}",
            nlos.tbs_index, los.tbs_index
        )));
    }
    let matrix = ndarray::Zip::from(&nlos.matrix)
        .and(&los.matrix)
        .map_collect(|&a, &b| a * b.conj());
    Ok(DelayDopplerMatrix {
        matrix,
        kind: DdKind::Corrected,
        tbs_index: nlos.tbs_index,
    })
}

/// Coherent compression along the subcarrier axis: row `n'` (1-based) is
/// conjugate-multiplied by row 0 and averaged over the symbol axis. Entry
/// `n' - 1` carries phase `-2π n' Δf τ`.
pub fn compress_range(corrected: &DelayDopplerMatrix) -> Vec<C64> {
    let (n_c, m_sym) = corrected.matrix.dim();
    let reference = corrected.matrix.row(0);
    (1..n_c)
        .map(|n| {
            let row = corrected.matrix.row(n);
            let sum: C64 = row
                .iter()
                .zip(reference.iter())
                .map(|(a, r)| a * r.conj())
                .sum();
            sum / m_sym as f64
        })
        .collect()
}

/// Coherent compression along the symbol axis: column `m'` (1-based)
/// conjugate-multiplied by column 0 and averaged over the subcarrier axis.
/// Entry `m' - 1` carries phase `+2π m' T f_d`.
pub fn compress_velocity(corrected: &DelayDopplerMatrix) -> Vec<C64> {
    let (n_c, m_sym) = corrected.matrix.dim();
    let reference = corrected.matrix.column(0);
    (1..m_sym)
        .map(|m| {
            let col = corrected.matrix.column(m);
            let sum: C64 = col
                .iter()
                .zip(reference.iter())
                .map(|(a, r)| a * r.conj())
                .sum();
            sum / n_c as f64
        })
        .collect()
}

/// Full per-TBS preprocessing: compensate both paths, cross-correlate, and
/// compress. With `use_nlcc` off the NLoS matrix is compressed directly,
/// leaving offsets in the feature vectors.
pub fn feature_vectors(
    cube: &EchoCube,
    aoa_rad: f64,
    aod_rad: f64,
    element_spacing_m: f64,
    wavelength_m: f64,
    subcarrier_spacing_hz: f64,
    use_nlcc: bool,
) -> Result<FeatureVectors> {
    let d_nlos = compensate_accumulate_nlos(cube, aoa_rad, aod_rad, element_spacing_m, wavelength_m);
    let compressed = if use_nlcc {
        let d_los =
            compensate_accumulate_los(cube, element_spacing_m, wavelength_m, subcarrier_spacing_hz);
        nlcc(&d_nlos, &d_los)?
    } else {
        d_nlos
    };
    Ok(FeatureVectors {
        range_fv: compress_range(&compressed),
        velocity_fv: compress_velocity(&compressed),
        tbs_index: cube.tbs_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_tx_symbols, synthesize_tbs_echo};
    use crate::scene::{OffsetMode, SceneConfig, SyncOffsets};
    use approx::assert_relative_eq;

    fn scene(offsets: SyncOffsets) -> SceneConfig {
        let mut cfg = SceneConfig::default();
        cfg.ofdm.n_subcarriers = 24;
        cfg.ofdm.n_symbols = 12;
        cfg.array.n_tx_per_tbs = 4;
        cfg.array.n_rx_pbs = 6;
        cfg.noise.snr_db = None;
        cfg.offsets = offsets;
        cfg
    }

    fn make_cube(cfg: &SceneConfig, tbs: usize) -> crate::channel::EchoCube {
        let tx = generate_tx_symbols(&cfg.ofdm, 17);
        synthesize_tbs_echo(cfg, tbs, &tx, 23).unwrap()
    }

    fn nlos_truth(cfg: &SceneConfig, cube: &crate::channel::EchoCube) -> DelayDopplerMatrix {
        compensate_accumulate_nlos(
            cube,
            cube.truth.paths.aoa_nlos_rad,
            cube.truth.paths.aod_nlos_rad,
            cfg.element_spacing_m(),
            cfg.ofdm.wavelength_m(),
        )
    }

    fn los_matrix(cfg: &SceneConfig, cube: &crate::channel::EchoCube) -> DelayDopplerMatrix {
        compensate_accumulate_los(
            cube,
            cfg.element_spacing_m(),
            cfg.ofdm.wavelength_m(),
            cfg.ofdm.subcarrier_spacing_hz,
        )
    }

    // Perfect estimates, noise-free: the compensated element has the same
    // modulus as a single raw element (full coherent gain, kappa = 1) and the
    // predicted phase.
    #[test]
    fn perfect_compensation_is_lossless() {
        let cfg = scene(SyncOffsets::uniform(40.0, 0.04));
        let cube = make_cube(&cfg, 0);
        let d = nlos_truth(&cfg, &cube);
        let t_sym = cfg.ofdm.symbol_duration_s();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        for &(n, m) in &[(0usize, 0usize), (3, 5), (23, 11)] {
            let xi_f = cfg.offsets.cfo_hz(0, m, t_sym, scs);
            let xi_t = cfg.offsets.time_offset_s(0, m, t_sym);
            let want = C64::cis(
                std::f64::consts::TAU
                    * (m as f64 * t_sym * (cube.truth.doppler_hz + xi_f)
                        - n as f64 * scs * (cube.truth.paths.tau_nlos_s + xi_t)),
            );
            let got = d.matrix[[n, m]];
            assert_relative_eq!(got.norm(), 1.0, epsilon = 1e-10);
            assert!((got - want).norm() < 1e-10, "({n},{m}): {got} vs {want}");
        }
    }

    // Angle error shrinks the accumulated modulus by the closed-form
    // geometric-series factor (AoA error alone, then both).
    #[test]
    fn angle_error_matches_loss_oracle() {
        let cfg = scene(SyncOffsets::zero());
        let cube = make_cube(&cfg, 0);
        let d_r = cfg.element_spacing_m();
        let lambda = cfg.ofdm.wavelength_m();
        let aoa = cube.truth.paths.aoa_nlos_rad;
        let aod = cube.truth.paths.aod_nlos_rad;
        for &(da, dd) in &[(0.02, 0.0), (0.0, 0.05), (0.015, -0.03)] {
            let d = compensate_accumulate_nlos(&cube, aoa + da, aod + dd, d_r, lambda);
            let loss_rx = accumulation_loss(cfg.array.n_rx_pbs, d_r, lambda, aoa, aoa + da);
            let loss_tx = accumulation_loss(cfg.array.n_tx_per_tbs, d_r, lambda, aod, aod + dd);
            let want = (loss_rx * loss_tx).norm();
            let got = d.matrix[[5, 7]].norm();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    // LoS compensation leaves only the offset ramps.
    #[test]
    fn los_residual_is_offsets_only() {
        let cfg = scene(SyncOffsets::uniform(60.0, 0.06));
        let cube = make_cube(&cfg, 0);
        let d = los_matrix(&cfg, &cube);
        let t_sym = cfg.ofdm.symbol_duration_s();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        for &(n, m) in &[(0usize, 0usize), (10, 3), (23, 11)] {
            let xi_f = cfg.offsets.cfo_hz(0, m, t_sym, scs);
            let xi_t = cfg.offsets.time_offset_s(0, m, t_sym);
            let want = C64::cis(
                std::f64::consts::TAU * (m as f64 * t_sym * xi_f - n as f64 * scs * xi_t),
            );
            assert!((d.matrix[[n, m]] - want).norm() < 1e-10);
        }
    }

    // NLCC with arbitrary time-varying offsets reproduces the zero-offset
    // corrected matrix to near machine precision.
    #[test]
    fn nlcc_cancels_time_varying_offsets() {
        let drifting = SyncOffsets {
            mode: OffsetMode::LinearDrift,
            to_ns: vec![60.0],
            cfo_frac: vec![0.06],
            to_drift_ns_per_s: 5.0e4,
            cfo_drift_hz_per_s: 2.0e7,
        };
        let cfg_off = scene(drifting);
        let cfg_zero = scene(SyncOffsets::zero());

        let cube_off = make_cube(&cfg_off, 0);
        let cube_zero = make_cube(&cfg_zero, 0);

        let corr_off = nlcc(&nlos_truth(&cfg_off, &cube_off), &los_matrix(&cfg_off, &cube_off)).unwrap();
        let corr_zero =
            nlcc(&nlos_truth(&cfg_zero, &cube_zero), &los_matrix(&cfg_zero, &cube_zero)).unwrap();

        for (a, b) in corr_off.matrix.iter().zip(corr_zero.matrix.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm(), "{a} vs {b}");
        }
        assert_eq!(corr_off.kind, DdKind::Corrected);
    }

    // Zero offsets: the corrected element phase is the pure target ramp.
    #[test]
    fn corrected_phase_reads_target_parameters() {
        let cfg = scene(SyncOffsets::zero());
        let cube = make_cube(&cfg, 0);
        let corr = nlcc(&nlos_truth(&cfg, &cube), &los_matrix(&cfg, &cube)).unwrap();
        let t_sym = cfg.ofdm.symbol_duration_s();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        for &(n, m) in &[(1usize, 1usize), (7, 9), (20, 2)] {
            let want = std::f64::consts::TAU
                * (m as f64 * t_sym * cube.truth.doppler_hz
                    - n as f64 * scs * cube.truth.paths.tau_nlos_s);
            let got = corr.matrix[[n, m]];
            let diff = (got * C64::cis(-want) - C64::new(1.0, 0.0)).norm();
            assert!(diff < 1e-10, "phase mismatch at ({n},{m})");
        }
    }

    #[test]
    fn nlcc_rejects_shape_mismatch() {
        let cfg = scene(SyncOffsets::zero());
        let cube = make_cube(&cfg, 0);
        let a = nlos_truth(&cfg, &cube);
        let mut b = los_matrix(&cfg, &cube);
        b.matrix = b.matrix.slice(ndarray::s![..10, ..]).to_owned();
        assert!(nlcc(&a, &b).is_err());
    }

    // Noise-free feature vectors: exact linear phase ladders of constant
    // modulus, and first differences of unwrapped args are constant.
    #[test]
    fn compression_phase_ladders() {
        let cfg = scene(SyncOffsets::uniform(35.0, 0.03));
        let cube = make_cube(&cfg, 0);
        let corr = nlcc(&nlos_truth(&cfg, &cube), &los_matrix(&cfg, &cube)).unwrap();
        let range_fv = compress_range(&corr);
        let vel_fv = compress_velocity(&corr);
        assert_eq!(range_fv.len(), cfg.ofdm.n_subcarriers - 1);
        assert_eq!(vel_fv.len(), cfg.ofdm.n_symbols - 1);

        let t_sym = cfg.ofdm.symbol_duration_s();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        for (i, v) in range_fv.iter().enumerate() {
            let n_prime = (i + 1) as f64;
            let want = -std::f64::consts::TAU * n_prime * scs * cube.truth.paths.tau_nlos_s;
            let diff = (v / v.norm() - C64::cis(want)).norm();
            assert!(diff < 1e-9, "range entry {i}");
            assert_relative_eq!(v.norm(), range_fv[0].norm(), max_relative = 1e-9);
        }
        for (i, v) in vel_fv.iter().enumerate() {
            let m_prime = (i + 1) as f64;
            let want = std::f64::consts::TAU * m_prime * t_sym * cube.truth.doppler_hz;
            let diff = (v / v.norm() - C64::cis(want)).norm();
            assert!(diff < 1e-9, "velocity entry {i}");
        }
    }

    // Offset-invariance of the whole preprocessing pipeline, noise-free.
    #[test]
    fn pipeline_offset_invariance() {
        let cfg_off = scene(SyncOffsets::uniform(60.0, 0.06));
        let cfg_zero = scene(SyncOffsets::zero());
        let cube_off = make_cube(&cfg_off, 0);
        let cube_zero = make_cube(&cfg_zero, 0);
        let p = |cfg: &SceneConfig, cube: &crate::channel::EchoCube| {
            feature_vectors(
                cube,
                cube.truth.paths.aoa_nlos_rad,
                cube.truth.paths.aod_nlos_rad,
                cfg.element_spacing_m(),
                cfg.ofdm.wavelength_m(),
                cfg.ofdm.subcarrier_spacing_hz,
                true,
            )
            .unwrap()
        };
        let fv_off = p(&cfg_off, &cube_off);
        let fv_zero = p(&cfg_zero, &cube_zero);
        for (a, b) in fv_off.range_fv.iter().zip(fv_zero.range_fv.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
        for (a, b) in fv_off.velocity_fv.iter().zip(fv_zero.velocity_fv.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    // Coherent accumulation SNR gain over the antenna pairs, measured over
    // noisy realizations; the resolved cube accumulates N_rx * N_tx elements.
    #[test]
    fn accumulation_snr_gain() {
        let mut cfg = scene(SyncOffsets::zero());
        cfg.noise.snr_db = Some(0.0);
        let n_pairs = (cfg.array.n_rx_pbs * cfg.array.n_tx_per_tbs) as f64;
        let tx = generate_tx_symbols(&cfg.ofdm, 17);

        // noise-free reference element
        let mut cfg_clean = cfg.clone();
        cfg_clean.noise.snr_db = None;
        let clean = synthesize_tbs_echo(&cfg_clean, 0, &tx, 1).unwrap();
        let d_clean = nlos_truth(&cfg_clean, &clean);

        let trials = 100;
        let mut noise_power = 0.0;
        for t in 0..trials {
            let cube = synthesize_tbs_echo(&cfg, 0, &tx, 1000 + t).unwrap();
            let d = nlos_truth(&cfg, &cube);
            noise_power += (d.matrix[[2, 3]] - d_clean.matrix[[2, 3]]).norm_sqr();
        }
        noise_power /= trials as f64;
        // input element SNR is 0 dB with unit signal power, so the output
        // noise power should be about 1/(N_rx N_tx)
        let gain_db = 10.0 * (1.0 / noise_power).log10();
        let want_db = 10.0 * n_pairs.log10();
        assert!(
            (gain_db - want_db).abs() < 1.0,
            "gain {gain_db:.2} dB vs expected {want_db:.2} dB"
        );
    }
}
