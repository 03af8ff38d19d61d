//! Synthesis of the per-TBS received symbol cubes at the PBS, directly in the
//! post-demodulation domain.
//!
//! The receiver separates contributions per transmit antenna (the usual
//! MIMO-radar virtual-array assumption, an extension of the ideal BS-identity
//! code separation already assumed between TBSs), so each path is stored as a
//! four-dimensional tensor indexed `[subcarrier n, symbol m, rx J, tx k]`:
//!
//! ```text
//! nlos[n,m,J,k] = b_nlos * e^{j2πmT(f_d+ξ_f(m))} * e^{-j2πnΔf(τ_nlos+ξ_τ(m))}
//!                 * a_rx(aoa)[J] * a_tx(aod)[k] * d[m,n]  (+ noise)
//! los [n,m,J,k] = b_los  * e^{j2πmT ξ_f(m)}     * e^{-j2πnΔf(τ_los+ξ_τ(m))}
//!                 * a_rx(los)[J] * a_tx(los)[k] * d[m,n]  (+ noise)
//! ```
//!
//! Symbol and subcarrier phase references start at `m = 0`, `n = 0`, and both
//! paths of one TBS carry identical offset terms `ξ_f(m)`, `ξ_τ(m)`.

use ndarray::{Array2, Array4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scene::{
    self, AttenuationMode, OfdmConfig, PathParameters, SceneConfig, SPEED_OF_LIGHT,
};
use crate::seeds::{self, tag};
use crate::C64;

/// Unit-modulus ULA steering vector with the 1-based phase ladder
/// `entries[J-1] = exp(j * J * 2π (d/λ) sin(angle))`, `J = 1..=N`.
#[derive(Debug, Clone)]
pub struct SteeringVector {
    pub angle_rad: f64,
    pub entries: Vec<C64>,
}

pub fn steering_vector(
    angle_rad: f64,
    n_elements: usize,
    element_spacing_m: f64,
    wavelength_m: f64,
) -> SteeringVector {
    let zeta = std::f64::consts::TAU * (element_spacing_m / wavelength_m) * angle_rad.sin();
    let entries = (1..=n_elements)
        .map(|j| C64::cis(j as f64 * zeta))
        .collect();
    SteeringVector { angle_rad, entries }
}

/// I.i.d. uniform QPSK symbols `{(±1±j)/√2}`, shape `(M_sym, N_c)`,
/// reproducible from the seed.
pub fn generate_tx_symbols(ofdm: &OfdmConfig, rng_seed: u64) -> Array2<C64> {
    let mut rng = seeds::rng_for(rng_seed);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    Array2::from_shape_fn((ofdm.n_symbols, ofdm.n_subcarriers), |_| {
        let bits: u8 = rng.random_range(0..4);
        let re = if bits & 1 == 0 { amp } else { -amp };
        let im = if bits & 2 == 0 { amp } else { -amp };
        C64::new(re, im)
    })
}

/// Ground-truth parameters captured at synthesis time, for oracles and for
/// the known-LoS compensation step.
#[derive(Debug, Clone, Copy)]
pub struct PathTruth {
    pub paths: PathParameters,
    /// True bistatic Doppler of the NLoS path (Hz).
    pub doppler_hz: f64,
    /// Complex NLoS amplitude (attenuation times reflecting factor).
    pub amp_nlos: C64,
    /// Real LoS amplitude.
    pub amp_los: f64,
}

/// Received symbol cube of one TBS. Each path tensor has shape
/// `(N_c, M_sym, N_rx, N_tx)` and already contains that path's noise
/// realization when noise is enabled; [`EchoCube::combined`] is their sum.
#[derive(Debug, Clone)]
pub struct EchoCube {
    pub tbs_index: usize,
    pub nlos: Array4<C64>,
    pub los: Array4<C64>,
    /// Transmit symbols `d[m,n]`, shape `(M_sym, N_c)`.
    pub tx_symbols: Array2<C64>,
    pub truth: PathTruth,
    /// Complex noise variance actually applied per tensor element.
    pub noise_sigma2: f64,
}

impl EchoCube {
    /// Superposition of both paths as seen by the antenna before path
    /// separation.
    pub fn combined(&self) -> Array4<C64> {
        &self.nlos + &self.los
    }

    pub fn n_rx(&self) -> usize {
        self.nlos.shape()[2]
    }

    pub fn n_tx(&self) -> usize {
        self.nlos.shape()[3]
    }
}

fn path_amplitudes(scene: &SceneConfig, tbs_index: usize, p: &PathParameters) -> (C64, f64) {
    match scene.channel.attenuation_mode {
        AttenuationMode::Normalized => (C64::new(1.0, 0.0), 1.0),
        AttenuationMode::Physical => {
            let lambda = scene.ofdm.wavelength_m();
            let four_pi_cubed = (4.0 * std::f64::consts::PI).powi(3);
            let b_nlos = (lambda * lambda
                / (four_pi_cubed * p.r_tbs_target_m.powi(2) * p.r_target_pbs_m.powi(2)))
            .sqrt();
            let b_los = (lambda * lambda / (four_pi_cubed * p.r_los_m.powi(4))).sqrt();
            (
                scene.channel.reflecting_factor_for(tbs_index) * b_nlos,
                b_los,
            )
        }
    }
}

/// Fills one path tensor. `doppler_hz = 0` and the LoS delay/angles yield the
/// direct path; the offsets enter identically for both paths.
#[allow(clippy::too_many_arguments)]
fn fill_path(
    scene: &SceneConfig,
    tbs_index: usize,
    tx_symbols: &Array2<C64>,
    amp: C64,
    doppler_hz: f64,
    tau_s: f64,
    rx_angle_rad: f64,
    tx_angle_rad: f64,
    sigma2: f64,
    noise_seed: u64,
) -> Array4<C64> {
    let ofdm = &scene.ofdm;
    let n_c = ofdm.n_subcarriers;
    let m_sym = ofdm.n_symbols;
    let n_rx = scene.array.n_rx_pbs;
    let n_tx = scene.array.n_tx_per_tbs;
    let t_sym = ofdm.symbol_duration_s();
    let scs = ofdm.subcarrier_spacing_hz;
    let lambda = ofdm.wavelength_m();
    let d_r = scene.element_spacing_m();

    let a_rx = steering_vector(rx_angle_rad, n_rx, d_r, lambda);
    let a_tx = steering_vector(tx_angle_rad, n_tx, d_r, lambda);
    // outer product a_rx[J] * a_tx[k], row-major over (J, k)
    let outer: Vec<C64> = a_rx
        .entries
        .iter()
        .flat_map(|&r| a_tx.entries.iter().map(move |&t| r * t))
        .collect();

    let mut cube = Array4::zeros((n_c, m_sym, n_rx, n_tx));
    for m in 0..m_sym {
        let xi_f = scene.offsets.cfo_hz(tbs_index, m, t_sym, scs);
        let xi_tau = scene.offsets.time_offset_s(tbs_index, m, t_sym);
        let doppler_phase =
            C64::cis(std::f64::consts::TAU * m as f64 * t_sym * (doppler_hz + xi_f));
        // delay ladder over n for this symbol
        let step = C64::cis(-std::f64::consts::TAU * scs * (tau_s + xi_tau));
        let mut delay_phase = C64::new(1.0, 0.0); // n = 0 reference
        for n in 0..n_c {
            let scalar = amp * doppler_phase * delay_phase * tx_symbols[[m, n]];
            let mut plane = cube.slice_mut(ndarray::s![n, m, .., ..]);
            let dst = plane.as_slice_mut().expect("contiguous plane");
            for (d, &o) in dst.iter_mut().zip(outer.iter()) {
                *d = scalar * o;
            }
            delay_phase *= step;
        }
    }

    if sigma2 > 0.0 {
        let mut rng = seeds::rng_for(noise_seed);
        let s = (sigma2 / 2.0).sqrt();
        for v in cube.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += C64::new(s * re, s * im);
        }
    }
    cube
}

/// Synthesizes the echo cube of one TBS.
///
/// `stream_seed` keys this TBS's noise streams; independent per-path streams
/// are derived from it. Noise variance follows the scene SNR definition:
/// the noise-free per-element NLoS power is `|amp_nlos|²` for every element,
/// so `sigma2 = |amp_nlos|² / 10^(snr_db/10)`.
pub fn synthesize_tbs_echo(
    scene: &SceneConfig,
    tbs_index: usize,
    tx_symbols: &Array2<C64>,
    stream_seed: u64,
) -> Result<EchoCube> {
    scene.validate()?;
    let expected = (scene.ofdm.n_symbols, scene.ofdm.n_subcarriers);
    if tx_symbols.dim() != expected {
        return Err(Error::ShapeMismatch(format!(
            "tx_symbols has shape {:?}, scene requires {:?}",
            tx_symbols.dim(),
            expected
        )));
    }

    let paths = scene::derive_path_parameters(&scene.geometry, tbs_index)?;
    let doppler_hz = scene::bistatic_doppler(
        &scene.geometry,
        paths.aod_nlos_rad,
        paths.aoa_nlos_rad,
        scene.ofdm.carrier_freq_hz,
    );
    let (amp_nlos, amp_los) = path_amplitudes(scene, tbs_index, &paths);

    let sigma2 = match scene.noise.snr_db {
        Some(snr_db) => amp_nlos.norm_sqr() / 10f64.powf(snr_db / 10.0),
        None => 0.0,
    };

    let nlos = fill_path(
        scene,
        tbs_index,
        tx_symbols,
        amp_nlos,
        doppler_hz,
        paths.tau_nlos_s,
        paths.aoa_nlos_rad,
        paths.aod_nlos_rad,
        sigma2,
        seeds::mix(stream_seed, tag::NOISE_NLOS),
    );
    let los = fill_path(
        scene,
        tbs_index,
        tx_symbols,
        C64::new(amp_los, 0.0),
        0.0,
        paths.tau_los_s,
        paths.los_angle_rad,
        paths.los_angle_rad,
        sigma2,
        seeds::mix(stream_seed, tag::NOISE_LOS),
    );

    Ok(EchoCube {
        tbs_index,
        nlos,
        los,
        tx_symbols: tx_symbols.clone(),
        truth: PathTruth {
            paths,
            doppler_hz,
            amp_nlos,
            amp_los,
        },
        noise_sigma2: sigma2,
    })
}

/// Synthesizes one cube per TBS with independent symbol and noise streams
/// derived from `master_seed` (see [`crate::seeds`] for the split rule).
pub fn synthesize_scene(scene: &SceneConfig, master_seed: u64) -> Result<Vec<EchoCube>> {
    (0..scene.geometry.n_tbs())
        .map(|i| {
            let tbs_seed = seeds::mix(seeds::mix(master_seed, tag::TBS), i as u64);
            let tx = generate_tx_symbols(&scene.ofdm, seeds::mix(tbs_seed, tag::TX_SYMBOLS));
            synthesize_tbs_echo(scene, i, &tx, tbs_seed)
        })
        .collect()
}

/// Speed of light re-export for delay phase checks.
pub fn delay_of_range(range_m: f64) -> f64 {
    range_m / SPEED_OF_LIGHT
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Geometry, SyncOffsets};
    use approx::assert_relative_eq;
    use ndarray::s;

    fn small_scene() -> SceneConfig {
        let mut cfg = SceneConfig::default();
        cfg.ofdm.n_subcarriers = 16;
        cfg.ofdm.n_symbols = 8;
        cfg.array.n_tx_per_tbs = 3;
        cfg.array.n_rx_pbs = 4;
        cfg.noise.snr_db = None;
        cfg
    }

    #[test]
    fn steering_at_broadside_is_all_ones() {
        let sv = steering_vector(0.0, 4, 0.00624, 0.01249);
        for e in &sv.entries {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-15);
        }
    }

    // Endfire with half-wavelength spacing and two elements: [e^{jπ}, e^{j2π}].
    #[test]
    fn steering_endfire_two_elements() {
        let lambda = 0.0125;
        let sv = steering_vector(std::f64::consts::FRAC_PI_2, 2, lambda / 2.0, lambda);
        assert_relative_eq!(sv.entries[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(sv.entries[0].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(sv.entries[1].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(sv.entries[1].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn steering_conjugate_symmetry() {
        let lambda = 0.0125;
        for &a in &[0.1, 0.7, 1.2, -0.4] {
            let pos = steering_vector(a, 5, lambda / 2.0, lambda);
            let neg = steering_vector(-a, 5, lambda / 2.0, lambda);
            for (p, n) in pos.entries.iter().zip(&neg.entries) {
                assert_relative_eq!(p.re, n.re, epsilon = 1e-14);
                assert_relative_eq!(p.im, -n.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn tx_symbols_alphabet_and_determinism() {
        let ofdm = OfdmConfig {
            n_subcarriers: 32,
            n_symbols: 16,
            ..OfdmConfig::default()
        };
        let a = generate_tx_symbols(&ofdm, 99);
        let b = generate_tx_symbols(&ofdm, 99);
        assert_eq!(a, b);
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        for d in a.iter() {
            assert_relative_eq!(d.norm(), 1.0, epsilon = 1e-15);
            assert!((d.re.abs() - amp).abs() < 1e-15 && (d.im.abs() - amp).abs() < 1e-15);
        }
    }

    // Law of large numbers: the empirical mean of many QPSK draws is near zero.
    #[test]
    fn tx_symbols_mean_near_zero() {
        let ofdm = OfdmConfig {
            n_subcarriers: 1000,
            n_symbols: 1000,
            ..OfdmConfig::default()
        };
        let syms = generate_tx_symbols(&ofdm, 7);
        let mean = syms.iter().sum::<C64>() / (syms.len() as f64);
        assert!(mean.norm() < 5e-3, "|mean| = {}", mean.norm());
    }

    // Grid-origin element (n = m = 0): all delay/Doppler exponents collapse to 1,
    // leaving a_rx[J] * a_tx[k] * d[0,0].
    #[test]
    fn grid_origin_element_is_steering_outer_product() {
        let mut cfg = small_scene();
        cfg.geometry.target_speed_mps = 0.0;
        cfg.offsets = SyncOffsets::zero();
        let tx = generate_tx_symbols(&cfg.ofdm, 5);
        let cube = synthesize_tbs_echo(&cfg, 0, &tx, 11).unwrap();
        let lambda = cfg.ofdm.wavelength_m();
        let d_r = cfg.element_spacing_m();
        let a_rx = steering_vector(cube.truth.paths.aoa_nlos_rad, 4, d_r, lambda);
        let a_tx = steering_vector(cube.truth.paths.aod_nlos_rad, 3, d_r, lambda);
        for j in 0..4 {
            for k in 0..3 {
                let want = a_rx.entries[j] * a_tx.entries[k] * tx[[0, 0]];
                let got = cube.nlos[[0, 0, j, k]];
                assert_relative_eq!(got.re, want.re, epsilon = 1e-12);
                assert_relative_eq!(got.im, want.im, epsilon = 1e-12);
            }
        }
    }

    // Ratio between consecutive symbols on a fixed (J, n) cancels everything
    // but the Doppler exponent.
    #[test]
    fn doppler_phase_ladder() {
        let mut cfg = small_scene();
        cfg.offsets = SyncOffsets::zero();
        let tx = generate_tx_symbols(&cfg.ofdm, 5);
        let cube = synthesize_tbs_echo(&cfg, 0, &tx, 11).unwrap();
        let t_sym = cfg.ofdm.symbol_duration_s();
        let want = C64::cis(std::f64::consts::TAU * t_sym * cube.truth.doppler_hz);
        for n in [0usize, 7] {
            for m in 0..cfg.ofdm.n_symbols - 1 {
                // remove the data symbols before taking the ratio
                let a = cube.nlos[[n, m + 1, 2, 1]] / tx[[m + 1, n]];
                let b = cube.nlos[[n, m, 2, 1]] / tx[[m, n]];
                let ratio = a / b;
                assert_relative_eq!(ratio.re, want.re, epsilon = 1e-10);
                assert_relative_eq!(ratio.im, want.im, epsilon = 1e-10);
            }
        }
    }

    // Same story along the subcarrier axis: the delay exponent, offsets included.
    #[test]
    fn delay_phase_ladder_with_constant_offsets() {
        let mut cfg = small_scene();
        cfg.offsets = SyncOffsets::uniform(60.0, 0.06);
        let tx = generate_tx_symbols(&cfg.ofdm, 5);
        let cube = synthesize_tbs_echo(&cfg, 0, &tx, 11).unwrap();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        let t_sym = cfg.ofdm.symbol_duration_s();
        let xi_tau = cfg.offsets.time_offset_s(0, 0, t_sym);
        let want = C64::cis(-std::f64::consts::TAU * scs * (cube.truth.paths.tau_nlos_s + xi_tau));
        for m in [0usize, 3] {
            for n in 0..cfg.ofdm.n_subcarriers - 1 {
                let a = cube.nlos[[n + 1, m, 1, 2]] / tx[[m, n + 1]];
                let b = cube.nlos[[n, m, 1, 2]] / tx[[m, n]];
                let ratio = a / b;
                assert_relative_eq!(ratio.re, want.re, epsilon = 1e-10);
                assert_relative_eq!(ratio.im, want.im, epsilon = 1e-10);
            }
        }
    }

    // Independent four-nested-loop scalar reference implementation.
    #[test]
    fn matches_brute_force_oracle() {
        let mut cfg = small_scene();
        cfg.offsets = SyncOffsets {
            mode: crate::scene::OffsetMode::LinearDrift,
            to_ns: vec![45.0],
            cfo_frac: vec![0.035],
            to_drift_ns_per_s: 2000.0,
            cfo_drift_hz_per_s: 1.0e6,
        };
        cfg.channel.attenuation_mode = AttenuationMode::Physical;
        cfg.channel.reflecting_factor = vec![[0.8, 0.3]];
        let tx = generate_tx_symbols(&cfg.ofdm, 21);
        let cube = synthesize_tbs_echo(&cfg, 0, &tx, 31).unwrap();

        let p = cube.truth.paths;
        let t_sym = cfg.ofdm.symbol_duration_s();
        let scs = cfg.ofdm.subcarrier_spacing_hz;
        let tau = std::f64::consts::TAU;
        let lambda = cfg.ofdm.wavelength_m();
        let d_r = cfg.element_spacing_m();
        let zeta_rx = tau * (d_r / lambda) * p.aoa_nlos_rad.sin();
        let zeta_tx = tau * (d_r / lambda) * p.aod_nlos_rad.sin();

        for n in 0..cfg.ofdm.n_subcarriers {
            for m in 0..cfg.ofdm.n_symbols {
                let xi_f = cfg.offsets.cfo_hz(0, m, t_sym, scs);
                let xi_t = cfg.offsets.time_offset_s(0, m, t_sym);
                for j in 0..cfg.array.n_rx_pbs {
                    for k in 0..cfg.array.n_tx_per_tbs {
                        let want = cube.truth.amp_nlos
                            * C64::cis(tau * m as f64 * t_sym * (cube.truth.doppler_hz + xi_f))
                            * C64::cis(-tau * n as f64 * scs * (p.tau_nlos_s + xi_t))
                            * C64::cis((j + 1) as f64 * zeta_rx)
                            * C64::cis((k + 1) as f64 * zeta_tx)
                            * tx[[m, n]];
                        let got = cube.nlos[[n, m, j, k]];
                        assert!(
                            (got - want).norm() <= 1e-12 * want.norm(),
                            "mismatch at n={n} m={m} J={j} k={k}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    // Per-TBS cubes from one master seed are reproducible and mutually distinct.
    #[test]
    fn scene_synthesis_reproducible_and_independent() {
        let mut cfg = small_scene();
        cfg.noise.snr_db = Some(0.0);
        cfg.geometry = Geometry {
            tbs_positions: vec![[40.0, 0.0], [0.0, 40.0]],
            ..Geometry::default()
        };
        let a = synthesize_scene(&cfg, 77).unwrap();
        let b = synthesize_scene(&cfg, 77).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].nlos, b[0].nlos);
        assert_eq!(a[1].los, b[1].los);
        assert_ne!(a[0].tx_symbols, a[1].tx_symbols);
        // noise variance from the -5 dB-style definition: here 0 dB -> sigma2 = 1
        assert_relative_eq!(a[0].noise_sigma2, 1.0, epsilon = 1e-12);
    }

    // The combined view is the elementwise sum of the stored paths.
    #[test]
    fn combined_is_sum_of_paths() {
        let cfg = small_scene();
        let tx = generate_tx_symbols(&cfg.ofdm, 3);
        let cube = synthesize_tbs_echo(&cfg, 0, &tx, 9).unwrap();
        let c = cube.combined();
        let want = &cube.nlos.slice(s![1, 2, .., ..]) + &cube.los.slice(s![1, 2, .., ..]);
        assert_eq!(c.slice(s![1, 2, .., ..]), want);
    }
}
