//! Physical and waveform configuration: OFDM numerology, arrays, geometry,
//! synchronization offsets, noise, and path attenuation.
//!
//! Every angle in the crate is measured counterclockwise from the +x axis of
//! one global frame, and every ULA is broadside-oriented along +x. The AoD of
//! a TBS→target path is the bearing of the target as seen from the TBS; the
//! AoA at the PBS is the bearing of the target as seen from the PBS; the LoS
//! angle of a TBS is the bearing of the PBS as seen from the TBS and is used
//! for both ends of the direct path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// OFDM numerology.
///
/// The total symbol duration is derived, never stored:
/// `symbol_duration_s() = 1/subcarrier_spacing_hz + cp_duration_s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub carrier_freq_hz: f64,
    pub subcarrier_spacing_hz: f64,
    #[serde(default)]
    pub cp_duration_s: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 512,
            n_symbols: 256,
            carrier_freq_hz: 24.0e9,
            subcarrier_spacing_hz: 120.0e3,
            cp_duration_s: 1.33e-6,
        }
    }
}

impl OfdmConfig {
    /// Total OFDM symbol duration (elementary duration plus cyclic prefix).
    pub fn symbol_duration_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz + self.cp_duration_s
    }

    /// Carrier wavelength in meters.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 {
            return Err(Error::InvalidConfig("n_subcarriers must be >= 2".into()));
        }
        if self.n_symbols < 2 {
            return Err(Error::InvalidConfig("n_symbols must be >= 2".into()));
        }
        if !(self.subcarrier_spacing_hz > 0.0) {
            return Err(Error::InvalidConfig(
                "subcarrier_spacing_hz must be > 0".into(),
            ));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::InvalidConfig("carrier_freq_hz must be > 0".into()));
        }
        if !(self.cp_duration_s >= 0.0) || !self.cp_duration_s.is_finite() {
            return Err(Error::InvalidConfig(
                "cp_duration_s must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Antenna array layout. `element_spacing_m = None` selects half-wavelength
/// spacing, which keeps all array sine mappings unambiguous.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_tx_per_tbs: usize,
    pub n_rx_pbs: usize,
    #[serde(default)]
    pub element_spacing_m: Option<f64>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_tx_per_tbs: 64,
            n_rx_pbs: 64,
            element_spacing_m: None,
        }
    }
}

impl ArrayConfig {
    /// Element spacing, defaulting to half the carrier wavelength.
    pub fn element_spacing_m(&self, wavelength_m: f64) -> f64 {
        self.element_spacing_m.unwrap_or(wavelength_m / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx_per_tbs < 1 || self.n_rx_pbs < 1 {
            return Err(Error::InvalidConfig("antenna counts must be >= 1".into()));
        }
        if let Some(d) = self.element_spacing_m {
            if !(d > 0.0) {
                return Err(Error::InvalidConfig(
                    "element_spacing_m must be > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// 2-D placement of every node plus the target's velocity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub tbs_positions: Vec<[f64; 2]>,
    pub pbs_position: [f64; 2],
    pub target_position: [f64; 2],
    pub target_speed_mps: f64,
    /// Heading of the velocity vector, counterclockwise from +x, in [0, 2π).
    pub target_heading_rad: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            tbs_positions: vec![[40.0, 0.0], [0.0, 40.0], [0.0, 80.0], [80.0, 0.0]],
            pbs_position: [80.0, 80.0],
            target_position: [40.0, 40.0],
            target_speed_mps: 27.0,
            target_heading_rad: 0.785,
        }
    }
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Bearing of `to` as seen from `from`, counterclockwise from +x.
pub fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

impl Geometry {
    pub fn n_tbs(&self) -> usize {
        self.tbs_positions.len()
    }

    /// Keeps only the first `count` TBSs.
    pub fn truncate_tbs(&mut self, count: usize) {
        self.tbs_positions.truncate(count);
    }

    pub fn validate(&self) -> Result<()> {
        if self.tbs_positions.is_empty() {
            return Err(Error::InvalidConfig("at least one TBS required".into()));
        }
        for (i, &tbs) in self.tbs_positions.iter().enumerate() {
            if distance(tbs, self.pbs_position) == 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "TBS {i} coincides with the PBS"
                )));
            }
            if distance(tbs, self.target_position) == 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "target coincides with TBS {i}"
                )));
            }
        }
        if distance(self.pbs_position, self.target_position) == 0.0 {
            return Err(Error::DegenerateGeometry(
                "target coincides with the PBS".into(),
            ));
        }
        if !(self.target_speed_mps >= 0.0) {
            return Err(Error::InvalidConfig("target_speed_mps must be >= 0".into()));
        }
        if !self.target_heading_rad.is_finite() {
            return Err(Error::InvalidConfig("target_heading_rad must be finite".into()));
        }
        Ok(())
    }
}

/// How the per-symbol offsets evolve over the burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetMode {
    /// Offsets constant over the burst.
    #[default]
    Constant,
    /// Offsets drift linearly with elapsed time `m * T`.
    LinearDrift,
}

/// Time and carrier-frequency offsets of each TBS clock relative to the PBS.
///
/// Both paths from one TBS carry identical offsets; that shared structure is
/// what the NLCC correction exploits. Entries are per TBS; a single entry is
/// broadcast to every TBS.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncOffsets {
    #[serde(default)]
    pub mode: OffsetMode,
    /// Base time offsets in nanoseconds, one per TBS (or one broadcast value).
    pub to_ns: Vec<f64>,
    /// Base carrier-frequency offsets as fractions of the subcarrier spacing.
    pub cfo_frac: Vec<f64>,
    /// Drift rate of the time offset, ns per second of burst time.
    #[serde(default)]
    pub to_drift_ns_per_s: f64,
    /// Drift rate of the CFO, Hz per second of burst time.
    #[serde(default)]
    pub cfo_drift_hz_per_s: f64,
}

impl Default for SyncOffsets {
    fn default() -> Self {
        // Table defaults: TOs spread over [30, 60] ns and CFOs over
        // [0.03, 0.06] subcarrier spacings across the four TBSs.
        Self {
            mode: OffsetMode::Constant,
            to_ns: vec![30.0, 40.0, 50.0, 60.0],
            cfo_frac: vec![0.03, 0.04, 0.05, 0.06],
            to_drift_ns_per_s: 0.0,
            cfo_drift_hz_per_s: 0.0,
        }
    }
}

impl SyncOffsets {
    /// All offsets zero (perfect synchronization).
    pub fn zero() -> Self {
        Self {
            mode: OffsetMode::Constant,
            to_ns: vec![0.0],
            cfo_frac: vec![0.0],
            to_drift_ns_per_s: 0.0,
            cfo_drift_hz_per_s: 0.0,
        }
    }

    /// Same base TO/CFO for every TBS.
    pub fn uniform(to_ns: f64, cfo_frac: f64) -> Self {
        Self {
            mode: OffsetMode::Constant,
            to_ns: vec![to_ns],
            cfo_frac: vec![cfo_frac],
            to_drift_ns_per_s: 0.0,
            cfo_drift_hz_per_s: 0.0,
        }
    }

    fn entry(values: &[f64], tbs: usize) -> f64 {
        if values.len() == 1 {
            values[0]
        } else {
            values[tbs]
        }
    }

    /// Time offset of TBS `tbs` at OFDM symbol `m`, in seconds.
    pub fn time_offset_s(&self, tbs: usize, m: usize, symbol_duration_s: f64) -> f64 {
        let base = Self::entry(&self.to_ns, tbs) * 1e-9;
        match self.mode {
            OffsetMode::Constant => base,
            OffsetMode::LinearDrift => {
                base + self.to_drift_ns_per_s * 1e-9 * (m as f64 * symbol_duration_s)
            }
        }
    }

    /// CFO of TBS `tbs` at OFDM symbol `m`, in Hz.
    pub fn cfo_hz(&self, tbs: usize, m: usize, symbol_duration_s: f64, scs_hz: f64) -> f64 {
        let base = Self::entry(&self.cfo_frac, tbs) * scs_hz;
        match self.mode {
            OffsetMode::Constant => base,
            OffsetMode::LinearDrift => {
                base + self.cfo_drift_hz_per_s * (m as f64 * symbol_duration_s)
            }
        }
    }

    pub fn validate(&self, n_tbs: usize) -> Result<()> {
        for (name, v) in [("to_ns", &self.to_ns), ("cfo_frac", &self.cfo_frac)] {
            if v.len() != 1 && v.len() < n_tbs {
                return Err(Error::InvalidConfig(format!(
                    "offsets.{name} must have one entry or one per TBS ({n_tbs})"
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "offsets.{name} entries must be finite"
                )));
            }
        }
        if !self.to_drift_ns_per_s.is_finite() || !self.cfo_drift_hz_per_s.is_finite() {
            return Err(Error::InvalidConfig("offset drift rates must be finite".into()));
        }
        Ok(())
    }
}

/// Receiver noise. `snr_db = None` disables noise entirely.
///
/// The SNR is the per-element NLoS-signal-to-noise power ratio at the PBS,
/// before any array or accumulation gain; the complex noise variance is
/// `sigma2 = P_nlos_element / 10^(snr_db/10)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            snr_db: Some(-5.0),
            rng_seed: 0,
        }
    }
}

/// Path attenuation handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AttenuationMode {
    /// Unit attenuation on both paths and a unit reflecting factor, so the
    /// configured SNR alone sets the difficulty.
    #[default]
    Normalized,
    /// Free-space closed forms: the NLoS amplitude is
    /// `sqrt(lambda^2 / ((4*pi)^3 * r_tbs_target^2 * r_target_pbs^2)) * beta`
    /// and the LoS amplitude is `sqrt(lambda^2 / ((4*pi)^3 * r_los^4))`.
    Physical,
}

/// Per-TBS channel attenuation parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    #[serde(default)]
    pub attenuation_mode: AttenuationMode,
    /// Complex reflecting factor `[re, im]` per TBS (broadcast like offsets).
    /// Only used in physical mode.
    #[serde(default = "default_reflecting")]
    pub reflecting_factor: Vec<[f64; 2]>,
}

fn default_reflecting() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            attenuation_mode: AttenuationMode::Normalized,
            reflecting_factor: default_reflecting(),
        }
    }
}

impl ChannelParams {
    pub fn reflecting_factor_for(&self, tbs: usize) -> num_complex::Complex<f64> {
        let v = if self.reflecting_factor.len() == 1 {
            self.reflecting_factor[0]
        } else {
            self.reflecting_factor[tbs]
        };
        num_complex::Complex::new(v[0], v[1])
    }

    pub fn validate(&self, n_tbs: usize) -> Result<()> {
        if self.reflecting_factor.len() != 1 && self.reflecting_factor.len() < n_tbs {
            return Err(Error::InvalidConfig(
                "channel.reflecting_factor must have one entry or one per TBS".into(),
            ));
        }
        Ok(())
    }
}

/// Complete scene description; immutable after validation and safe to share
/// read-only across parallel workers.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub ofdm: OfdmConfig,
    pub array: ArrayConfig,
    pub geometry: Geometry,
    pub offsets: SyncOffsets,
    pub noise: NoiseConfig,
    pub channel: ChannelParams,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.array.validate()?;
        self.geometry.validate()?;
        self.offsets.validate(self.geometry.n_tbs())?;
        self.channel.validate(self.geometry.n_tbs())?;
        if let Some(snr) = self.noise.snr_db {
            if !snr.is_finite() {
                return Err(Error::InvalidConfig("noise.snr_db must be finite".into()));
            }
        }
        Ok(())
    }

    /// Resolved element spacing in meters.
    pub fn element_spacing_m(&self) -> f64 {
        self.array.element_spacing_m(self.ofdm.wavelength_m())
    }
}

/// Distances, delays, and angles of one TBS's two propagation paths.
#[derive(Debug, Clone, Copy)]
pub struct PathParameters {
    /// TBS→target distance (m).
    pub r_tbs_target_m: f64,
    /// Target→PBS distance (m).
    pub r_target_pbs_m: f64,
    /// TBS→PBS direct distance (m).
    pub r_los_m: f64,
    /// Total NLoS delay `(r_tbs_target + r_target_pbs) / c` (s).
    pub tau_nlos_s: f64,
    /// LoS delay `r_los / c` (s).
    pub tau_los_s: f64,
    /// AoD of the TBS→target leg (rad).
    pub aod_nlos_rad: f64,
    /// AoA of the target→PBS leg at the PBS (rad).
    pub aoa_nlos_rad: f64,
    /// Direct-path angle, used at both ends of the LoS path (rad).
    pub los_angle_rad: f64,
}

/// Computes the per-path distances, delays, and angles for one TBS.
pub fn derive_path_parameters(geometry: &Geometry, tbs_index: usize) -> Result<PathParameters> {
    let tbs = *geometry
        .tbs_positions
        .get(tbs_index)
        .ok_or_else(|| Error::InvalidConfig(format!("no TBS with index {tbs_index}")))?;
    let pbs = geometry.pbs_position;
    let target = geometry.target_position;

    let r_tbs_target = distance(tbs, target);
    let r_target_pbs = distance(target, pbs);
    let r_los = distance(tbs, pbs);
    if r_tbs_target == 0.0 || r_target_pbs == 0.0 || r_los == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "zero-length path for TBS {tbs_index}"
        )));
    }

    Ok(PathParameters {
        r_tbs_target_m: r_tbs_target,
        r_target_pbs_m: r_target_pbs,
        r_los_m: r_los,
        tau_nlos_s: (r_tbs_target + r_target_pbs) / SPEED_OF_LIGHT,
        tau_los_s: r_los / SPEED_OF_LIGHT,
        aod_nlos_rad: bearing(tbs, target),
        aoa_nlos_rad: bearing(pbs, target),
        los_angle_rad: bearing(tbs, pbs),
    })
}

/// Bistatic Doppler shift for a hypothesized speed/heading and path angles.
///
/// Returns `-(v*fc/c) * [cos(heading - aoa) + cos(heading - aod)]`, the rate
/// of change of the summed TBS→target→PBS path length scaled to carrier
/// cycles. Used both for synthesis truth and for grid hypotheses.
pub fn doppler_shift_hz(
    speed_mps: f64,
    heading_rad: f64,
    aod_nlos_rad: f64,
    aoa_nlos_rad: f64,
    carrier_freq_hz: f64,
) -> f64 {
    -(speed_mps * carrier_freq_hz / SPEED_OF_LIGHT)
        * ((heading_rad - aoa_nlos_rad).cos() + (heading_rad - aod_nlos_rad).cos())
}

/// First-order bistatic Doppler shift of the target in `geometry`.
pub fn bistatic_doppler(
    geometry: &Geometry,
    aod_nlos_rad: f64,
    aoa_nlos_rad: f64,
    carrier_freq_hz: f64,
) -> f64 {
    doppler_shift_hz(
        geometry.target_speed_mps,
        geometry.target_heading_rad,
        aod_nlos_rad,
        aoa_nlos_rad,
        carrier_freq_hz,
    )
}

/// Bistatic Doppler including the quadratic `v^2/c^2` re-reflection term that
/// the first-order expression drops.
pub fn bistatic_doppler_exact(
    geometry: &Geometry,
    aod_nlos_rad: f64,
    aoa_nlos_rad: f64,
    carrier_freq_hz: f64,
) -> f64 {
    bistatic_doppler(geometry, aod_nlos_rad, aoa_nlos_rad, carrier_freq_hz)
        + doppler_quadratic_term_hz(geometry, aod_nlos_rad, aoa_nlos_rad, carrier_freq_hz)
}

/// The quadratic term alone: `v^2*fc*cos(θ-aoa)*cos(θ-aod)/c^2`.
pub fn doppler_quadratic_term_hz(
    geometry: &Geometry,
    aod_nlos_rad: f64,
    aoa_nlos_rad: f64,
    carrier_freq_hz: f64,
) -> f64 {
    let v = geometry.target_speed_mps;
    let th = geometry.target_heading_rad;
    v * v * carrier_freq_hz * (th - aoa_nlos_rad).cos() * (th - aod_nlos_rad).cos()
        / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}
