//! Experiment orchestration: configuration files, seeded Monte Carlo trials,
//! RMSE sweeps, the angle-estimator benchmark, and CSV output.
//!
//! A full pipeline trial runs, per TBS: echo synthesis, two-stage AoA/AoD
//! estimation, phase compensation and accumulation, NLCC, coherent
//! compression; then fuses all TBS profiles for the location and velocity
//! estimates. Everything is keyed by one master seed; trial-level parallelism
//! never changes results because per-trial streams are derived by index and
//! aggregation runs over the ordered trial list.

pub mod bench;
pub mod gain;
pub mod io;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle_est::{self, AngleEstimate, MusicConfig, SpectrumKernel};
use crate::channel::{self, EchoCube};
use crate::error::{Error, Result};
use crate::fusion::{self, PositionGrid, Profile, VelocityGrid};
use crate::preprocess::{self, FeatureVectors};
use crate::scene::SceneConfig;
use crate::seeds::{self, tag};

pub use bench::{angle_benchmark, BenchConfig, BenchRecord, BenchReport};
pub use gain::{measure_matched_fusion_gain, measure_snr_gain, GainMeasurementConfig};

/// Angle estimator tuning.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Demapping regularization relative to unit symbol energy.
    pub rho: f64,
    /// Fine-search lattice step (rad).
    pub fine_step_rad: f64,
    /// Covariance snapshot stride (1 = every snapshot).
    pub snapshot_stride: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            rho: 1e-3,
            fine_step_rad: 1e-3,
            snapshot_stride: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn music_config(&self) -> MusicConfig {
        MusicConfig {
            rho: self.rho,
            step_rad: self.fine_step_rad,
            snapshot_stride: self.snapshot_stride,
            kernel: SpectrumKernel::SignalComplement,
        }
    }
}

/// Localization search scope.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PositionSearchConfig {
    /// Fine-window center; `None` uses the centroid of all BS positions as
    /// the coverage-overlap estimate.
    pub center: Option<[f64; 2]>,
    /// Fine window side (m).
    pub window_m: f64,
    /// Fine grid step (m).
    pub step_m: f64,
    /// Coarse pass over a wide window that locates the fine window. The fine
    /// window side must stay at least twice the coarse step so the coarse
    /// argmax cell always brackets the target.
    pub coarse_enabled: bool,
    pub coarse_window_m: f64,
    pub coarse_step_m: f64,
}

impl Default for PositionSearchConfig {
    fn default() -> Self {
        Self {
            center: None,
            window_m: 2.0,
            step_m: 0.01,
            coarse_enabled: true,
            coarse_window_m: 80.0,
            coarse_step_m: 1.0,
        }
    }
}

/// Velocity search scope: speeds `[min, max]`, headings `[0, 2π)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocitySearchConfig {
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub speed_step_mps: f64,
    pub heading_step_rad: f64,
}

impl Default for VelocitySearchConfig {
    fn default() -> Self {
        Self {
            speed_min_mps: 0.0,
            speed_max_mps: 54.0,
            speed_step_mps: 0.1,
            heading_step_rad: 1e-3,
        }
    }
}

impl VelocitySearchConfig {
    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(
            self.speed_min_mps,
            self.speed_max_mps,
            self.speed_step_mps,
            self.heading_step_rad,
        )
    }
}

/// Complete experiment configuration: the scene sections plus estimator and
/// search settings, loadable from one TOML file.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub scene: SceneConfig,
    pub estimator: EstimatorConfig,
    pub position_search: PositionSearchConfig,
    pub velocity_search: VelocitySearchConfig,
}

impl RunConfig {
    /// Full-scale defaults (the published simulation parameters).
    pub fn paper_scale() -> Self {
        Self::default()
    }

    /// Smaller profile sized for interactive runs: 128 subcarriers, 64
    /// symbols, 16 antennas per array.
    pub fn desk_scale() -> Self {
        let mut cfg = Self::default();
        cfg.scene.ofdm.n_subcarriers = 128;
        cfg.scene.ofdm.n_symbols = 64;
        cfg.scene.array.n_tx_per_tbs = 16;
        cfg.scene.array.n_rx_pbs = 16;
        cfg
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.scene.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Fine-window center: configured value or the centroid of all base
    /// station positions (the coverage-overlap estimate).
    pub fn region_center(&self) -> [f64; 2] {
        if let Some(c) = self.position_search.center {
            return c;
        }
        let g = &self.scene.geometry;
        let mut x = g.pbs_position[0];
        let mut y = g.pbs_position[1];
        for p in &g.tbs_positions {
            x += p[0];
            y += p[1];
        }
        let n = (g.tbs_positions.len() + 1) as f64;
        [x / n, y / n]
    }
}

/// Per-trial switches.
#[derive(Debug, Clone)]
pub struct TrialOptions {
    /// Cross-correlate NLoS with LoS before compression (offset
    /// cancellation). Off compresses the NLoS matrix directly.
    pub use_nlcc: bool,
    /// Apply the configured synchronization offsets; off zeroes them.
    pub offsets_enabled: bool,
    /// Run the velocity half of the pipeline.
    pub estimate_velocity: bool,
    /// Keep the fused search surfaces in the result.
    pub keep_profiles: bool,
    /// Bypass the angle estimator and compensate with ground-truth angles
    /// (used to isolate fusion-gain measurements).
    pub use_true_angles: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            use_nlcc: true,
            offsets_enabled: true,
            estimate_velocity: true,
            keep_profiles: false,
            use_true_angles: false,
        }
    }
}

/// Angle information of one TBS after front/back disambiguation.
#[derive(Debug, Clone)]
pub struct ResolvedAngles {
    pub tbs_index: usize,
    /// Raw estimator output; `None` when ground-truth angles were injected.
    pub estimate: Option<AngleEstimate>,
    pub aoa_rad: f64,
    pub aod_rad: f64,
}

/// Ground truth the trial was generated from.
#[derive(Debug, Clone, Copy)]
pub struct TrialTruth {
    pub location_m: [f64; 2],
    pub speed_mps: f64,
    pub heading_rad: f64,
}

/// One full pipeline run.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub location_m: [f64; 2],
    /// `(speed, heading)`; `None` when velocity estimation was skipped.
    pub velocity: Option<(f64, f64)>,
    pub angles: Vec<ResolvedAngles>,
    pub position_profile: Option<(PositionGrid, Profile)>,
    pub velocity_profile: Option<(VelocityGrid, Profile)>,
    pub truth: TrialTruth,
}

impl TrialResult {
    pub fn location_error_m(&self) -> f64 {
        let dx = self.location_m[0] - self.truth.location_m[0];
        let dy = self.location_m[1] - self.truth.location_m[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn speed_error_mps(&self) -> Option<f64> {
        self.velocity.map(|(v, _)| v - self.truth.speed_mps)
    }

    pub fn heading_error_rad(&self) -> Option<f64> {
        self.velocity
            .map(|(_, h)| wrap_angle(h - self.truth.heading_rad))
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % std::f64::consts::TAU;
    if y > std::f64::consts::PI {
        y -= std::f64::consts::TAU;
    } else if y <= -std::f64::consts::PI {
        y += std::f64::consts::TAU;
    }
    y
}

fn effective_scene(cfg: &RunConfig, opts: &TrialOptions) -> SceneConfig {
    let mut scene = cfg.scene.clone();
    if !opts.offsets_enabled {
        scene.offsets = crate::scene::SyncOffsets::zero();
    }
    scene
}

struct TbsProducts {
    angles: ResolvedAngles,
    features: FeatureVectors,
}

fn process_tbs(
    cfg: &RunConfig,
    scene: &SceneConfig,
    opts: &TrialOptions,
    cube: &EchoCube,
    region_center: [f64; 2],
) -> Result<TbsProducts> {
    let d_r = scene.element_spacing_m();
    let lambda = scene.ofdm.wavelength_m();
    let truth = &cube.truth.paths;

    let (estimate, aoa, aod) = if opts.use_true_angles {
        (None, truth.aoa_nlos_rad, truth.aod_nlos_rad)
    } else {
        let est = angle_est::estimate_angles(
            &cube.nlos,
            cube.tx_symbols[[0, 0]],
            d_r,
            lambda,
            &cfg.estimator.music_config(),
        )?;
        // a ULA only observes sin(angle); pick the branch pointing at the
        // search region
        let tbs_pos = scene.geometry.tbs_positions[cube.tbs_index];
        let pbs_pos = scene.geometry.pbs_position;
        let aoa = angle_est::resolve_angle_branch(est.aoa_rad, pbs_pos, region_center);
        let aod = angle_est::resolve_angle_branch(est.aod_rad, tbs_pos, region_center);
        (Some(est), aoa, aod)
    };

    // compensation depends on the angles only through their sines, so the
    // branch-resolved values are equivalent to the canonical ones here
    let features = preprocess::feature_vectors(
        cube,
        aoa,
        aod,
        d_r,
        lambda,
        scene.ofdm.subcarrier_spacing_hz,
        opts.use_nlcc,
    )?;

    Ok(TbsProducts {
        angles: ResolvedAngles {
            tbs_index: cube.tbs_index,
            estimate,
            aoa_rad: aoa,
            aod_rad: aod,
        },
        features,
    })
}

fn fused_position(
    scene: &SceneConfig,
    products: &[TbsProducts],
    grid: &PositionGrid,
) -> Result<Profile> {
    let profiles: Vec<Profile> = products
        .iter()
        .map(|p| {
            fusion::position_profile_streaming(
                &p.features.range_fv,
                grid,
                scene.geometry.tbs_positions[p.features.tbs_index],
                scene.geometry.pbs_position,
                &scene.ofdm,
            )
        })
        .collect();
    fusion::fuse_profiles(&profiles)
}

/// Runs one seeded trial of the full pipeline in processing order:
/// synthesis, angle estimation, preprocessing, fusion.
pub fn run_trial(cfg: &RunConfig, opts: &TrialOptions, seed: u64) -> Result<TrialResult> {
    let scene = effective_scene(cfg, opts);
    scene.validate()?;
    let region_center = cfg.region_center();

    let mut products = Vec::with_capacity(scene.geometry.n_tbs());
    for i in 0..scene.geometry.n_tbs() {
        let tbs_seed = seeds::mix(seeds::mix(seed, tag::TBS), i as u64);
        let tx = channel::generate_tx_symbols(&scene.ofdm, seeds::mix(tbs_seed, tag::TX_SYMBOLS));
        let cube = channel::synthesize_tbs_echo(&scene, i, &tx, tbs_seed)?;
        products.push(process_tbs(cfg, &scene, opts, &cube, region_center)?);
        // cube dropped here; per-TBS tensors are the peak memory user
    }

    // localization: optional coarse pass locates the fine window
    let fine_center = if cfg.position_search.coarse_enabled {
        let coarse = fusion::centered_position_grid(
            region_center,
            cfg.position_search.coarse_window_m,
            cfg.position_search.coarse_step_m,
        )?;
        let fused = fused_position(&scene, &products, &coarse)?;
        coarse.cell(fused.peak_index)
    } else {
        region_center
    };
    let grid = fusion::centered_position_grid(
        fine_center,
        cfg.position_search.window_m,
        cfg.position_search.step_m,
    )?;
    let fused = fused_position(&scene, &products, &grid)?;
    let location = grid.cell(fused.peak_index);

    // velocity, from the per-TBS resolved angle estimates
    let (velocity, velocity_profile) = if opts.estimate_velocity {
        let vgrid = cfg.velocity_search.grid()?;
        let profiles: Vec<Profile> = products
            .iter()
            .map(|p| {
                fusion::velocity_profile_streaming(
                    &p.features.velocity_fv,
                    &vgrid,
                    p.angles.aoa_rad,
                    p.angles.aod_rad,
                    &scene.ofdm,
                )
            })
            .collect();
        let fused_v = fusion::fuse_profiles(&profiles)?;
        let cell = vgrid.cell(fused_v.peak_index);
        (
            Some(cell),
            opts.keep_profiles.then_some((vgrid, fused_v)),
        )
    } else {
        (None, None)
    };

    Ok(TrialResult {
        location_m: location,
        velocity,
        angles: products.into_iter().map(|p| p.angles).collect(),
        position_profile: opts.keep_profiles.then_some((grid, fused)),
        velocity_profile,
        truth: TrialTruth {
            location_m: scene.geometry.target_position,
            speed_mps: scene.geometry.target_speed_mps,
            heading_rad: scene.geometry.target_heading_rad,
        },
    })
}

/// Swept experiment variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    SnrDb,
    ToNs,
    CfoFrac,
    TbsCount,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::ToNs => "to_ns",
            SweepVariable::CfoFrac => "cfo_frac",
            SweepVariable::TbsCount => "tbs_count",
        }
    }
}

/// A Monte Carlo sweep: one variable stepped over `values`, an RMSE record
/// per point, one CSV curve per TBS count.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: RunConfig,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// TBS counts to emit as separate curves (ignored when sweeping
    /// `TbsCount`).
    pub tbs_counts: Vec<usize>,
    pub trials: usize,
    pub use_nlcc: bool,
    pub offsets_enabled: bool,
    pub estimate_velocity: bool,
    pub master_seed: u64,
    /// Directory for CSV output; `None` skips writing.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(config: RunConfig, variable: SweepVariable, values: Vec<f64>) -> Self {
        Self {
            config,
            variable,
            values,
            tbs_counts: vec![3],
            trials: 100,
            use_nlcc: true,
            offsets_enabled: true,
            estimate_velocity: true,
            master_seed: 0,
            out_dir: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.values.is_empty() || self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sweep values must be finite".into()));
        }
        Ok(())
    }
}

/// RMSEs over the trials of one sweep point, with 95% CI half-widths.
/// Velocity fields are NaN when velocity estimation was skipped.
#[derive(Debug, Clone)]
pub struct RmseRecord {
    pub sweep_value: f64,
    pub rmse_location_m: f64,
    pub rmse_speed_mps: f64,
    pub rmse_heading_rad: f64,
    /// Mean of the speed and heading RMSEs.
    pub rmse_velocity_avg: f64,
    pub trials: usize,
    pub ci_location_m: f64,
    pub ci_speed_mps: f64,
    pub ci_heading_rad: f64,
}

fn rmse_and_ci(sq_errors: &[f64]) -> (f64, f64) {
    let n = sq_errors.len() as f64;
    let mean = sq_errors.iter().sum::<f64>() / n;
    let rmse = mean.sqrt();
    if rmse == 0.0 || sq_errors.len() < 2 {
        return (rmse, 0.0);
    }
    let var = sq_errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // delta method: sd(rmse) ~ sd(mean squared error) / (2 rmse)
    let ci = 1.96 * (var / n).sqrt() / (2.0 * rmse);
    (rmse, ci)
}

fn apply_sweep_value(cfg: &mut RunConfig, variable: SweepVariable, value: f64) {
    match variable {
        SweepVariable::SnrDb => cfg.scene.noise.snr_db = Some(value),
        SweepVariable::ToNs => cfg.scene.offsets.to_ns = vec![value],
        SweepVariable::CfoFrac => cfg.scene.offsets.cfo_frac = vec![value],
        SweepVariable::TbsCount => cfg.scene.geometry.truncate_tbs(value as usize),
    }
}

/// Runs all trials of one configured point and aggregates RMSEs.
pub fn run_point(
    cfg: &RunConfig,
    opts: &TrialOptions,
    trials: usize,
    master_seed: u64,
    sweep_value: f64,
) -> Result<RmseRecord> {
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = seeds::mix(seeds::mix(master_seed, tag::TRIAL), t as u64);
            run_trial(cfg, opts, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let loc_sq: Vec<f64> = results.iter().map(|r| r.location_error_m().powi(2)).collect();
    let (rmse_location_m, ci_location_m) = rmse_and_ci(&loc_sq);

    let (rmse_speed_mps, ci_speed_mps, rmse_heading_rad, ci_heading_rad) =
        if opts.estimate_velocity {
            let sp_sq: Vec<f64> = results
                .iter()
                .map(|r| r.speed_error_mps().unwrap().powi(2))
                .collect();
            let hd_sq: Vec<f64> = results
                .iter()
                .map(|r| r.heading_error_rad().unwrap().powi(2))
                .collect();
            let (rs, cs) = rmse_and_ci(&sp_sq);
            let (rh, ch) = rmse_and_ci(&hd_sq);
            (rs, cs, rh, ch)
        } else {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        };

    Ok(RmseRecord {
        sweep_value,
        rmse_location_m,
        rmse_speed_mps,
        rmse_heading_rad,
        rmse_velocity_avg: (rmse_speed_mps + rmse_heading_rad) / 2.0,
        trials,
        ci_location_m,
        ci_speed_mps,
        ci_heading_rad,
    })
}

/// Executes the sweep. Returns one `(tbs_count, records)` curve per
/// configured TBS count and writes one CSV per curve when an output
/// directory is set.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<(usize, Vec<RmseRecord>)>> {
    spec.validate()?;
    let opts = TrialOptions {
        use_nlcc: spec.use_nlcc,
        offsets_enabled: spec.offsets_enabled,
        estimate_velocity: spec.estimate_velocity,
        ..TrialOptions::default()
    };

    let tbs_counts: Vec<usize> = if spec.variable == SweepVariable::TbsCount {
        vec![spec.config.scene.geometry.n_tbs()]
    } else {
        spec.tbs_counts.clone()
    };

    let mut curves = Vec::new();
    for &count in &tbs_counts {
        let mut records = Vec::with_capacity(spec.values.len());
        for &value in &spec.values {
            let mut cfg = spec.config.clone();
            if spec.variable != SweepVariable::TbsCount {
                cfg.scene.geometry.truncate_tbs(count);
            }
            apply_sweep_value(&mut cfg, spec.variable, value);
            // the point seed depends only on declared experiment structure,
            // never on scheduling
            let point_seed = seeds::mix(
                seeds::mix(spec.master_seed, count as u64),
                value.to_bits(),
            );
            records.push(run_point(&cfg, &opts, spec.trials, point_seed, value)?);
        }
        if let Some(dir) = &spec.out_dir {
            let name = format!(
                "sweep_{}_I{}_{}.csv",
                spec.variable.as_str(),
                count,
                if spec.use_nlcc { "nlcc" } else { "nonlcc" }
            );
            io::write_sweep_csv(&dir.join(name), &records)?;
        }
        curves.push((count, records));
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> RunConfig {
        let mut cfg = RunConfig::desk_scale();
        cfg.scene.ofdm.n_subcarriers = 32;
        cfg.scene.ofdm.n_symbols = 16;
        cfg.scene.array.n_tx_per_tbs = 8;
        cfg.scene.array.n_rx_pbs = 8;
        cfg.scene.geometry.truncate_tbs(3);
        cfg.scene.noise.snr_db = None;
        cfg.estimator.fine_step_rad = 5e-3;
        // the searching scope is an explicit experiment input; center it on
        // the known coverage overlap of this scene
        cfg.position_search.center = Some([40.0, 40.0]);
        cfg.position_search.coarse_enabled = false;
        cfg.position_search.window_m = 0.4;
        cfg.position_search.step_m = 0.02;
        cfg.velocity_search.speed_step_mps = 0.5;
        cfg.velocity_search.heading_step_rad = 0.01;
        cfg
    }

    // Noise-free with offsets on and NLCC: the on-grid truth cell is
    // recovered exactly on both grids.
    #[test]
    fn noise_free_trial_recovers_truth() {
        let mut cfg = tiny_config();
        // put the true velocity on the search grid
        cfg.scene.geometry.target_speed_mps = 27.0;
        cfg.scene.geometry.target_heading_rad = 0.78;
        let r = run_trial(&cfg, &TrialOptions::default(), 1).unwrap();
        assert!(r.location_error_m() < 1e-9, "err {}", r.location_error_m());
        let (v, h) = r.velocity.unwrap();
        assert!((v - 27.0).abs() < 1e-9);
        assert!((h - 0.78).abs() < 1e-9);
    }

    // Same seed, same outputs.
    #[test]
    fn trial_deterministic() {
        let mut cfg = tiny_config();
        cfg.scene.noise.snr_db = Some(5.0);
        let opts = TrialOptions::default();
        let a = run_trial(&cfg, &opts, 42).unwrap();
        let b = run_trial(&cfg, &opts, 42).unwrap();
        assert_eq!(a.location_m, b.location_m);
        assert_eq!(a.velocity, b.velocity);
        let c = run_trial(&cfg, &opts, 43).unwrap();
        let _ = c; // different seed runs fine; outputs may or may not differ
    }

    // Trials = 1: the RMSE equals that trial's absolute error.
    #[test]
    fn single_trial_rmse_is_absolute_error() {
        let mut cfg = tiny_config();
        cfg.scene.noise.snr_db = Some(0.0);
        let opts = TrialOptions::default();
        let rec = run_point(&cfg, &opts, 1, 7, 0.0).unwrap();
        let seed = seeds::mix(seeds::mix(7, tag::TRIAL), 0);
        let single = run_trial(&cfg, &opts, seed).unwrap();
        assert!((rec.rmse_location_m - single.location_error_m()).abs() < 1e-12);
        assert_eq!(rec.ci_location_m, 0.0);
    }

    #[test]
    fn config_round_trip_via_toml() {
        let cfg = RunConfig::desk_scale();
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.scene.ofdm.n_subcarriers, 128);
        assert_eq!(back.estimator.fine_step_rad, cfg.estimator.fine_step_rad);
        assert_eq!(back.position_search.window_m, 2.0);
    }

    #[test]
    fn region_center_defaults_to_bs_centroid() {
        let cfg = RunConfig::default();
        // the four default TBS positions plus the PBS sum to (200, 200)
        let c = cfg.region_center();
        assert_eq!(c, [40.0, 40.0]);
    }

    #[test]
    fn wrap_angle_behaviour() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-3.5) - (-3.5 + std::f64::consts::TAU)).abs() < 1e-12);
        assert_eq!(wrap_angle(0.5), 0.5);
    }
}
