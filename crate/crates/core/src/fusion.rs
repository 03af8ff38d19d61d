//! Symbol-level fusion of multi-TBS feature vectors: grid-search
//! localization and absolute-velocity estimation.
//!
//! Per TBS, a matching matrix of hypothesis phase ramps is correlated with
//! the feature vector, producing a complex profile over the search grid.
//! Profiles from all TBSs are averaged coherently before any peak is taken;
//! the fused argmax is the estimate. Matching matrices can be materialized
//! (exact sizes as specified) or streamed cell-by-cell, which computes the
//! identical profile without the memory footprint.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scene::{self, OfdmConfig, SPEED_OF_LIGHT};
use crate::C64;

/// Grids below this size are evaluated serially; larger ones fan out over
/// the rayon pool.
const PARALLEL_GRID_THRESHOLD: usize = 1 << 16;

/// Square position search grid. Cells flatten row-major with x varying
/// slowest: `cell(i) = origin + (step * (i / side), step * (i % side))`.
#[derive(Debug, Clone, Copy)]
pub struct PositionGrid {
    pub origin: [f64; 2],
    pub step_m: f64,
    pub side_count: usize,
}

impl PositionGrid {
    pub fn len(&self) -> usize {
        self.side_count * self.side_count
    }

    pub fn is_empty(&self) -> bool {
        self.side_count == 0
    }

    pub fn cell(&self, index: usize) -> [f64; 2] {
        let i = index / self.side_count;
        let j = index % self.side_count;
        [
            self.origin[0] + i as f64 * self.step_m,
            self.origin[1] + j as f64 * self.step_m,
        ]
    }
}

/// Grids a square scope of side `side_m` anchored at `origin` with step
/// `step_m`; the side count is `floor(side/step) + 1`.
pub fn build_position_grid(origin: [f64; 2], side_m: f64, step_m: f64) -> Result<PositionGrid> {
    if !(step_m > 0.0) || !(side_m >= 0.0) {
        return Err(Error::InvalidConfig(
            "position grid needs step > 0 and side >= 0".into(),
        ));
    }
    let side_count = (side_m / step_m).floor() as usize + 1;
    Ok(PositionGrid {
        origin,
        step_m,
        side_count,
    })
}

/// Convenience: a grid of the given window side centered on a point.
pub fn centered_position_grid(
    center: [f64; 2],
    window_m: f64,
    step_m: f64,
) -> Result<PositionGrid> {
    build_position_grid(
        [center[0] - window_m / 2.0, center[1] - window_m / 2.0],
        window_m,
        step_m,
    )
}

/// Velocity search grid over speed × heading, flattened column-major with
/// speed varying fastest: `cell(z) = (speed_min + (z % S) * speed_step,
/// (z / S) * heading_step)`.
#[derive(Debug, Clone, Copy)]
pub struct VelocityGrid {
    pub speed_min_mps: f64,
    pub speed_step_mps: f64,
    pub n_speeds: usize,
    pub heading_step_rad: f64,
    pub n_headings: usize,
}

impl VelocityGrid {
    /// Speeds spanning `[speed_min, speed_max]` and headings `[0, 2π)`.
    pub fn new(
        speed_min_mps: f64,
        speed_max_mps: f64,
        speed_step_mps: f64,
        heading_step_rad: f64,
    ) -> Result<Self> {
        if !(speed_step_mps > 0.0) || !(heading_step_rad > 0.0) || speed_max_mps < speed_min_mps {
            return Err(Error::InvalidConfig("invalid velocity grid".into()));
        }
        let n_speeds = ((speed_max_mps - speed_min_mps) / speed_step_mps).floor() as usize + 1;
        let n_headings = (std::f64::consts::TAU / heading_step_rad).ceil() as usize;
        Ok(Self {
            speed_min_mps,
            speed_step_mps,
            n_speeds,
            heading_step_rad,
            n_headings,
        })
    }

    pub fn len(&self) -> usize {
        self.n_speeds * self.n_headings
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (speed, heading) of a flattened cell.
    pub fn cell(&self, index: usize) -> (f64, f64) {
        let s = index % self.n_speeds;
        let d = index / self.n_speeds;
        (
            self.speed_min_mps + s as f64 * self.speed_step_mps,
            d as f64 * self.heading_step_rad,
        )
    }
}

/// What a profile ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Position,
    Velocity,
    Fused,
}

/// Complex search surface with its magnitude peak (lowest index on ties).
#[derive(Debug, Clone)]
pub struct Profile {
    pub values: Vec<C64>,
    pub peak_index: usize,
    pub kind: ProfileKind,
}

impl Profile {
    pub fn new(values: Vec<C64>, kind: ProfileKind) -> Self {
        let mut peak_index = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, v) in values.iter().enumerate() {
            let m = v.norm_sqr();
            if m > best {
                best = m;
                peak_index = i;
            }
        }
        Self {
            values,
            peak_index,
            kind,
        }
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.values[self.peak_index].norm()
    }
}

/// Summed TBS→cell→PBS distance for every grid cell.
pub fn compensated_distances(
    grid: &PositionGrid,
    tbs_position: [f64; 2],
    pbs_position: [f64; 2],
) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let cell = grid.cell(i);
            scene::distance(cell, tbs_position) + scene::distance(cell, pbs_position)
        })
        .collect()
}

/// Delay matching matrix: entry `(n' - 1, cell)` is
/// `exp(-j 2π n' Δf r_cell / c)` for `n' = 1..N_c-1`. Unit modulus
/// everywhere; shape `(N_c - 1, len)`.
pub fn delay_matching_matrix(
    compensated_distances_m: &[f64],
    ofdm: &OfdmConfig,
) -> Array2<C64> {
    let n_rows = ofdm.n_subcarriers - 1;
    let scs = ofdm.subcarrier_spacing_hz;
    let mut out = Array2::<C64>::zeros((n_rows, compensated_distances_m.len()));
    for (col, &r) in compensated_distances_m.iter().enumerate() {
        let base = C64::cis(-std::f64::consts::TAU * scs * r / SPEED_OF_LIGHT);
        let mut phase = C64::new(1.0, 0.0);
        for row in 0..n_rows {
            phase *= base; // n' = row + 1
            out[[row, col]] = phase;
        }
    }
    out
}

/// Position profile of one TBS: `p = range_fv^H * matching`.
pub fn position_profile(range_fv: &[C64], matching: &Array2<C64>) -> Result<Profile> {
    let (rows, cols) = matching.dim();
    if rows != range_fv.len() {
        return Err(Error::ShapeMismatch(format!(
            "feature vector length {} vs matching rows {}",
            range_fv.len(),
            rows
        )));
    }
    let values = (0..cols)
        .map(|c| {
            matching
                .column(c)
                .iter()
                .zip(range_fv.iter())
                .map(|(g, f)| f.conj() * g)
                .sum()
        })
        .collect();
    Ok(Profile::new(values, ProfileKind::Position))
}

/// Streaming equivalent of [`delay_matching_matrix`] + [`position_profile`]:
/// evaluates each cell's phase ladder on the fly.
pub fn position_profile_streaming(
    range_fv: &[C64],
    grid: &PositionGrid,
    tbs_position: [f64; 2],
    pbs_position: [f64; 2],
    ofdm: &OfdmConfig,
) -> Profile {
    let scs = ofdm.subcarrier_spacing_hz;
    let conj_fv: Vec<C64> = range_fv.iter().map(|f| f.conj()).collect();
    let eval = |i: usize| {
        let cell = grid.cell(i);
        let r = scene::distance(cell, tbs_position) + scene::distance(cell, pbs_position);
        let base = C64::cis(-std::f64::consts::TAU * scs * r / SPEED_OF_LIGHT);
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for f in &conj_fv {
            phase *= base;
            acc += f * phase;
        }
        acc
    };
    let values = if grid.len() >= PARALLEL_GRID_THRESHOLD {
        (0..grid.len()).into_par_iter().map(eval).collect()
    } else {
        (0..grid.len()).map(eval).collect()
    };
    Profile::new(values, ProfileKind::Position)
}

/// Coherent average of per-TBS profiles; the fused peak is re-searched on
/// the averaged values.
pub fn fuse_profiles(profiles: &[Profile]) -> Result<Profile> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::InvalidConfig("no profiles to fuse".into()))?;
    let len = first.values.len();
    if profiles.iter().any(|p| p.values.len() != len) {
        return Err(Error::ShapeMismatch("profiles of unequal length".into()));
    }
    let scale = 1.0 / profiles.len() as f64;
    let values = (0..len)
        .map(|i| profiles.iter().map(|p| p.values[i]).sum::<C64>() * scale)
        .collect();
    Ok(Profile::new(values, ProfileKind::Fused))
}

/// Doppler matching matrix over a velocity grid for one TBS's estimated
/// angles: row `z`, column `m' - 1` is `exp(j 2π m' T f_z)` with `f_z`
/// the hypothesis Doppler of cell `z`. Shape `(S*D, M_sym - 1)`.
pub fn doppler_matching_matrix(
    vgrid: &VelocityGrid,
    aoa_rad: f64,
    aod_rad: f64,
    ofdm: &OfdmConfig,
) -> Array2<C64> {
    let n_cols = ofdm.n_symbols - 1;
    let t_sym = ofdm.symbol_duration_s();
    let mut out = Array2::<C64>::zeros((vgrid.len(), n_cols));
    for z in 0..vgrid.len() {
        let (v, heading) = vgrid.cell(z);
        let f =
            scene::doppler_shift_hz(v, heading, aod_rad, aoa_rad, ofdm.carrier_freq_hz);
        let base = C64::cis(std::f64::consts::TAU * t_sym * f);
        let mut phase = C64::new(1.0, 0.0);
        for col in 0..n_cols {
            phase *= base; // m' = col + 1
            out[[z, col]] = phase;
        }
    }
    out
}

/// Velocity profile of one TBS: `v = matching * velocity_fv^H`.
pub fn velocity_profile(velocity_fv: &[C64], matching: &Array2<C64>) -> Result<Profile> {
    let (rows, cols) = matching.dim();
    if cols != velocity_fv.len() {
        return Err(Error::ShapeMismatch(format!(
            "feature vector length {} vs matching columns {}",
            velocity_fv.len(),
            cols
        )));
    }
    let values = (0..rows)
        .map(|z| {
            matching
                .row(z)
                .iter()
                .zip(velocity_fv.iter())
                .map(|(s, e)| s * e.conj())
                .sum()
        })
        .collect();
    Ok(Profile::new(values, ProfileKind::Velocity))
}

/// Streaming equivalent of [`doppler_matching_matrix`] + [`velocity_profile`].
pub fn velocity_profile_streaming(
    velocity_fv: &[C64],
    vgrid: &VelocityGrid,
    aoa_rad: f64,
    aod_rad: f64,
    ofdm: &OfdmConfig,
) -> Profile {
    let t_sym = ofdm.symbol_duration_s();
    let fc = ofdm.carrier_freq_hz;
    let conj_fv: Vec<C64> = velocity_fv.iter().map(|e| e.conj()).collect();
    // the Doppler hypothesis is linear in speed at fixed heading, so each
    // heading column advances its phase base by one multiply per speed step
    let eval_heading = |d: usize| {
        let heading = d as f64 * vgrid.heading_step_rad;
        let g = scene::doppler_shift_hz(1.0, heading, aod_rad, aoa_rad, fc);
        let w0 = C64::cis(std::f64::consts::TAU * t_sym * vgrid.speed_min_mps * g);
        let ws = C64::cis(std::f64::consts::TAU * t_sym * vgrid.speed_step_mps * g);
        let mut base = w0;
        let mut col = Vec::with_capacity(vgrid.n_speeds);
        for _ in 0..vgrid.n_speeds {
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for e in &conj_fv {
                phase *= base;
                acc += phase * e;
            }
            col.push(acc);
            base *= ws;
        }
        col
    };
    let columns: Vec<Vec<C64>> = if vgrid.len() >= PARALLEL_GRID_THRESHOLD {
        (0..vgrid.n_headings).into_par_iter().map(eval_heading).collect()
    } else {
        (0..vgrid.n_headings).map(eval_heading).collect()
    };
    let values = columns.into_iter().flatten().collect();
    Profile::new(values, ProfileKind::Velocity)
}
