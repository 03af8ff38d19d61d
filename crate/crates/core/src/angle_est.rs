//! Two-stage joint AoA/AoD estimation.
//!
//! Stage one forms the all-antenna information matrix at the grid origin,
//! takes its 2-D DFT, and converts the magnitude peak bin pair into rough
//! angles. Stage two runs 2D-MUSIC over a search window of ±1 DFT bin around
//! the rough result, on the covariance of all vectorized snapshots. A
//! full-range MUSIC search over the same lattice is provided as the baseline
//! for the cost benchmark.
//!
//! All searched angles live on one global lattice `-π/2 + k*step` so that the
//! restricted and full searches report comparable argmax cells. The lattice
//! covers the canonical sine-visible region of a ULA once; angles outside
//! `[-π/2, π/2]` alias onto it and are disambiguated later against scene
//! geometry (see [`resolve_angle_branch`]).

use ndarray::{Array2, Array4, ArrayView2};

use crate::error::{Error, Result};
use crate::C64;

/// All-antenna information matrix at one (symbol, subcarrier) cell: the
/// received data right-multiplied by the regularized generalized inverse of
/// the transmit data vector.
#[derive(Debug, Clone)]
pub struct AllAntennaMatrix {
    /// Shape `(N_rx, N_tx)`.
    pub matrix: Array2<C64>,
    pub symbol_index: usize,
    pub subcarrier_index: usize,
    pub regularization: f64,
}

/// `Y = y x^H (x x^H + ρI)^{-1}`, evaluated through the rank-one closed form
/// `Y = y x^H / (‖x‖² + ρ)`, which is exact for any vector `x` by the
/// Sherman–Morrison identity.
pub fn all_antenna_matrix(
    rx_vector: &[C64],
    tx_vector: &[C64],
    rho: f64,
    symbol_index: usize,
    subcarrier_index: usize,
) -> Result<AllAntennaMatrix> {
    if rho < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "regularization must be >= 0, got {rho}"
        )));
    }
    let energy: f64 = tx_vector.iter().map(|x| x.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::InvalidConfig("tx_vector must be nonzero".into()));
    }
    let denom = energy + rho;
    let matrix = Array2::from_shape_fn((rx_vector.len(), tx_vector.len()), |(j, k)| {
        rx_vector[j] * tx_vector[k].conj() / denom
    });
    Ok(AllAntennaMatrix {
        matrix,
        symbol_index,
        subcarrier_index,
        regularization: rho,
    })
}

impl AllAntennaMatrix {
    /// Builds the matrix from a transmit-antenna-resolved received slice.
    ///
    /// With per-antenna-separable pilots every transmit stream carries the
    /// same payload symbol `d`, so this is [`all_antenna_matrix`] applied per
    /// stream with the length-one data vector `[d]`: each column is scaled by
    /// `conj(d) / (|d|² + ρ)`.
    pub fn from_resolved_slice(
        slice: ArrayView2<'_, C64>,
        symbol: C64,
        rho: f64,
        symbol_index: usize,
        subcarrier_index: usize,
    ) -> Result<Self> {
        if rho < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "regularization must be >= 0, got {rho}"
            )));
        }
        if symbol.norm_sqr() == 0.0 {
            return Err(Error::InvalidConfig("tx symbol must be nonzero".into()));
        }
        let scale = symbol.conj() / (symbol.norm_sqr() + rho);
        Ok(AllAntennaMatrix {
            matrix: slice.map(|&v| v * scale),
            symbol_index,
            subcarrier_index,
            regularization: rho,
        })
    }
}

/// Result of the DFT rough stage. Bins are raw 2-D DFT indices in
/// `0..N`; the sine estimate interprets bins above `N/2` as negative
/// spatial frequencies.
#[derive(Debug, Clone, Copy)]
pub struct RoughEstimate {
    pub bin_aoa: usize,
    pub bin_aod: usize,
    pub rough_aoa_rad: f64,
    pub rough_aod_rad: f64,
}

fn signed_bin(bin: usize, n: usize) -> i64 {
    if bin <= n / 2 {
        bin as i64
    } else {
        bin as i64 - n as i64
    }
}

/// Converts a signed DFT bin into an angle: `arcsin(λ s / (d N))`.
fn bin_to_angle(signed: i64, n: usize, element_spacing_m: f64, wavelength_m: f64) -> Result<f64> {
    let arg = wavelength_m * signed as f64 / (element_spacing_m * n as f64);
    if arg.abs() > 1.0 {
        return Err(Error::Aliasing(arg));
    }
    Ok(arg.asin())
}

/// Angular resolution of the rough stage: `arcsin(λ / (d N))`.
pub fn rough_resolution_rad(n_elements: usize, element_spacing_m: f64, wavelength_m: f64) -> f64 {
    (wavelength_m / (element_spacing_m * n_elements as f64)).asin()
}

/// 2-D DFT magnitude profile of the all-antenna matrix, as two DFT-matrix
/// products. Element indices enter 1-based to match the steering ladder.
fn dft_profile(matrix: &Array2<C64>) -> Array2<C64> {
    let (n_rx, n_tx) = matrix.dim();
    let tau = std::f64::consts::TAU;
    // rows: A[mu_r, k] = sum_J Y[J,k] e^{-j 2π (J+1) mu_r / N_rx}
    let mut a = Array2::<C64>::zeros((n_rx, n_tx));
    for mu_r in 0..n_rx {
        for k in 0..n_tx {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n_rx {
                acc += matrix[[j, k]] * C64::cis(-tau * (j + 1) as f64 * mu_r as f64 / n_rx as f64);
            }
            a[[mu_r, k]] = acc;
        }
    }
    let mut profile = Array2::<C64>::zeros((n_rx, n_tx));
    for mu_r in 0..n_rx {
        for mu_t in 0..n_tx {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n_tx {
                acc += a[[mu_r, k]] * C64::cis(-tau * (k + 1) as f64 * mu_t as f64 / n_tx as f64);
            }
            profile[[mu_r, mu_t]] = acc;
        }
    }
    profile
}

/// Rough AoA/AoD from the 2-D DFT peak of the grid-origin all-antenna matrix.
/// Ties break toward the lowest row-major index.
pub fn rough_estimate(
    aam: &AllAntennaMatrix,
    element_spacing_m: f64,
    wavelength_m: f64,
) -> Result<RoughEstimate> {
    let (n_rx, n_tx) = aam.matrix.dim();
    let profile = dft_profile(&aam.matrix);
    let mut best = (0usize, 0usize);
    let mut best_mag = f64::NEG_INFINITY;
    for mu_r in 0..n_rx {
        for mu_t in 0..n_tx {
            let mag = profile[[mu_r, mu_t]].norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = (mu_r, mu_t);
            }
        }
    }
    if best_mag <= 0.0 {
        return Err(Error::InvalidConfig("all-antenna matrix is zero".into()));
    }
    let (bin_aoa, bin_aod) = best;
    Ok(RoughEstimate {
        bin_aoa,
        bin_aod,
        rough_aoa_rad: bin_to_angle(signed_bin(bin_aoa, n_rx), n_rx, element_spacing_m, wavelength_m)?,
        rough_aod_rad: bin_to_angle(signed_bin(bin_aod, n_tx), n_tx, element_spacing_m, wavelength_m)?,
    })
}

/// Fine-search windows of ±1 DFT bin around the rough bins. Arcsine
/// arguments at the array edge are clamped to ±1 and flagged.
#[derive(Debug, Clone, Copy)]
pub struct SearchIntervals {
    pub aoa: (f64, f64),
    pub aod: (f64, f64),
    pub clamped: bool,
}

impl SearchIntervals {
    /// The full canonical range of a ULA, used by the baseline full search.
    pub fn full() -> Self {
        Self {
            aoa: (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
            aod: (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
            clamped: false,
        }
    }
}

fn bin_window(
    signed: i64,
    n: usize,
    element_spacing_m: f64,
    wavelength_m: f64,
) -> ((f64, f64), bool) {
    let arg = |s: i64| wavelength_m * s as f64 / (element_spacing_m * n as f64);
    let lo_raw = arg(signed - 1);
    let hi_raw = arg(signed + 1);
    let lo = lo_raw.clamp(-1.0, 1.0);
    let hi = hi_raw.clamp(-1.0, 1.0);
    ((lo.asin(), hi.asin()), lo != lo_raw || hi != hi_raw)
}

pub fn search_intervals(
    rough: &RoughEstimate,
    n_rx: usize,
    n_tx: usize,
    element_spacing_m: f64,
    wavelength_m: f64,
) -> SearchIntervals {
    let (aoa, c1) = bin_window(
        signed_bin(rough.bin_aoa, n_rx),
        n_rx,
        element_spacing_m,
        wavelength_m,
    );
    let (aod, c2) = bin_window(
        signed_bin(rough.bin_aod, n_tx),
        n_tx,
        element_spacing_m,
        wavelength_m,
    );
    SearchIntervals {
        aoa,
        aod,
        clamped: c1 || c2,
    }
}

/// Inclusive index range of global lattice points (`-π/2 + k*step`) falling
/// inside `interval`. Returns `None` when no lattice point is inside.
pub fn lattice_range(interval: (f64, f64), step_rad: f64) -> Option<(usize, usize)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let max_k = (std::f64::consts::PI / step_rad).floor() as i64;
    let eps = 1e-12;
    let lo = (((interval.0 + half_pi) / step_rad) - eps).ceil() as i64;
    let hi = (((interval.1 + half_pi) / step_rad) + eps).floor() as i64;
    let lo = lo.clamp(0, max_k);
    let hi = hi.clamp(0, max_k);
    if hi < lo {
        None
    } else {
        Some((lo as usize, hi as usize))
    }
}

/// Number of lattice points a search over `interval` evaluates per axis.
pub fn lattice_count(interval: (f64, f64), step_rad: f64) -> usize {
    lattice_range(interval, step_rad).map_or(0, |(lo, hi)| hi - lo + 1)
}

fn lattice_angle(k: usize, step_rad: f64) -> f64 {
    -std::f64::consts::FRAC_PI_2 + k as f64 * step_rad
}

/// How the MUSIC spectrum denominator is evaluated.
///
/// Both forms compute the same spectral function: the noise-subspace
/// projector of a rank-one signal model is `P = I - e1 e1^H`, so
/// `‖E_n^H a‖² = a^H P a = ‖a‖² - |e1^H a|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumKernel {
    /// Factorized evaluation through the signal eigenvector; used by the
    /// estimation pipeline.
    #[default]
    SignalComplement,
    /// Dense projector matrix applied per grid point; costs the classical
    /// `O(D²)` per evaluation and is used by the cost benchmark.
    NoiseProjector,
}

#[derive(Debug, Clone)]
pub struct MusicConfig {
    /// Regularization of the data demapping, relative to the unit symbol
    /// energy.
    pub rho: f64,
    /// Search lattice step in radians.
    pub step_rad: f64,
    /// Snapshot subsampling stride along both the subcarrier and symbol axes
    /// (1 = every snapshot).
    pub snapshot_stride: usize,
    pub kernel: SpectrumKernel,
}

impl Default for MusicConfig {
    fn default() -> Self {
        Self {
            rho: 1e-3,
            step_rad: 1e-3,
            snapshot_stride: 1,
            kernel: SpectrumKernel::SignalComplement,
        }
    }
}

/// Joint AoA/AoD estimate with the bookkeeping needed by the complexity
/// audit.
#[derive(Debug, Clone)]
pub struct AngleEstimate {
    pub aoa_rad: f64,
    pub aod_rad: f64,
    /// Present when the rough stage ran (the restricted pipeline).
    pub rough: Option<RoughEstimate>,
    pub aoa_interval: (f64, f64),
    pub aod_interval: (f64, f64),
    /// Lattice points per axis actually searched.
    pub grid_aoa_count: usize,
    pub grid_aod_count: usize,
    /// Spectral function evaluations: `grid_aoa_count * grid_aod_count`.
    pub spectrum_evals: usize,
    /// Snapshots accumulated into the covariance.
    pub snapshots_used: usize,
}

/// Covariance of the vectorized snapshots, upper triangle in row-major order.
///
/// The snapshot at `(n, m)` is the row-major vectorization of the resolved
/// `(rx, tx)` slice; the unit-modulus payload symbol cancels in `v v^H`, so
/// no demapping is applied. Shape `(D, D)` with `D = N_rx * N_tx`.
fn snapshot_covariance(nlos: &Array4<C64>, stride: usize) -> (Array2<C64>, usize) {
    let (n_c, m_sym, n_rx, n_tx) = nlos.dim();
    let d = n_rx * n_tx;
    let mut r = vec![C64::new(0.0, 0.0); d * d];
    let mut count = 0usize;
    for n in (0..n_c).step_by(stride) {
        for m in (0..m_sym).step_by(stride) {
            let plane = nlos.slice(ndarray::s![n, m, .., ..]);
            let v = plane.to_slice().expect("contiguous snapshot plane");
            for i in 0..d {
                let vi = v[i];
                let row = &mut r[i * d..(i + 1) * d];
                for (j, rij) in row.iter_mut().enumerate().skip(i) {
                    *rij += vi * v[j].conj();
                }
            }
            count += 1;
        }
    }
    let scale = 1.0 / count as f64;
    let mut cov = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let x = r[i * d + j] * scale;
            cov[[i, j]] = x;
            if i != j {
                cov[[j, i]] = x.conj();
            }
        }
    }
    (cov, count)
}

/// Dominant eigenvector of a Hermitian matrix (the K = 1 signal subspace).
fn signal_eigenvector(cov: &Array2<C64>) -> Result<Vec<C64>> {
    let d = cov.nrows();
    let m = nalgebra::DMatrix::<C64>::from_fn(d, d, |i, j| cov[[i, j]]);
    let eig = m.symmetric_eigen();
    let mut idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > best {
            best = ev;
            idx = i;
        }
    }
    if !best.is_finite() {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    Ok(eig.eigenvectors.column(idx).iter().cloned().collect())
}

struct SearchGrid {
    aoa_lo: usize,
    aoa_count: usize,
    aod_lo: usize,
    aod_count: usize,
}

fn search_grid(intervals: &SearchIntervals, step_rad: f64) -> Result<SearchGrid> {
    let (aoa_lo, aoa_hi) = lattice_range(intervals.aoa, step_rad)
        .ok_or_else(|| Error::EmptyGrid(format!("aoa interval {:?}", intervals.aoa)))?;
    let (aod_lo, aod_hi) = lattice_range(intervals.aod, step_rad)
        .ok_or_else(|| Error::EmptyGrid(format!("aod interval {:?}", intervals.aod)))?;
    Ok(SearchGrid {
        aoa_lo,
        aoa_count: aoa_hi - aoa_lo + 1,
        aod_lo,
        aod_count: aod_hi - aod_lo + 1,
    })
}

/// 2D-MUSIC over the given intervals on the covariance of the resolved NLoS
/// tensor. The returned estimate is the lattice argmax of the spatial
/// spectrum (lowest row-major index on ties).
pub fn fine_estimate(
    nlos: &Array4<C64>,
    element_spacing_m: f64,
    wavelength_m: f64,
    intervals: &SearchIntervals,
    cfg: &MusicConfig,
) -> Result<AngleEstimate> {
    let (_, _, n_rx, n_tx) = nlos.dim();
    if cfg.snapshot_stride == 0 {
        return Err(Error::InvalidConfig("snapshot_stride must be >= 1".into()));
    }
    let (cov, snapshots_used) = snapshot_covariance(nlos, cfg.snapshot_stride);
    let e1 = signal_eigenvector(&cov)?;
    search_spectrum(
        &e1,
        n_rx,
        n_tx,
        element_spacing_m,
        wavelength_m,
        intervals,
        cfg,
        snapshots_used,
    )
}

/// Spectrum search against a precomputed signal eigenvector. Split out so the
/// benchmark can time the search stage against a shared covariance/EVD.
#[allow(clippy::too_many_arguments)]
pub fn search_spectrum(
    signal_eigvec: &[C64],
    n_rx: usize,
    n_tx: usize,
    element_spacing_m: f64,
    wavelength_m: f64,
    intervals: &SearchIntervals,
    cfg: &MusicConfig,
    snapshots_used: usize,
) -> Result<AngleEstimate> {
    let d = n_rx * n_tx;
    assert_eq!(signal_eigvec.len(), d);
    let grid = search_grid(intervals, cfg.step_rad)?;
    let tau_dl = std::f64::consts::TAU * element_spacing_m / wavelength_m;
    let ladder = |angle: f64, n: usize| -> Vec<C64> {
        let zeta = tau_dl * angle.sin();
        (1..=n).map(|j| C64::cis(j as f64 * zeta)).collect()
    };

    // Precompute per-axis steering ladders on the lattice.
    let ar: Vec<Vec<C64>> = (0..grid.aoa_count)
        .map(|i| ladder(lattice_angle(grid.aoa_lo + i, cfg.step_rad), n_rx))
        .collect();
    let at: Vec<Vec<C64>> = (0..grid.aod_count)
        .map(|i| ladder(lattice_angle(grid.aod_lo + i, cfg.step_rad), n_tx))
        .collect();

    let mut best_val = f64::NEG_INFINITY;
    let mut best_cell = (usize::MAX, usize::MAX);
    // Explicit row-major tie-break so the result is independent of the
    // kernel's iteration order.
    let mut consider = |i: usize, t: usize, denom: f64| {
        let val = 1.0 / denom.max(1e-300);
        if val > best_val || (val == best_val && (i, t) < best_cell) {
            best_val = val;
            best_cell = (i, t);
        }
    };

    match cfg.kernel {
        SpectrumKernel::SignalComplement => {
            // e1^H (ar ⊗ at) factorizes: fold the tx ladder into per-rx-row
            // partials once per AoD column.
            let mut partial = vec![C64::new(0.0, 0.0); n_rx];
            for (t, at_t) in at.iter().enumerate() {
                for (j, p) in partial.iter_mut().enumerate() {
                    let row = &signal_eigvec[j * n_tx..(j + 1) * n_tx];
                    *p = row
                        .iter()
                        .zip(at_t.iter())
                        .map(|(e, a)| e.conj() * a)
                        .sum();
                }
                for (i, ar_i) in ar.iter().enumerate() {
                    let inner: C64 = ar_i.iter().zip(partial.iter()).map(|(a, p)| a * p).sum();
                    consider(i, t, d as f64 - inner.norm_sqr());
                }
            }
        }
        SpectrumKernel::NoiseProjector => {
            // P = I - e1 e1^H, applied densely per grid point.
            let mut p = vec![C64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    let delta = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    p[i * d + j] = delta - signal_eigvec[i] * signal_eigvec[j].conj();
                }
            }
            let mut a = vec![C64::new(0.0, 0.0); d];
            for t in 0..grid.aod_count {
                for i in 0..grid.aoa_count {
                    for j in 0..n_rx {
                        for k in 0..n_tx {
                            a[j * n_tx + k] = ar[i][j] * at[t][k];
                        }
                    }
                    let mut denom = 0.0;
                    for (row, &ai) in a.iter().enumerate() {
                        let w: C64 = p[row * d..(row + 1) * d]
                            .iter()
                            .zip(a.iter())
                            .map(|(pij, aj)| pij * aj)
                            .sum();
                        denom += (ai.conj() * w).re;
                    }
                    consider(i, t, denom);
                }
            }
        }
    }

    let (bi, bt) = best_cell;
    Ok(AngleEstimate {
        aoa_rad: lattice_angle(grid.aoa_lo + bi, cfg.step_rad),
        aod_rad: lattice_angle(grid.aod_lo + bt, cfg.step_rad),
        rough: None,
        aoa_interval: intervals.aoa,
        aod_interval: intervals.aod,
        grid_aoa_count: grid.aoa_count,
        grid_aod_count: grid.aod_count,
        spectrum_evals: grid.aoa_count * grid.aod_count,
        snapshots_used,
    })
}

/// Evaluates the MUSIC spectrum over the lattice inside `intervals` and
/// returns the axis angles with the surface values (rows = AoA, columns =
/// AoD), for heatmap export.
pub fn spectrum_surface(
    nlos: &Array4<C64>,
    element_spacing_m: f64,
    wavelength_m: f64,
    intervals: &SearchIntervals,
    cfg: &MusicConfig,
) -> Result<(Vec<f64>, Vec<f64>, Array2<f64>)> {
    let (_, _, n_rx, n_tx) = nlos.dim();
    let d = n_rx * n_tx;
    let (cov, _) = snapshot_covariance(nlos, cfg.snapshot_stride);
    let e1 = signal_eigenvector(&cov)?;
    let grid = search_grid(intervals, cfg.step_rad)?;
    let tau_dl = std::f64::consts::TAU * element_spacing_m / wavelength_m;
    let ladder = |angle: f64, n: usize| -> Vec<C64> {
        let zeta = tau_dl * angle.sin();
        (1..=n).map(|j| C64::cis(j as f64 * zeta)).collect()
    };
    let aoa_angles: Vec<f64> = (0..grid.aoa_count)
        .map(|i| lattice_angle(grid.aoa_lo + i, cfg.step_rad))
        .collect();
    let aod_angles: Vec<f64> = (0..grid.aod_count)
        .map(|t| lattice_angle(grid.aod_lo + t, cfg.step_rad))
        .collect();
    let mut surface = Array2::<f64>::zeros((grid.aoa_count, grid.aod_count));
    for (i, &aoa) in aoa_angles.iter().enumerate() {
        let ar = ladder(aoa, n_rx);
        for (t, &aod) in aod_angles.iter().enumerate() {
            let at = ladder(aod, n_tx);
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..n_rx {
                let row = &e1[j * n_tx..(j + 1) * n_tx];
                let partial: C64 = row.iter().zip(at.iter()).map(|(e, a)| e.conj() * a).sum();
                inner += ar[j] * partial;
            }
            surface[[i, t]] = 1.0 / (d as f64 - inner.norm_sqr()).max(1e-300);
        }
    }
    Ok((aoa_angles, aod_angles, surface))
}

/// Rough stage straight from the resolved NLoS tensor: forms the grid-origin
/// all-antenna matrix and derives the ±1-bin fine-search windows.
pub fn rough_stage(
    nlos: &Array4<C64>,
    tx_symbol_00: C64,
    element_spacing_m: f64,
    wavelength_m: f64,
    rho: f64,
) -> Result<(RoughEstimate, SearchIntervals)> {
    let (_, _, n_rx, n_tx) = nlos.dim();
    let slice = nlos.slice(ndarray::s![0, 0, .., ..]);
    let aam = AllAntennaMatrix::from_resolved_slice(slice, tx_symbol_00, rho, 0, 0)?;
    let rough = rough_estimate(&aam, element_spacing_m, wavelength_m)?;
    let intervals = search_intervals(&rough, n_rx, n_tx, element_spacing_m, wavelength_m);
    Ok((rough, intervals))
}

/// The full two-stage pipeline: rough DFT estimate at the grid origin, ±1-bin
/// window, then restricted 2D-MUSIC.
pub fn estimate_angles(
    nlos: &Array4<C64>,
    tx_symbol_00: C64,
    element_spacing_m: f64,
    wavelength_m: f64,
    cfg: &MusicConfig,
) -> Result<AngleEstimate> {
    let (rough, intervals) =
        rough_stage(nlos, tx_symbol_00, element_spacing_m, wavelength_m, cfg.rho)?;
    let mut est = fine_estimate(nlos, element_spacing_m, wavelength_m, &intervals, cfg)?;
    est.rough = Some(rough);
    Ok(est)
}

/// Resolves the front/back ambiguity of a ULA sine estimate.
///
/// A canonical estimate `a ∈ [-π/2, π/2]` is indistinguishable from `π - a`.
/// Picks the branch whose bearing is closer to the bearing of the known
/// search-region center as seen from the observing node.
pub fn resolve_angle_branch(
    canonical_rad: f64,
    node_pos: [f64; 2],
    region_center: [f64; 2],
) -> f64 {
    let reference = crate::scene::bearing(node_pos, region_center);
    let mirror = std::f64::consts::PI - canonical_rad;
    let wrap = |x: f64| {
        let mut y = x % std::f64::consts::TAU;
        if y > std::f64::consts::PI {
            y -= std::f64::consts::TAU;
        } else if y < -std::f64::consts::PI {
            y += std::f64::consts::TAU;
        }
        y
    };
    let d_can = wrap(canonical_rad - reference).abs();
    let d_mir = wrap(mirror - reference).abs();
    if d_can <= d_mir {
        canonical_rad
    } else {
        wrap(mirror)
    }
}
