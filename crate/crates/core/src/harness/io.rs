//! CSV and binary file emitters.
//!
//! All writers format floats with Rust's shortest round-trip representation,
//! so identical inputs always produce byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::channel::EchoCube;
use crate::error::Result;
use crate::fusion::{PositionGrid, Profile, VelocityGrid};
use crate::preprocess::FeatureVectors;
use crate::scene::SceneConfig;

use super::RmseRecord;

/// RMSE sweep curve: one row per sweep point.
pub fn write_sweep_csv(path: &Path, records: &[RmseRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "sweep_value",
        "rmse_location_m",
        "rmse_speed_mps",
        "rmse_heading_rad",
        "rmse_velocity_avg",
        "ci_location_m",
        "ci_speed_mps",
        "ci_heading_rad",
        "trials",
    ])
    .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.sweep_value.to_string(),
            r.rmse_location_m.to_string(),
            r.rmse_speed_mps.to_string(),
            r.rmse_heading_rad.to_string(),
            r.rmse_velocity_avg.to_string(),
            r.ci_location_m.to_string(),
            r.ci_speed_mps.to_string(),
            r.ci_heading_rad.to_string(),
            r.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Position search surface as `x_m,y_m,magnitude` rows.
pub fn write_position_heatmap_csv(path: &Path, grid: &PositionGrid, profile: &Profile) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x_m", "y_m", "magnitude"]).map_err(csv_err)?;
    for (i, v) in profile.values.iter().enumerate() {
        let c = grid.cell(i);
        w.write_record([c[0].to_string(), c[1].to_string(), v.norm().to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Velocity search surface as `heading_rad,speed_mps,magnitude` rows.
pub fn write_velocity_heatmap_csv(
    path: &Path,
    grid: &VelocityGrid,
    profile: &Profile,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["heading_rad", "speed_mps", "magnitude"])
        .map_err(csv_err)?;
    for (z, v) in profile.values.iter().enumerate() {
        let (speed, heading) = grid.cell(z);
        w.write_record([
            heading.to_string(),
            speed.to_string(),
            v.norm().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Feature vectors as `kind,index,re,im` rows.
pub fn write_feature_vectors_csv(path: &Path, fv: &FeatureVectors) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["kind", "index", "re", "im"]).map_err(csv_err)?;
    for (i, v) in fv.range_fv.iter().enumerate() {
        w.write_record(["range".into(), i.to_string(), v.re.to_string(), v.im.to_string()])
            .map_err(csv_err)?;
    }
    for (i, v) in fv.velocity_fv.iter().enumerate() {
        w.write_record([
            "velocity".into(),
            i.to_string(),
            v.re.to_string(),
            v.im.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// MUSIC spectrum surface as `aoa_rad,aod_rad,value` rows.
pub fn write_spectrum_csv(
    path: &Path,
    aoa_angles: &[f64],
    aod_angles: &[f64],
    surface: &ndarray::Array2<f64>,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["aoa_rad", "aod_rad", "value"]).map_err(csv_err)?;
    for (i, &aoa) in aoa_angles.iter().enumerate() {
        for (t, &aod) in aod_angles.iter().enumerate() {
            w.write_record([aoa.to_string(), aod.to_string(), surface[[i, t]].to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// FNV-1a over the canonical TOML serialization of the scene; stable across
/// runs and platforms.
pub fn scene_hash(scene: &SceneConfig) -> u64 {
    let text = toml::to_string(scene).expect("scene serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Dumps one path tensor of a cube as little-endian float64 interleaved
/// re/im after a one-line text header carrying the shape and scene hash.
pub fn dump_cube_tensor(
    path: &Path,
    cube: &EchoCube,
    tensor: &str,
    scene: &SceneConfig,
) -> Result<()> {
    let data = match tensor {
        "nlos" => &cube.nlos,
        "los" => &cube.los,
        other => {
            return Err(crate::error::Error::InvalidConfig(format!(
                "unknown tensor '{other}' (expected nlos or los)"
            )))
        }
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let (n_c, m_sym, n_rx, n_tx) = data.dim();
    writeln!(
        f,
        "coopsense-cube v1 tensor={tensor} tbs={} shape={n_c},{m_sym},{n_rx},{n_tx} order=subcarrier,symbol,rx,tx scene={:016x}",
        cube.tbs_index,
        scene_hash(scene)
    )?;
    for v in data.iter() {
        f.write_all(&v.re.to_le_bytes())?;
        f.write_all(&v.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_tx_symbols, synthesize_tbs_echo};

    #[test]
    fn cube_dump_layout() {
        let mut scene = SceneConfig::default();
        scene.ofdm.n_subcarriers = 4;
        scene.ofdm.n_symbols = 3;
        scene.array.n_rx_pbs = 2;
        scene.array.n_tx_per_tbs = 2;
        scene.noise.snr_db = None;
        let tx = generate_tx_symbols(&scene.ofdm, 1);
        let cube = synthesize_tbs_echo(&scene, 0, &tx, 2).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.bin");
        dump_cube_tensor(&path, &cube, "nlos", &scene).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&bytes[..newline]).unwrap();
        assert!(header.contains("shape=4,3,2,2"));
        let payload = &bytes[newline + 1..];
        assert_eq!(payload.len(), 4 * 3 * 2 * 2 * 16);
        // first element round-trips
        let re = f64::from_le_bytes(payload[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(payload[8..16].try_into().unwrap());
        let first = cube.nlos[[0, 0, 0, 0]];
        assert_eq!(re, first.re);
        assert_eq!(im, first.im);

        assert!(dump_cube_tensor(&path, &cube, "bogus", &scene).is_err());
    }

    #[test]
    fn scene_hash_stable_and_sensitive() {
        let a = SceneConfig::default();
        let mut b = SceneConfig::default();
        assert_eq!(scene_hash(&a), scene_hash(&b));
        b.ofdm.n_subcarriers = 64;
        assert_ne!(scene_hash(&a), scene_hash(&b));
    }
}
