//! Command-line front end: single trials, RMSE sweeps, the angle-estimator
//! benchmark, and analytic reports.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use coopsense::harness::{
    self, angle_benchmark, io, measure_matched_fusion_gain, measure_snr_gain, BenchConfig,
    ExperimentSpec, GainMeasurementConfig, RunConfig, SweepVariable, TrialOptions,
};
use coopsense::{analysis, angle_est};

#[derive(Parser)]
#[command(
    name = "coopsense",
    about = "Multi-base-station cooperative passive sensing simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; defaults to the built-in desk-scale profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use the full published simulation parameters instead of the
    /// desk-scale profile (ignored when --config is given).
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Master seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and dump the fused search profiles.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Compress the NLoS matrix directly instead of applying NLCC.
        #[arg(long)]
        no_nlcc: bool,
        /// Disable the synchronization offsets.
        #[arg(long)]
        no_offsets: bool,
        /// Also dump the per-TBS echo tensors as binary files.
        #[arg(long)]
        dump_cubes: bool,
        /// Also dump per-TBS feature vectors as CSV.
        #[arg(long)]
        dump_features: bool,
    },
    /// Monte Carlo RMSE sweep over one variable.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Swept variable.
        #[arg(long, value_enum)]
        var: Var,
        /// SNR points in dB (sweep values or the fixed value).
        #[arg(long, value_delimiter = ',')]
        snr_db: Vec<f64>,
        /// Time-offset points in ns.
        #[arg(long, value_delimiter = ',')]
        to_ns: Vec<f64>,
        /// CFO points as fractions of the subcarrier spacing.
        #[arg(long, value_delimiter = ',')]
        cfo_frac: Vec<f64>,
        /// TBS counts; one CSV curve per count.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        tbs_count: Vec<usize>,
        /// Trials per sweep point.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        no_nlcc: bool,
        #[arg(long)]
        no_offsets: bool,
        /// Skip velocity estimation (location RMSE only).
        #[arg(long)]
        no_velocity: bool,
    },
    /// Paired cost benchmark: two-stage estimator vs full-range 2D-MUSIC.
    AngleBench {
        #[command(flatten)]
        common: CommonArgs,
        /// Paired trials.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Search lattice step in radians for both methods.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Receive antenna count override.
        #[arg(long)]
        rx_antennas: Option<usize>,
        /// Transmit antenna count override.
        #[arg(long)]
        tx_antennas: Option<usize>,
        /// TBS whose NLoS path is estimated.
        #[arg(long, default_value_t = 1)]
        tbs_index: usize,
        /// Evaluate the spectrum through the dense noise projector (the
        /// classical per-point cost) instead of the fast kernel.
        #[arg(long)]
        literal_kernel: bool,
        /// Also export the restricted MUSIC surface of one realization.
        #[arg(long)]
        dump_spectrum: bool,
    },
    /// Analytic complexity and SNR-gain report.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Search step for the complexity formulas (rad).
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Also measure the SNR gains by Monte Carlo.
        #[arg(long)]
        measure: bool,
        /// Trials for the measurement.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum Var {
    SnrDb,
    ToNs,
    CfoFrac,
    TbsCount,
}

impl From<Var> for SweepVariable {
    fn from(v: Var) -> Self {
        match v {
            Var::SnrDb => SweepVariable::SnrDb,
            Var::ToNs => SweepVariable::ToNs,
            Var::CfoFrac => SweepVariable::CfoFrac,
            Var::TbsCount => SweepVariable::TbsCount,
        }
    }
}

fn load_config(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path).context("loading configuration"),
        None if common.paper_scale => Ok(RunConfig::paper_scale()),
        None => Ok(RunConfig::desk_scale()),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            common,
            no_nlcc,
            no_offsets,
            dump_cubes,
            dump_features,
        } => simulate(common, no_nlcc, no_offsets, dump_cubes, dump_features),
        Command::Sweep {
            common,
            var,
            snr_db,
            to_ns,
            cfo_frac,
            tbs_count,
            trials,
            no_nlcc,
            no_offsets,
            no_velocity,
        } => sweep(
            common, var, snr_db, to_ns, cfo_frac, tbs_count, trials, no_nlcc, no_offsets,
            no_velocity,
        ),
        Command::AngleBench {
            common,
            trials,
            step,
            rx_antennas,
            tx_antennas,
            tbs_index,
            literal_kernel,
            dump_spectrum,
        } => angle_bench(
            common,
            trials,
            step,
            rx_antennas,
            tx_antennas,
            tbs_index,
            literal_kernel,
            dump_spectrum,
        ),
        Command::Report {
            common,
            step,
            measure,
            trials,
        } => report(common, step, measure, trials),
    }
}

fn simulate(
    common: CommonArgs,
    no_nlcc: bool,
    no_offsets: bool,
    dump_cubes: bool,
    dump_features: bool,
) -> anyhow::Result<()> {
    let cfg = load_config(&common)?;
    let opts = TrialOptions {
        use_nlcc: !no_nlcc,
        offsets_enabled: !no_offsets,
        keep_profiles: true,
        ..TrialOptions::default()
    };
    let started = std::time::Instant::now();
    let result = harness::run_trial(&cfg, &opts, common.seed)?;
    let elapsed = started.elapsed().as_secs_f64();

    println!(
        "truth:    location ({:.3}, {:.3}) m, speed {:.3} m/s, heading {:.4} rad",
        result.truth.location_m[0],
        result.truth.location_m[1],
        result.truth.speed_mps,
        result.truth.heading_rad
    );
    println!(
        "estimate: location ({:.3}, {:.3}) m  (error {:.4} m)",
        result.location_m[0],
        result.location_m[1],
        result.location_error_m()
    );
    if let Some((v, h)) = result.velocity {
        println!(
            "          speed {:.3} m/s (error {:+.3}), heading {:.4} rad (error {:+.4})",
            v,
            result.speed_error_mps().unwrap(),
            h,
            result.heading_error_rad().unwrap()
        );
    }
    for a in &result.angles {
        if let Some(est) = &a.estimate {
            println!(
                "TBS {}: aoa {:.4} rad, aod {:.4} rad ({} spectrum evals)",
                a.tbs_index, a.aoa_rad, a.aod_rad, est.spectrum_evals
            );
        }
    }
    println!("trial time: {elapsed:.2} s");

    std::fs::create_dir_all(&common.out)?;
    if let Some((grid, profile)) = &result.position_profile {
        let path = common.out.join("position_profile.csv");
        io::write_position_heatmap_csv(&path, grid, profile)?;
        println!("wrote {}", path.display());
    }
    if let Some((grid, profile)) = &result.velocity_profile {
        let path = common.out.join("velocity_profile.csv");
        io::write_velocity_heatmap_csv(&path, grid, profile)?;
        println!("wrote {}", path.display());
    }
    if dump_cubes || dump_features {
        let scene = cfg.scene.clone();
        for i in 0..scene.geometry.n_tbs() {
            let tbs_seed = coopsense::seeds::mix(
                coopsense::seeds::mix(common.seed, coopsense::seeds::tag::TBS),
                i as u64,
            );
            let tx = coopsense::channel::generate_tx_symbols(
                &scene.ofdm,
                coopsense::seeds::mix(tbs_seed, coopsense::seeds::tag::TX_SYMBOLS),
            );
            let cube = coopsense::channel::synthesize_tbs_echo(&scene, i, &tx, tbs_seed)?;
            if dump_cubes {
                for tensor in ["nlos", "los"] {
                    let path = common.out.join(format!("cube_tbs{i}_{tensor}.bin"));
                    io::dump_cube_tensor(&path, &cube, tensor, &scene)?;
                    println!("wrote {}", path.display());
                }
            }
            if dump_features {
                let truth = cube.truth.paths;
                let fv = coopsense::preprocess::feature_vectors(
                    &cube,
                    truth.aoa_nlos_rad,
                    truth.aod_nlos_rad,
                    scene.element_spacing_m(),
                    scene.ofdm.wavelength_m(),
                    scene.ofdm.subcarrier_spacing_hz,
                    !no_nlcc,
                )?;
                let path = common.out.join(format!("features_tbs{i}.csv"));
                io::write_feature_vectors_csv(&path, &fv)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    common: CommonArgs,
    var: Var,
    snr_db: Vec<f64>,
    to_ns: Vec<f64>,
    cfo_frac: Vec<f64>,
    tbs_count: Vec<usize>,
    trials: usize,
    no_nlcc: bool,
    no_offsets: bool,
    no_velocity: bool,
) -> anyhow::Result<()> {
    let mut cfg = load_config(&common)?;
    let variable: SweepVariable = var.into();

    // fixed values for the non-swept variables (single entries only)
    let fix_scalar = |name: &str, values: &[f64]| -> anyhow::Result<Option<f64>> {
        match values.len() {
            0 => Ok(None),
            1 => Ok(Some(values[0])),
            _ => bail!("--{name} must be a single value unless it is the swept variable"),
        }
    };
    let values = match variable {
        SweepVariable::SnrDb => {
            if let Some(v) = fix_scalar("to-ns", &to_ns)? {
                cfg.scene.offsets.to_ns = vec![v];
            }
            if let Some(v) = fix_scalar("cfo-frac", &cfo_frac)? {
                cfg.scene.offsets.cfo_frac = vec![v];
            }
            snr_db
        }
        SweepVariable::ToNs => {
            if let Some(v) = fix_scalar("snr-db", &snr_db)? {
                cfg.scene.noise.snr_db = Some(v);
            }
            if let Some(v) = fix_scalar("cfo-frac", &cfo_frac)? {
                cfg.scene.offsets.cfo_frac = vec![v];
            }
            to_ns
        }
        SweepVariable::CfoFrac => {
            if let Some(v) = fix_scalar("snr-db", &snr_db)? {
                cfg.scene.noise.snr_db = Some(v);
            }
            if let Some(v) = fix_scalar("to-ns", &to_ns)? {
                cfg.scene.offsets.to_ns = vec![v];
            }
            cfo_frac
        }
        SweepVariable::TbsCount => {
            if let Some(v) = fix_scalar("snr-db", &snr_db)? {
                cfg.scene.noise.snr_db = Some(v);
            }
            tbs_count.iter().map(|&c| c as f64).collect()
        }
    };
    if values.is_empty() {
        bail!("no sweep values given for --var {}", variable.as_str());
    }

    let mut spec = ExperimentSpec::new(cfg, variable, values);
    spec.tbs_counts = tbs_count;
    spec.trials = trials;
    spec.use_nlcc = !no_nlcc;
    spec.offsets_enabled = !no_offsets;
    spec.estimate_velocity = !no_velocity;
    spec.master_seed = common.seed;
    spec.out_dir = Some(common.out.clone());

    let curves = harness::run_sweep(&spec)?;
    for (count, records) in &curves {
        println!("curve I={count} ({} points):", records.len());
        for r in records {
            println!(
                "  {}={:<10} rmse_loc={:.4} m  rmse_speed={:.4} m/s  rmse_heading={:.5} rad",
                spec.variable.as_str(),
                r.sweep_value,
                r.rmse_location_m,
                r.rmse_speed_mps,
                r.rmse_heading_rad
            );
        }
    }
    println!("CSV written to {}", common.out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn angle_bench(
    common: CommonArgs,
    trials: usize,
    step: f64,
    rx_antennas: Option<usize>,
    tx_antennas: Option<usize>,
    tbs_index: usize,
    literal_kernel: bool,
    dump_spectrum: bool,
) -> anyhow::Result<()> {
    let cfg = load_config(&common)?;
    let mut scene = cfg.scene.clone();
    if let Some(n) = rx_antennas {
        scene.array.n_rx_pbs = n;
    }
    if let Some(n) = tx_antennas {
        scene.array.n_tx_per_tbs = n;
    }
    let bench = BenchConfig {
        scene,
        tbs_index,
        trials,
        step_rad: step,
        kernel: if literal_kernel {
            angle_est::SpectrumKernel::NoiseProjector
        } else {
            angle_est::SpectrumKernel::SignalComplement
        },
        master_seed: common.seed,
        snapshot_stride: 1,
    };
    let report = angle_benchmark(&bench)?;

    println!(
        "paired trials: {}   argmax agreement: {}",
        report.records.len(),
        if report.all_agree { "all" } else { "NOT ALL" }
    );
    println!("wall-clock speedup (full / proposed): {:.2}x", report.speedup);
    let c = &report.complexity;
    println!(
        "operation counts: proposed {} (rough {} + fine {}), baseline {}  (ratio {:.2}x)",
        c.proposed_total, c.rough_ops, c.fine_ops, c.baseline_total, c.ratio()
    );
    println!(
        "grids: restricted {}x{}, full {}x{}",
        c.eps_aoa, c.eps_aod, c.gamma_aoa, c.gamma_aod
    );

    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("angle_bench.csv");
    let mut file = std::fs::File::create(&path)?;
    use std::io::Write;
    writeln!(
        file,
        "trial,proposed_s,full_s,agree,proposed_evals,full_evals"
    )?;
    for r in &report.records {
        writeln!(
            file,
            "{},{},{},{},{},{}",
            r.trial, r.proposed_s, r.full_s, r.agree, r.proposed_evals, r.full_evals
        )?;
    }
    println!("wrote {}", path.display());

    if dump_spectrum {
        // restricted MUSIC surface of one fresh realization
        let scene = &bench.scene;
        let tbs_seed = coopsense::seeds::mix(
            coopsense::seeds::mix(common.seed, coopsense::seeds::tag::TRIAL),
            0,
        );
        let tx = coopsense::channel::generate_tx_symbols(
            &scene.ofdm,
            coopsense::seeds::mix(tbs_seed, coopsense::seeds::tag::TX_SYMBOLS),
        );
        let cube = coopsense::channel::synthesize_tbs_echo(scene, tbs_index, &tx, tbs_seed)?;
        let d_r = scene.element_spacing_m();
        let lambda = scene.ofdm.wavelength_m();
        let music = coopsense::angle_est::MusicConfig {
            step_rad: step,
            ..Default::default()
        };
        let (_, intervals) =
            coopsense::angle_est::rough_stage(&cube.nlos, tx[[0, 0]], d_r, lambda, music.rho)?;
        let (aoa, aod, surface) =
            coopsense::angle_est::spectrum_surface(&cube.nlos, d_r, lambda, &intervals, &music)?;
        let spath = common.out.join("music_spectrum.csv");
        io::write_spectrum_csv(&spath, &aoa, &aod, &surface)?;
        println!("wrote {}", spath.display());
    }
    Ok(())
}

fn report(common: CommonArgs, step: f64, measure: bool, trials: usize) -> anyhow::Result<()> {
    let cfg = load_config(&common)?;
    let scene = &cfg.scene;
    let lambda = scene.ofdm.wavelength_m();

    // complexity at a representative mid-array rough result
    let rough = angle_est::RoughEstimate {
        bin_aoa: scene.array.n_rx_pbs / 4,
        bin_aod: scene.array.n_tx_per_tbs / 4,
        rough_aoa_rad: 0.0,
        rough_aod_rad: 0.0,
    };
    let c = analysis::complexity_report(&scene.array, &scene.ofdm, step, step, &rough, lambda)?;
    println!("complexity (complex multiply-accumulate operations):");
    println!("  rough stage:      {}", c.rough_ops);
    println!("  fine stage:       {}", c.fine_ops);
    println!("  proposed total:   {}", c.proposed_total);
    println!("  baseline total:   {}", c.baseline_total);
    println!("  baseline/proposed ratio: {:.2}x", c.ratio());
    println!(
        "  grids: restricted {}x{}, full {}x{} (step {step} rad)",
        c.eps_aoa, c.eps_aod, c.gamma_aoa, c.gamma_aod
    );

    let n_tbs = scene.geometry.n_tbs();
    let gains = analysis::snr_gain_report(&scene.ofdm, n_tbs, None)?;
    println!("analytic fusion SNR gains (I = {n_tbs}):");
    println!(
        "  position: {} ({:.2} dB)   velocity: {} ({:.2} dB)",
        gains.g_position,
        gains.g_position_db(),
        gains.g_velocity,
        gains.g_velocity_db()
    );

    if measure {
        let mcfg = GainMeasurementConfig {
            n_subcarriers: scene.ofdm.n_subcarriers.min(64),
            n_symbols: scene.ofdm.n_symbols.min(64),
            n_tbs: n_tbs.min(3),
            snr_db: 0.0,
            trials,
            master_seed: common.seed,
        };
        let matched = measure_matched_fusion_gain(&mcfg)?;
        println!(
            "measured matched-fusion gain ({} trials, N_c={}, M_sym={}, I={}):",
            trials, mcfg.n_subcarriers, mcfg.n_symbols, mcfg.n_tbs
        );
        println!(
            "  position: {:.1} (analytic {})   velocity: {:.1} (analytic {})",
            matched.measured_g_position.unwrap(),
            matched.g_position,
            matched.measured_g_velocity.unwrap(),
            matched.g_velocity
        );
        let pipeline = measure_snr_gain(&mcfg)?;
        println!("measured end-to-end pipeline gain (same setup):");
        println!(
            "  position: {:.1}   velocity: {:.1}   (capped near 2*I*(N-1)/N by the shared compression reference)",
            pipeline.measured_g_position.unwrap(),
            pipeline.measured_g_velocity.unwrap()
        );
    }

    // CSV summary
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("analysis_report.csv");
    write_report_csv(&path, &c, &gains)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_report_csv(
    path: &Path,
    c: &analysis::ComplexityReport,
    g: &analysis::SnrGainReport,
) -> anyhow::Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "metric,value")?;
    writeln!(f, "rough_ops,{}", c.rough_ops)?;
    writeln!(f, "fine_ops,{}", c.fine_ops)?;
    writeln!(f, "proposed_total,{}", c.proposed_total)?;
    writeln!(f, "baseline_total,{}", c.baseline_total)?;
    writeln!(f, "eps_aoa,{}", c.eps_aoa)?;
    writeln!(f, "eps_aod,{}", c.eps_aod)?;
    writeln!(f, "gamma_aoa,{}", c.gamma_aoa)?;
    writeln!(f, "gamma_aod,{}", c.gamma_aod)?;
    writeln!(f, "g_position,{}", g.g_position)?;
    writeln!(f, "g_velocity,{}", g.g_velocity)?;
    Ok(())
}
