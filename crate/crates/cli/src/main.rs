//! `crap`: acquire clutter snapshots, calibrate, sense frames, run sweeps and replay
//! trajectories.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crap_core::clutter::io::{load_calibration, load_snapshots, save_calibration, save_snapshots};
use crap_core::clutter::{calibrate, ClutterSnapshots, EcaC, EcaS, Remover, RemoverKind};
use crap_core::harness::{
    acquire_snapshots, append_sweep_csv, append_track_csv, parse_order, read_trajectory_csv, replay_track, stream_rng,
    sweep, ExperimentConfig,
};
use crap_core::radar::{
    cfar_threshold, periodogram_oversampled, strongest_peak, write_peak_csv, write_periodogram, PEAK_CSV_HEADER,
};
use crap_core::scene::{generate_scenario, CsiFrame, NoiseSpec};
use crap_core::{Error, Result};

#[derive(Parser)]
#[command(name = "crap", version, about = "Subspace clutter removal for OFDM sensing")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate K clutter-only acquisitions of a random scene (or one runtime frame).
    Acquire(AcquireArgs),
    /// Compute the clutter subspace from a snapshot file.
    Calibrate(CalibrateArgs),
    /// Remove clutter from a frame file and report the strongest detection.
    Sense(SenseArgs),
    /// Run the noise-power sweep and append the results table.
    Simulate(SimulateArgs),
    /// Replay a trajectory through removal, detection and the tracker.
    Track(TrackArgs),
}

#[derive(Args)]
struct AcquireArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scene seed; defaults to `[track] seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Total noise power in dBm; defaults to `[track] noise_dbm`.
    #[arg(long, allow_hyphen_values = true)]
    noise_dbm: Option<f64>,
    /// Write one frame of the same scene with its target present instead of the
    /// clutter-only snapshots. The target truth is printed to stdout.
    #[arg(long)]
    runtime: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Clutter order: an integer or `auto` (MDL).
    #[arg(long, default_value = "auto")]
    order: String,
}

#[derive(Args)]
struct SenseArgs {
    /// Calibration file, needed for `--remover crap`.
    #[arg(long)]
    cal: Option<PathBuf>,
    /// Frame file (snapshot format); every frame in it is processed.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "crap")]
    remover: String,
    /// Experiment config supplying RF parameters and detection settings; defaults to
    /// the desk preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clutter snapshots, needed for `eca-c` and `eca-s`.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Write the last frame's periodogram here, and its peak record to `<path>.csv`.
    #[arg(long)]
    dump_pgram: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override `[sweep] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `[sweep] trials`.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct TrackArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override `[track] remover`.
    #[arg(long)]
    remover: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Acquire(a) => acquire(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Sense(a) => sense(a),
        Command::Simulate(a) => simulate(a),
        Command::Track(a) => track(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn acquire(a: AcquireArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let rf = cfg.rf_config();
    let seed = a.seed.unwrap_or(cfg.track.seed);
    let noise = NoiseSpec::new(a.noise_dbm.unwrap_or(cfg.track.noise_dbm));
    let mut scene_rng = stream_rng(seed, 0, 0, false);
    let scenario = generate_scenario(&cfg.scenario, &rf, &mut scene_rng)?;
    let snaps = if a.runtime {
        let mut rng = stream_rng(seed, 0, 0, true);
        let frame = scenario.acquisition(&rf, noise, true, &mut rng);
        let t = scenario.target;
        println!("target,{},{}", t.range_m, t.velocity_mps);
        ClutterSnapshots::stack(&[frame])?
    } else {
        acquire_snapshots(&scenario, &rf, noise, cfg.calibration.snapshots, &mut scene_rng)?
    };
    save_snapshots(&snaps, &a.out)?;
    log::info!("wrote {} frame(s) of {}x{} to {}", snaps.k(), rf.n_subcarriers, rf.n_symbols, a.out.display());
    Ok(())
}

fn run_calibrate(a: CalibrateArgs) -> Result<()> {
    let order = parse_order(&a.order)?;
    let snaps = load_snapshots(&a.input)?;
    let cal = calibrate(&snaps, order)?;
    save_calibration(&cal, &a.out)?;
    println!("order,{},{}", cal.order(), cal.truncated);
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::desk()),
    }
}

fn sense(a: SenseArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let rf = cfg.rf_config();
    let kind: RemoverKind = a.remover.parse()?;
    let frames = load_snapshots(&a.input)?;
    if frames.n_subcarriers() != rf.n_subcarriers || frames.n_symbols() != rf.n_symbols {
        return Err(Error::Config(format!(
            "frame file is {}x{} but the RF config is {}x{}; pass a matching --config",
            frames.n_subcarriers(),
            frames.n_symbols(),
            rf.n_subcarriers,
            rf.n_symbols
        )));
    }
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone().ok_or_else(|| Error::Config(format!("--remover {kind} needs {flag}")))
    };
    let remover = match kind {
        RemoverKind::None => Remover::None,
        RemoverKind::Crap => {
            let cal = load_calibration(&need(&a.cal, "--cal")?)?;
            if cal.n_subcarriers != rf.n_subcarriers || cal.n_symbols != rf.n_symbols {
                return Err(Error::Config("calibration dimensions do not match the frame".into()));
            }
            Remover::Crap(cal)
        }
        RemoverKind::EcaC => Remover::EcaC(EcaC::new(&load_snapshots(&need(&a.snapshots, "--snapshots")?)?)?),
        RemoverKind::EcaS => Remover::EcaS(EcaS::new(&load_snapshots(&need(&a.snapshots, "--snapshots")?)?)?),
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for k in 0..frames.k() {
        let frame = CsiFrame::new(rf, frames.frame(k))?;
        let clean = remover.remove(&frame)?;
        let pg = periodogram_oversampled(&clean, cfg.detection.oversample)?;
        let thr = cfar_threshold(&pg, cfg.detection.p_fa)?;
        let peak = strongest_peak(&pg, thr.eta, &rf);
        writeln!(
            out,
            "{},{},{},{},{:e},{:e},{},{}",
            kind,
            peak.above_threshold,
            peak.range_m,
            peak.velocity_mps,
            peak.peak_power,
            thr.eta,
            peak.n_frac,
            peak.m_frac
        )?;
        if k + 1 == frames.k() {
            if let Some(path) = &a.dump_pgram {
                let mut w = BufWriter::new(File::create(path)?);
                write_periodogram(&pg, &mut w)?;
                w.flush()?;
                let mut csv_path = path.clone().into_os_string();
                csv_path.push(".csv");
                let mut c = BufWriter::new(File::create(PathBuf::from(csv_path))?);
                writeln!(c, "{PEAK_CSV_HEADER}")?;
                write_peak_csv(&mut c, &pg, &peak, &thr)?;
                c.flush()?;
            }
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.sweep.seed = s;
    }
    if let Some(t) = a.trials {
        cfg.sweep.trials = t;
    }
    let result = sweep(&cfg)?;
    append_sweep_csv(&a.out, &result.rows)?;
    for r in &result.rows {
        log::info!("{} dBm {}: P_MD {:.3}", r.noise_dbm, r.remover, r.p_md);
    }
    Ok(())
}

fn track(a: TrackArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(r) = &a.remover {
        cfg.track.remover = r.parse()?;
    }
    let traj = read_trajectory_csv(File::open(&a.trajectory)?)?;
    let rows = replay_track(&cfg, &traj)?;
    append_track_csv(&a.out, &rows)?;
    let resets = rows.iter().filter(|r| r.reset).count();
    log::info!("{} frames, {resets} reset(s)", rows.len());
    Ok(())
}
