//! One Monte Carlo trial and the metrics computed over many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::clutter::{ClutterSnapshots, Remover, RemoverKind};
use crate::error::Result;
use crate::radar::{bin_widths, cfar_threshold, periodogram_oversampled, resolutions, strongest_peak, Detection, Resolutions};
use crate::scene::{draw_target, generate_scenario, CsiFrame, NoiseSpec, RfConfig, Scenario};

const SCENE_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

/// Generator for one `(seed, point, index)` stream. Scene and trial streams never
/// overlap, and a stream does not depend on how many trials the sweep runs.
pub fn stream_rng(seed: u64, point: usize, index: usize, trial: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let purpose = if trial { TRIAL_STREAM } else { SCENE_STREAM };
    rng.set_stream(((point as u64) << 40) | ((index as u64) << 1) | purpose);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub noise_dbm: f64,
    pub remover: RemoverKind,
    pub truth_range_m: f64,
    pub truth_velocity_mps: f64,
    /// Distance from the target to the closest clutter scatterer.
    pub nearest_clutter_m: f64,
    /// Strongest periodogram peak, whether or not it crossed the threshold.
    pub peak: Option<Detection>,
    pub threshold: f64,
    pub valid: bool,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn detected(&self) -> bool {
        self.peak.is_some_and(|p| p.above_threshold)
    }
}

/// Clutter layout and removers shared by a run of trials.
pub struct PreparedScene {
    pub scenario: Scenario,
    pub noise: NoiseSpec,
    pub removers: Vec<(RemoverKind, Result<Remover>)>,
}

/// Draws a clutter layout, acquires `K` clutter-only snapshots at `noise_dbm` and
/// prepares every configured remover from them.
pub fn prepare_scene(cfg: &ExperimentConfig, noise_dbm: f64, rng: &mut ChaCha8Rng) -> Result<PreparedScene> {
    let config = cfg.rf_config();
    let scenario = generate_scenario(&cfg.scenario, &config, rng)?;
    let noise = NoiseSpec::new(noise_dbm);
    let needs_snapshots = cfg.sweep.removers.iter().any(|k| *k != RemoverKind::None);
    let snapshots = if needs_snapshots {
        Some(acquire_snapshots(&scenario, &config, noise, cfg.calibration.snapshots, rng)?)
    } else {
        None
    };
    let removers = cfg
        .sweep
        .removers
        .iter()
        .map(|&kind| {
            let r = match &snapshots {
                Some(s) => Remover::prepare(kind, s, cfg.calibration.order),
                None => Ok(Remover::None),
            };
            if let Err(e) = &r {
                log::warn!("{kind} preparation failed: {e}");
            }
            (kind, r)
        })
        .collect();
    Ok(PreparedScene { scenario, noise, removers })
}

/// `k` clutter-only acquisitions, each with fresh noise, fading and global phase.
pub fn acquire_snapshots(
    scenario: &Scenario,
    config: &RfConfig,
    noise: NoiseSpec,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ClutterSnapshots> {
    ClutterSnapshots::from_fn(config.n_subcarriers, config.n_symbols, k, |_| {
        Ok(scenario.acquisition(config, noise, false, rng).h)
    })
}

/// Outcome of running a frame through one remover and the detection chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensed {
    pub peak: Detection,
    pub threshold: f64,
}

pub fn sense(remover: &Remover, frame: &CsiFrame, cfg: &ExperimentConfig) -> Result<Sensed> {
    let clean = remover.remove(frame)?;
    let pg = periodogram_oversampled(&clean, cfg.detection.oversample)?;
    let thr = cfar_threshold(&pg, cfg.detection.p_fa)?;
    let peak = strongest_peak(&pg, thr.eta, &frame.config);
    Ok(Sensed { peak, threshold: thr.eta })
}

/// Draws a fresh target into the prepared scene, acquires one runtime frame and runs
/// it through every remover. Component errors become failed records.
pub fn run_prepared(
    cfg: &ExperimentConfig,
    scene: &PreparedScene,
    point: usize,
    trial: usize,
    noise_dbm: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<TrialRecord> {
    let config = cfg.rf_config();
    let res = resolutions(&config);
    let mut scenario = scene.scenario.clone();
    let base = |kind| TrialRecord {
        point,
        trial,
        noise_dbm,
        remover: kind,
        truth_range_m: f64::NAN,
        truth_velocity_mps: f64::NAN,
        nearest_clutter_m: f64::NAN,
        peak: None,
        threshold: f64::NAN,
        valid: false,
        failure: None,
    };
    match draw_target(&cfg.scenario, &config, rng) {
        Ok(t) => scenario.target = t,
        Err(e) => {
            return scene
                .removers
                .iter()
                .map(|(k, _)| TrialRecord { failure: Some(e.to_string()), ..base(*k) })
                .collect()
        }
    }
    let target = scenario.target;
    let nearest = scenario
        .clutter
        .iter()
        .map(|c| (c.range_m - target.range_m).abs())
        .fold(f64::INFINITY, f64::min);
    let frame = scenario.acquisition(&config, scene.noise, true, rng);

    scene
        .removers
        .iter()
        .map(|(kind, remover)| {
            let mut rec = TrialRecord {
                truth_range_m: target.range_m,
                truth_velocity_mps: target.velocity_mps,
                nearest_clutter_m: nearest,
                ..base(*kind)
            };
            match remover.as_ref().map_err(|e| e.to_string()).and_then(|r| sense(r, &frame, cfg).map_err(|e| e.to_string())) {
                Ok(s) => {
                    rec.valid = is_valid(&s.peak, target.range_m, target.velocity_mps, &res);
                    rec.peak = Some(s.peak);
                    rec.threshold = s.threshold;
                }
                Err(msg) => rec.failure = Some(msg),
            }
            rec
        })
        .collect()
}

/// A detection counts only when it crossed the threshold and both errors are below
/// the theoretical resolutions.
pub fn is_valid(peak: &Detection, range_m: f64, velocity_mps: f64, res: &Resolutions) -> bool {
    peak.above_threshold
        && (peak.range_m - range_m).abs() < res.range_m
        && (peak.velocity_mps - velocity_mps).abs() < res.velocity_mps
}

/// One self-contained trial: fresh clutter layout and calibration, then one target
/// frame, evaluated with every configured remover.
pub fn run_trial(cfg: &ExperimentConfig, noise_dbm: f64, rng: &mut ChaCha8Rng) -> Result<Vec<TrialRecord>> {
    let scene = prepare_scene(cfg, noise_dbm, rng)?;
    Ok(run_prepared(cfg, &scene, 0, 0, noise_dbm, rng))
}

/// `1 - valid / total`.
pub fn compute_pmd(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    let valid = records.iter().filter(|r| r.valid).count();
    1.0 - valid as f64 / records.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Range,
    Velocity,
}

/// Root mean square error where every invalid trial contributes one bin width.
pub fn compute_rmse(records: &[TrialRecord], which: Quantity, bins: &Resolutions) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    let sum: f64 = records
        .iter()
        .map(|r| {
            let e = match (r.valid, r.peak, which) {
                (true, Some(p), Quantity::Range) => p.range_m - r.truth_range_m,
                (true, Some(p), Quantity::Velocity) => p.velocity_mps - r.truth_velocity_mps,
                (_, _, Quantity::Range) => bins.range_m,
                (_, _, Quantity::Velocity) => bins.velocity_mps,
            };
            e * e
        })
        .sum();
    (sum / records.len() as f64).sqrt()
}

/// Bin widths of the periodogram the configuration produces, used as miss penalty.
pub fn penalty_bins(cfg: &ExperimentConfig) -> Resolutions {
    let config = cfg.rf_config();
    let os = cfg.detection.oversample;
    bin_widths(
        &config,
        crate::numerics::pad_pow2(config.n_subcarriers) * os,
        crate::numerics::pad_pow2(config.n_symbols) * os,
    )
}
