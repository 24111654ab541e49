//! Noise-power sweeps over many trials.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::trial::{compute_pmd, compute_rmse, penalty_bins, prepare_scene, run_prepared, stream_rng, Quantity, TrialRecord};
use crate::clutter::RemoverKind;
use crate::error::Result;

/// Snapshot sets larger than this are processed one scene at a time so that only one
/// stacked matrix is resident.
const PARALLEL_SNAPSHOT_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub noise_dbm: f64,
    pub remover: RemoverKind,
    pub trials: usize,
    pub failures: usize,
    pub valid: usize,
    pub p_md: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Ordered by point, then trial, then remover as configured.
    pub records: Vec<TrialRecord>,
}

/// Records of one scene group: trials `first..first + count` at sweep point `point`.
fn run_group(cfg: &ExperimentConfig, point: usize, group: usize, first: usize, count: usize) -> Vec<TrialRecord> {
    let noise_dbm = cfg.sweep.noise_dbm[point];
    let mut scene_rng = stream_rng(cfg.sweep.seed, point, group, false);
    match prepare_scene(cfg, noise_dbm, &mut scene_rng) {
        Ok(scene) => (first..first + count)
            .flat_map(|trial| {
                let mut rng = stream_rng(cfg.sweep.seed, point, trial, true);
                run_prepared(cfg, &scene, point, trial, noise_dbm, &mut rng)
            })
            .collect(),
        Err(e) => {
            log::warn!("scene preparation failed at {noise_dbm} dBm: {e}");
            let msg = e.to_string();
            (first..first + count)
                .flat_map(|trial| {
                    let msg = msg.clone();
                    cfg.sweep.removers.iter().map(move |&remover| TrialRecord {
                        point,
                        trial,
                        noise_dbm,
                        remover,
                        truth_range_m: f64::NAN,
                        truth_velocity_mps: f64::NAN,
                        nearest_clutter_m: f64::NAN,
                        peak: None,
                        threshold: f64::NAN,
                        valid: false,
                        failure: Some(msg.clone()),
                    })
                })
                .collect()
        }
    }
}

/// Runs every sweep point. Trials are independent and may run in parallel; results are
/// gathered in trial order, so the output does not depend on scheduling.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let rf = cfg.rf_config();
    let per_scene = cfg.sweep.trials_per_scene;
    let groups = cfg.sweep.trials.div_ceil(per_scene);
    let snapshot_bytes = rf.q() * cfg.calibration.snapshots * 16;
    let parallel = snapshot_bytes <= PARALLEL_SNAPSHOT_BYTES;

    let mut records = Vec::with_capacity(cfg.sweep.noise_dbm.len() * cfg.sweep.trials * cfg.sweep.removers.len());
    for (point, noise) in cfg.sweep.noise_dbm.iter().enumerate() {
        log::info!("noise {noise} dBm: {} trials in {groups} scene(s)", cfg.sweep.trials);
        let job = |g: usize| {
            let first = g * per_scene;
            run_group(cfg, point, g, first, per_scene.min(cfg.sweep.trials - first))
        };
        let chunks: Vec<Vec<TrialRecord>> = if parallel {
            (0..groups).into_par_iter().map(job).collect()
        } else {
            (0..groups).map(job).collect()
        };
        records.extend(chunks.into_iter().flatten());
    }
    Ok(SweepResult { rows: summarize(cfg, &records), records })
}

/// One row per sweep point and remover.
pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SweepRow> {
    let bins = penalty_bins(cfg);
    let mut rows = Vec::new();
    for (point, &noise_dbm) in cfg.sweep.noise_dbm.iter().enumerate() {
        for &remover in &cfg.sweep.removers {
            let subset: Vec<TrialRecord> =
                records.iter().filter(|r| r.point == point && r.remover == remover).cloned().collect();
            if subset.is_empty() {
                continue;
            }
            rows.push(SweepRow {
                noise_dbm,
                remover,
                trials: subset.len(),
                failures: subset.iter().filter(|r| r.failure.is_some()).count(),
                valid: subset.iter().filter(|r| r.valid).count(),
                p_md: compute_pmd(&subset),
                rmse_range_m: compute_rmse(&subset, Quantity::Range, &bins),
                rmse_velocity_mps: compute_rmse(&subset, Quantity::Velocity, &bins),
            });
        }
    }
    rows
}
