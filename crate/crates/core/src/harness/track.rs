//! Frame-by-frame replay of a target trajectory through removal, detection and the
//! Kalman tracker.

use nalgebra::Vector2;

use super::config::ExperimentConfig;
use super::trial::{acquire_snapshots, sense, stream_rng};
use crate::clutter::Remover;
use crate::error::{Error, Result};
use crate::radar::resolutions;
use crate::scene::{attenuation_with_exponent, generate_scenario, nominal_coefficient, NoiseSpec, Scatterer, REFERENCE_RANGE_M};
use crate::tracker::{initial_covariance, Tracker};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Whether the target reflects at all from this sample until the next one.
    pub present: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackLogRow {
    pub time_s: f64,
    pub r_meas: Option<f64>,
    pub v_meas: Option<f64>,
    pub r_post: Option<f64>,
    pub v_post: Option<f64>,
    pub sigma_r: Option<f64>,
    pub sigma_v: Option<f64>,
    pub reset: bool,
    /// Interpolated truth; `None` while the target is absent.
    pub r_true: Option<f64>,
    pub v_true: Option<f64>,
}

/// Linear interpolation at `t`; presence is taken from the sample at or before `t`.
pub fn interpolate(traj: &[TrajectoryPoint], t: f64) -> TrajectoryPoint {
    let i = traj.partition_point(|p| p.t <= t).saturating_sub(1);
    let a = traj[i];
    match traj.get(i + 1) {
        Some(b) if t > a.t => {
            let w = (t - a.t) / (b.t - a.t);
            TrajectoryPoint {
                t,
                range_m: a.range_m + w * (b.range_m - a.range_m),
                velocity_mps: a.velocity_mps + w * (b.velocity_mps - a.velocity_mps),
                present: a.present,
            }
        }
        _ => TrajectoryPoint { t, ..a },
    }
}

/// Replays `trajectory` at one frame per frame duration. The clutter scene and its
/// calibration come from the `[track]` seed and noise power; the tracker predicts every
/// frame and updates whenever the strongest peak crosses the CFAR threshold.
pub fn replay_track(cfg: &ExperimentConfig, trajectory: &[TrajectoryPoint]) -> Result<Vec<TrackLogRow>> {
    cfg.validate()?;
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("trajectory is empty".into()));
    }
    if trajectory.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidInput("trajectory timestamps must be strictly increasing".into()));
    }
    let config = cfg.rf_config();
    let res = resolutions(&config);
    let step = config.frame_duration_s;
    let params = cfg.tracker.params(&res)?;
    if (params.dt - step).abs() > 1e-9 * step {
        log::warn!("tracker dt {} s differs from the frame duration {step} s", params.dt);
    }
    let mut tracker = Tracker::new(params, initial_covariance(&res));

    let seed = cfg.track.seed;
    let mut scene_rng = stream_rng(seed, 0, 0, false);
    let scenario = generate_scenario(&cfg.scenario, &config, &mut scene_rng)?;
    let noise = NoiseSpec::new(cfg.track.noise_dbm);
    let snapshots = acquire_snapshots(&scenario, &config, noise, cfg.calibration.snapshots, &mut scene_rng)?;
    let remover = Remover::prepare(cfg.track.remover, &snapshots, cfg.calibration.order)?;
    drop(snapshots);
    let coeff_ref = nominal_coefficient(&cfg.scenario, &config, REFERENCE_RANGE_M, 0.0, &mut scene_rng)?;
    let att_ref = attenuation_with_exponent(REFERENCE_RANGE_M, &config, cfg.scenario.path_loss_exponent)?;

    let t0 = trajectory[0].t;
    let span = trajectory[trajectory.len() - 1].t - t0;
    let frames = (span / step + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(frames);
    for j in 0..frames {
        let t = t0 + j as f64 * step;
        let truth = interpolate(trajectory, t);
        let mut rng = stream_rng(seed, 0, j, true);
        let mut scene = scenario.clone();
        if truth.present {
            let att = attenuation_with_exponent(truth.range_m, &config, cfg.scenario.path_loss_exponent)?;
            scene.target = Scatterer::target(truth.range_m, truth.velocity_mps, coeff_ref * (att / att_ref));
        }
        let frame = scene.acquisition(&config, noise, truth.present, &mut rng);
        let sensed = sense(&remover, &frame, cfg)?;
        let meas = sensed
            .peak
            .above_threshold
            .then(|| Vector2::new(sensed.peak.range_m, sensed.peak.velocity_mps));
        let out = tracker.step(t, meas)?;
        rows.push(TrackLogRow {
            time_s: t,
            r_meas: meas.map(|z| z[0]),
            v_meas: meas.map(|z| z[1]),
            r_post: out.state.map(|s| s.x[0]),
            v_post: out.state.map(|s| s.x[1]),
            sigma_r: out.state.map(|s| s.sigma_range()),
            sigma_v: out.state.map(|s| s.sigma_velocity()),
            reset: out.reset.is_some(),
            r_true: truth.present.then_some(truth.range_m),
            v_true: truth.present.then_some(truth.velocity_mps),
        });
    }
    Ok(rows)
}
