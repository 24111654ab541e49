//! Monte Carlo evaluation, trajectory replays, configuration and result files.

pub mod config;
pub mod output;
pub mod sweep;
pub mod track;
pub mod trial;

pub use config::{parse_order, CalibrationSettings, DetectionSettings, ExperimentConfig, RfSection, SweepSettings, TrackSettings};
pub use output::{append_sweep_csv, append_track_csv, read_trajectory_csv, write_sweep_csv, write_track_csv};
pub use sweep::{summarize, sweep, SweepResult, SweepRow};
pub use track::{interpolate, replay_track, TrackLogRow, TrajectoryPoint};
pub use trial::{
    acquire_snapshots, compute_pmd, compute_rmse, is_valid, penalty_bins, prepare_scene, run_prepared, run_trial, sense,
    stream_rng, PreparedScene, Quantity, Sensed, TrialRecord,
};
