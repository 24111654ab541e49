//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clutter::{OrderSelection, RemoverKind};
use crate::error::{Error, Result};
use crate::scene::{RfConfig, ScenarioParams};
use crate::tracker::TrackerSettings;

/// `[rf]` section. `symbol_duration_s` defaults to `frame_duration_s / n_symbols`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfSection {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub frame_duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_duration_s: Option<f64>,
}

impl RfSection {
    pub fn to_config(&self) -> RfConfig {
        let mut c = RfConfig::with_frame(
            self.n_subcarriers,
            self.n_symbols,
            self.carrier_hz,
            self.subcarrier_spacing_hz,
            self.frame_duration_s,
        );
        if let Some(t0) = self.symbol_duration_s {
            c.symbol_duration_s = t0;
        }
        c
    }
}

impl From<RfConfig> for RfSection {
    fn from(c: RfConfig) -> Self {
        Self {
            n_subcarriers: c.n_subcarriers,
            n_symbols: c.n_symbols,
            carrier_hz: c.carrier_hz,
            subcarrier_spacing_hz: c.subcarrier_spacing_hz,
            frame_duration_s: c.frame_duration_s,
            symbol_duration_s: None,
        }
    }
}

/// `order = "auto"` or an explicit integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OrderValue {
    Fixed(usize),
    Named(String),
}

mod order_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(o: &OrderSelection, s: S) -> std::result::Result<S::Ok, S::Error> {
        match o {
            OrderSelection::Fixed(l) => OrderValue::Fixed(*l),
            OrderSelection::Mdl => OrderValue::Named("auto".into()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<OrderSelection, D::Error> {
        match OrderValue::deserialize(d)? {
            OrderValue::Fixed(l) => Ok(OrderSelection::Fixed(l)),
            OrderValue::Named(s) if s == "auto" => Ok(OrderSelection::Mdl),
            OrderValue::Named(s) => Err(serde::de::Error::custom(format!("order must be \"auto\" or an integer, got {s:?}"))),
        }
    }
}

/// Parses a command-line order value (`auto` or an integer).
pub fn parse_order(s: &str) -> Result<OrderSelection> {
    if s == "auto" {
        return Ok(OrderSelection::Mdl);
    }
    s.parse::<usize>()
        .map(OrderSelection::Fixed)
        .map_err(|_| Error::Config(format!("order must be \"auto\" or an integer, got {s:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Clutter-only acquisitions per calibration (`K`).
    pub snapshots: usize,
    #[serde(with = "order_serde")]
    pub order: OrderSelection,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self { snapshots: 64, order: OrderSelection::Mdl }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSettings {
    pub p_fa: f64,
    /// Extra zero-padding factor on both periodogram axes (power of two).
    pub oversample: usize,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        Self { p_fa: 1e-3, oversample: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Total noise power over the band, dBm, one entry per sweep point.
    pub noise_dbm: Vec<f64>,
    pub trials: usize,
    /// Consecutive trials that share one clutter layout and calibration.
    pub trials_per_scene: usize,
    pub removers: Vec<RemoverKind>,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            noise_dbm: vec![-120.0, -110.0, -100.0, -90.0, -80.0],
            trials: 200,
            trials_per_scene: 1,
            removers: RemoverKind::ALL.to_vec(),
            seed: 1,
        }
    }
}

/// Settings for trajectory replays and for `acquire`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSettings {
    pub noise_dbm: f64,
    pub remover: RemoverKind,
    pub seed: u64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self { noise_dbm: -120.0, remover: RemoverKind::Crap, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rf: RfSection,
    #[serde(default)]
    pub scenario: ScenarioParams,
    #[serde(default)]
    pub calibration: CalibrationSettings,
    #[serde(default)]
    pub detection: DetectionSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub tracker: TrackerSettings,
    #[serde(default)]
    pub track: TrackSettings,
}

impl ExperimentConfig {
    /// 256 x 128 frame, K = 64, 200 trials per point, 2x periodogram oversampling.
    pub fn desk() -> Self {
        Self {
            rf: RfConfig::desk().into(),
            scenario: ScenarioParams::default(),
            calibration: CalibrationSettings::default(),
            detection: DetectionSettings { p_fa: 1e-3, oversample: 2 },
            sweep: SweepSettings::default(),
            tracker: TrackerSettings::default(),
            track: TrackSettings::default(),
        }
    }

    /// Full 1584 x 1120 frame with K = 100; only the subspace remover by default, and
    /// one calibration shared by ten trials to keep the run tractable.
    pub fn full_scale() -> Self {
        Self {
            rf: RfConfig::full_scale().into(),
            calibration: CalibrationSettings { snapshots: 100, order: OrderSelection::Mdl },
            detection: DetectionSettings { p_fa: 1e-3, oversample: 1 },
            sweep: SweepSettings {
                noise_dbm: vec![-120.0],
                trials: 50,
                trials_per_scene: 10,
                removers: vec![RemoverKind::Crap],
                seed: 1,
            },
            ..Self::desk()
        }
    }

    pub fn rf_config(&self) -> RfConfig {
        self.rf.to_config()
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.rf_config().validate()?;
        self.scenario.validate()?;
        let k = self.calibration.snapshots;
        if k == 0 {
            return Err(Error::Config("calibration.snapshots must be at least 1".into()));
        }
        if let OrderSelection::Fixed(l) = self.calibration.order {
            if l == 0 || l > k {
                return Err(Error::Config(format!("calibration.order must be in 1..={k}, got {l}")));
            }
        }
        let p = self.detection.p_fa;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("detection.p_fa must lie in (0, 1), got {p}")));
        }
        if self.detection.oversample == 0 || !self.detection.oversample.is_power_of_two() {
            return Err(Error::Config("detection.oversample must be a power of two".into()));
        }
        let s = &self.sweep;
        if s.noise_dbm.is_empty() || s.noise_dbm.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep.noise_dbm must be a non-empty list of finite values".into()));
        }
        if s.trials == 0 || s.trials_per_scene == 0 {
            return Err(Error::Config("sweep.trials and sweep.trials_per_scene must be at least 1".into()));
        }
        if s.removers.is_empty() {
            return Err(Error::Config("sweep.removers must not be empty".into()));
        }
        let res = crate::radar::resolutions(&self.rf_config());
        self.tracker.params(&res)?;
        Ok(())
    }
}
