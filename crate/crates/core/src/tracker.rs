//! Constant-velocity Kalman filter over `(range, speed)` with timeout and
//! uncertainty resets.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radar::Resolutions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KfParams {
    pub q: Matrix2<f64>,
    pub r: Matrix2<f64>,
    pub dt: f64,
    pub t_max: f64,
    pub sigma_r_max: f64,
    pub sigma_v_max: f64,
}

/// Tunables as they appear in configuration files; turned into [`KfParams`] once the
/// radar resolutions are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSettings {
    /// White-acceleration spectral density `q_a`, (m/s^2)^2.
    pub accel_psd: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sigma_r_max: f64,
    pub sigma_v_max: f64,
}

impl Default for TrackerSettings {
    fn default() -> Self {
        Self {
            accel_psd: 1.0,
            dt: 0.01,
            t_max: 0.5,
            sigma_r_max: 2.0,
            sigma_v_max: 2.0,
        }
    }
}

impl TrackerSettings {
    /// `Q = q_a [[dt^4/4, dt^3/2], [dt^3/2, dt^2]]`, `R = diag((Δr/2)^2, (Δv/2)^2)`.
    pub fn params(&self, res: &Resolutions) -> Result<KfParams> {
        let dt = self.dt;
        let q = self.accel_psd
            * Matrix2::new(dt.powi(4) / 4.0, dt.powi(3) / 2.0, dt.powi(3) / 2.0, dt * dt);
        let r = Matrix2::new((res.range_m / 2.0).powi(2), 0.0, 0.0, (res.velocity_mps / 2.0).powi(2));
        KfParams::new(q, r, dt, self.t_max, self.sigma_r_max, self.sigma_v_max)
    }
}

impl KfParams {
    pub fn new(q: Matrix2<f64>, r: Matrix2<f64>, dt: f64, t_max: f64, sigma_r_max: f64, sigma_v_max: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("tracker dt must be positive, got {dt}")));
        }
        for (name, m) in [("process noise", q), ("measurement noise", r)] {
            if !is_psd(&m) {
                return Err(Error::Config(format!("{name} covariance is not symmetric PSD")));
            }
        }
        if !(t_max > 0.0 && sigma_r_max > 0.0 && sigma_v_max > 0.0) {
            return Err(Error::Config("reset bounds must be positive".into()));
        }
        Ok(Self { q, r, dt, t_max, sigma_r_max, sigma_v_max })
    }

    pub fn transition(&self) -> Matrix2<f64> {
        Matrix2::new(1.0, self.dt, 0.0, 1.0)
    }
}

/// Initial covariance `diag(Δr^2, Δv^2)`.
pub fn initial_covariance(res: &Resolutions) -> Matrix2<f64> {
    Matrix2::new(res.range_m.powi(2), 0.0, 0.0, res.velocity_mps.powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    /// `[range_m, velocity_mps]`
    pub x: Vector2<f64>,
    pub p: Matrix2<f64>,
    pub last_update_time: f64,
    pub initialized: bool,
}

impl TrackState {
    pub fn sigma_range(&self) -> f64 {
        self.p[(0, 0)].max(0.0).sqrt()
    }

    pub fn sigma_velocity(&self) -> f64 {
        self.p[(1, 1)].max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetReason {
    Timeout,
    RangeUncertainty,
    VelocityUncertainty,
}

pub fn init(z: Vector2<f64>, p0: Matrix2<f64>, now: f64) -> Result<TrackState> {
    if !(z[0].is_finite() && z[1].is_finite()) {
        return Err(Error::NonFinite("track initialization measurement"));
    }
    Ok(TrackState { x: z, p: p0, last_update_time: now, initialized: true })
}

pub fn predict(state: &TrackState, params: &KfParams) -> TrackState {
    let f = params.transition();
    TrackState {
        x: f * state.x,
        p: symmetrize(f * state.p * f.transpose() + params.q),
        ..*state
    }
}

/// Identity measurement model: `K = P (P + R)^-1`.
pub fn update(state: &TrackState, z: Vector2<f64>, params: &KfParams, now: f64) -> Result<TrackState> {
    let s = state.p + params.r;
    let s_inv = s
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(format!("innovation covariance {s:?} is singular")))?;
    let gain = state.p * s_inv;
    let x = state.x + gain * (z - state.x);
    let p = symmetrize((Matrix2::identity() - gain) * state.p);
    Ok(TrackState { x, p, last_update_time: now, initialized: true })
}

pub fn should_reset(state: &TrackState, now: f64, params: &KfParams) -> Option<ResetReason> {
    if now - state.last_update_time > params.t_max {
        Some(ResetReason::Timeout)
    } else if state.sigma_range() > params.sigma_r_max {
        Some(ResetReason::RangeUncertainty)
    } else if state.sigma_velocity() > params.sigma_v_max {
        Some(ResetReason::VelocityUncertainty)
    } else {
        None
    }
}

fn symmetrize(p: Matrix2<f64>) -> Matrix2<f64> {
    (p + p.transpose()) * 0.5
}

fn is_psd(m: &Matrix2<f64>) -> bool {
    let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * m.amax().max(1.0);
    sym && m[(0, 0)] >= 0.0 && m[(1, 1)] >= 0.0 && m.determinant() >= -1e-12 * m.amax().powi(2)
}

/// Smallest eigenvalue of a symmetric 2x2 matrix.
pub fn min_eigenvalue(p: &Matrix2<f64>) -> f64 {
    let s = symmetrize(*p);
    let mean = 0.5 * (s[(0, 0)] + s[(1, 1)]);
    let half_diff = 0.5 * (s[(0, 0)] - s[(1, 1)]);
    mean - (half_diff * half_diff + s[(0, 1)] * s[(0, 1)]).sqrt()
}

/// Outcome of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackStep {
    /// Track after predict/update, before any reset. `None` when no track existed and
    /// nothing was measured.
    pub state: Option<TrackState>,
    pub reset: Option<ResetReason>,
}

/// Single-track state machine: predict every frame, update on a measurement, start a
/// track from the first measurement, and drop it when [`should_reset`] fires.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub params: KfParams,
    pub p0: Matrix2<f64>,
    state: Option<TrackState>,
}

impl Tracker {
    pub fn new(params: KfParams, p0: Matrix2<f64>) -> Self {
        Self { params, p0, state: None }
    }

    pub fn state(&self) -> Option<&TrackState> {
        self.state.as_ref()
    }

    pub fn step(&mut self, now: f64, measurement: Option<Vector2<f64>>) -> Result<TrackStep> {
        let next = match (self.state, measurement) {
            (Some(s), Some(z)) => Some(update(&predict(&s, &self.params), z, &self.params, now)?),
            (Some(s), None) => Some(predict(&s, &self.params)),
            (None, Some(z)) => Some(init(z, self.p0, now)?),
            (None, None) => None,
        };
        let reset = next.and_then(|s| should_reset(&s, now, &self.params));
        if let Some(reason) = reset {
            log::debug!("track reset at t={now:.3}s: {reason:?}");
        }
        self.state = if reset.is_some() { None } else { next };
        Ok(TrackStep { state: next, reset })
    }
}
