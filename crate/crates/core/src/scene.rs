//! Synthetic CSI frames from point scatterers: clutter plus an optional target, a
//! random global phase per acquisition, and white complex Gaussian noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Range at which the reference received power is specified.
pub const REFERENCE_RANGE_M: f64 = 10.0;

/// Parameters of one radio frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfConfig {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub symbol_duration_s: f64,
    pub frame_duration_s: f64,
}

impl RfConfig {
    /// Symbols spread evenly over `frame_duration_s`, so `T0 = frame / M`.
    pub fn with_frame(n: usize, m: usize, carrier_hz: f64, spacing_hz: f64, frame_duration_s: f64) -> Self {
        Self {
            n_subcarriers: n,
            n_symbols: m,
            carrier_hz,
            subcarrier_spacing_hz: spacing_hz,
            symbol_duration_s: frame_duration_s / m as f64,
            frame_duration_s,
        }
    }

    /// FR2 numerology of the reference simulation: 1584 subcarriers at 120 kHz,
    /// 1120 symbols in a 10 ms frame at 27.4 GHz.
    pub fn full_scale() -> Self {
        Self::with_frame(1584, 1120, 27.4e9, 120e3, 10e-3)
    }

    /// Reduced frame for fast Monte Carlo: 256 subcarriers at 720 kHz spacing (every
    /// sixth 120 kHz subcarrier, ~184 MHz span) and 128 sensing symbols spread over the
    /// same 10 ms frame. Range and velocity resolution stay close to [`Self::full_scale`].
    pub fn desk() -> Self {
        Self::with_frame(256, 128, 27.4e9, 720e3, 10e-3)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 || self.n_symbols < 2 {
            return Err(Error::Config(format!(
                "need at least 2 subcarriers and 2 symbols, got {}x{}",
                self.n_subcarriers, self.n_symbols
            )));
        }
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("symbol_duration_s", self.symbol_duration_s),
            ("frame_duration_s", self.frame_duration_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let frame = self.symbol_duration_s * self.n_symbols as f64;
        if ((frame - self.frame_duration_s) / self.frame_duration_s).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "symbol_duration_s * n_symbols = {frame} does not match frame_duration_s = {}",
                self.frame_duration_s
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.n_subcarriers * self.n_symbols
    }

    /// Largest speed observable without Doppler aliasing.
    pub fn max_unambiguous_speed(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * self.symbol_duration_s * self.carrier_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Clutter,
    Target,
}

/// One point reflector. Positive velocity means receding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub coeff: Complex64,
    pub role: Role,
}

impl Scatterer {
    pub fn clutter(range_m: f64, coeff: Complex64) -> Self {
        Self { range_m, velocity_mps: 0.0, coeff, role: Role::Clutter }
    }

    pub fn target(range_m: f64, velocity_mps: f64, coeff: Complex64) -> Self {
        Self { range_m, velocity_mps, coeff, role: Role::Target }
    }
}

/// Noise power over the full band; each CSI element carries `P_n / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub total_noise_power_dbm: f64,
}

impl NoiseSpec {
    pub fn new(total_noise_power_dbm: f64) -> Self {
        Self { total_noise_power_dbm }
    }

    /// No noise at all.
    pub fn silent() -> Self {
        Self { total_noise_power_dbm: f64::NEG_INFINITY }
    }

    /// Linear per-element variance (mW).
    pub fn per_element_power(&self, n_subcarriers: usize) -> f64 {
        dbm_to_mw(self.total_noise_power_dbm) / n_subcarriers as f64
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeta {
    pub scatterers: Vec<Scatterer>,
    pub noise_power: f64,
    pub phase: f64,
}

/// One sensing acquisition: an `N x M` matrix, rows are subcarriers, columns symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiFrame {
    pub config: RfConfig,
    pub h: ComplexMatrix,
    pub meta: Option<FrameMeta>,
}

impl CsiFrame {
    pub fn new(config: RfConfig, h: ComplexMatrix) -> Result<Self> {
        if h.rows() != config.n_subcarriers || h.cols() != config.n_symbols {
            return Err(Error::dims(
                format!("{}x{}", config.n_subcarriers, config.n_symbols),
                format!("{}x{}", h.rows(), h.cols()),
            ));
        }
        Ok(Self { config, h, meta: None })
    }

    pub fn with_matrix(&self, h: ComplexMatrix) -> Self {
        Self { config: self.config, h, meta: self.meta.clone() }
    }
}

/// `a(r)_k = exp(-j 4 pi k df r / c)`, `k = 0..N`.
pub fn steering_range(config: &RfConfig, range_m: f64) -> Vec<Complex64> {
    let step = -4.0 * PI * config.subcarrier_spacing_hz * range_m / SPEED_OF_LIGHT;
    (0..config.n_subcarriers).map(|k| Complex64::from_polar(1.0, step * k as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct DopplerSteering {
    pub vector: Vec<Complex64>,
    /// Speed outside the unambiguous interval; the phase progression aliases.
    pub ambiguous: bool,
}

/// `b(v)_l = exp(+j 4 pi l T0 fc v / c)`, `l = 0..M`.
pub fn steering_doppler(config: &RfConfig, velocity_mps: f64) -> DopplerSteering {
    let step = 4.0 * PI * config.symbol_duration_s * config.carrier_hz * velocity_mps / SPEED_OF_LIGHT;
    let vector = (0..config.n_symbols).map(|l| Complex64::from_polar(1.0, step * l as f64)).collect();
    let ambiguous = velocity_mps.abs() * 2.0 * config.symbol_duration_s * config.carrier_hz / SPEED_OF_LIGHT >= 0.5;
    DopplerSteering { vector, ambiguous }
}

/// Two-way free-space amplitude factor `(c/fc) / ((4 pi)^{3/2} r^2)`.
pub fn attenuation(range_m: f64, config: &RfConfig) -> Result<f64> {
    attenuation_with_exponent(range_m, config, 2.0)
}

/// Amplitude falls as `r^-exponent`; 2 is the monostatic radar equation.
pub fn attenuation_with_exponent(range_m: f64, config: &RfConfig, exponent: f64) -> Result<f64> {
    if !(range_m > 0.0) {
        return Err(Error::InvalidInput(format!("attenuation needs a positive range, got {range_m}")));
    }
    let wavelength = SPEED_OF_LIGHT / config.carrier_hz;
    Ok(wavelength / ((4.0 * PI).powf(1.5) * range_m.powf(exponent)))
}

/// `H = e^{j phase} sum_p alpha_p a(r_p) b(v_p)^T + Z`.
pub fn synthesize_csi<R: Rng + ?Sized>(
    config: &RfConfig,
    scatterers: &[Scatterer],
    noise: NoiseSpec,
    phase: f64,
    rng: &mut R,
) -> CsiFrame {
    let n = config.n_subcarriers;
    let m = config.n_symbols;
    let rot = Complex64::from_polar(1.0, phase);
    let ranges: Vec<Vec<Complex64>> = scatterers.iter().map(|s| steering_range(config, s.range_m)).collect();
    let dopplers: Vec<Vec<Complex64>> =
        scatterers.iter().map(|s| steering_doppler(config, s.velocity_mps).vector).collect();

    let mut h = ComplexMatrix::zeros(n, m);
    for l in 0..m {
        let col = h.column_mut(l);
        for ((s, a), b) in scatterers.iter().zip(&ranges).zip(&dopplers) {
            let w = rot * s.coeff * b[l];
            for (hk, ak) in col.iter_mut().zip(a) {
                *hk += w * ak;
            }
        }
    }

    let noise_power = noise.per_element_power(n);
    if noise_power > 0.0 {
        let sd = (noise_power / 2.0).sqrt();
        for v in h.as_mut_slice() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *v += Complex64::new(re * sd, im * sd);
        }
    }

    CsiFrame {
        config: *config,
        h,
        meta: Some(FrameMeta {
            scatterers: scatterers.to_vec(),
            noise_power,
            phase,
        }),
    }
}

/// Parameters of the random scene generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub n_clutter: usize,
    pub range_min_m: f64,
    pub range_max_m: f64,
    pub velocity_min_mps: f64,
    pub velocity_max_mps: f64,
    /// Rician K-factor of every coefficient draw, dB.
    pub rician_k_db: f64,
    /// Per-element received power of a unit-gain scatterer at 10 m, dBm.
    pub reference_power_dbm: f64,
    /// Reflectivity of clutter relative to the target, dB.
    pub clutter_gain_db: f64,
    /// Amplitude path-loss exponent (2 = radar equation).
    pub path_loss_exponent: f64,
    /// Redraw a unit-power Rician gain for every scatterer in every acquisition.
    pub fading_per_acquisition: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n_clutter: 5,
            range_min_m: 1.0,
            range_max_m: 25.0,
            velocity_min_mps: -1.5,
            velocity_max_mps: 1.5,
            rician_k_db: 10.0,
            reference_power_dbm: -125.0,
            clutter_gain_db: 10.0,
            path_loss_exponent: 2.0,
            fading_per_acquisition: true,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_min_m >= 0.0 && self.range_max_m > self.range_min_m) {
            return Err(Error::Config(format!(
                "range bounds must satisfy 0 <= min < max, got [{}, {}]",
                self.range_min_m, self.range_max_m
            )));
        }
        if !(self.velocity_max_mps >= self.velocity_min_mps) {
            return Err(Error::Config("velocity_max_mps < velocity_min_mps".into()));
        }
        if !self.rician_k_db.is_finite() || !self.reference_power_dbm.is_finite() || !self.clutter_gain_db.is_finite() {
            return Err(Error::Config("scenario powers must be finite".into()));
        }
        Ok(())
    }

    /// Linear Rician K-factor.
    pub fn rician_k(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }
}

/// Clutter and target drawn for one experiment. Coefficients are nominal values;
/// [`Scenario::acquisition`] applies per-acquisition fading on top.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub clutter: Vec<Scatterer>,
    pub target: Scatterer,
    rician_k: f64,
    fading: bool,
}

/// Unit-mean-power Rician gain `nu + sigma g` with real line-of-sight part.
fn rician_gain<R: Rng + ?Sized>(k: f64, rng: &mut R) -> Complex64 {
    let los = (k / (k + 1.0)).sqrt();
    let sd = (1.0 / (2.0 * (k + 1.0))).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(los + sd * re, sd * im)
}

/// Nominal coefficient of a scatterer at `range_m`: Rician amplitude times path loss,
/// scaled so a unit-gain scatterer at [`REFERENCE_RANGE_M`] has the reference power,
/// with a uniform phase.
pub fn nominal_coefficient<R: Rng + ?Sized>(
    params: &ScenarioParams,
    config: &RfConfig,
    range_m: f64,
    gain_db: f64,
    rng: &mut R,
) -> Result<Complex64> {
    let reference = dbm_to_mw(params.reference_power_dbm).sqrt()
        / attenuation_with_exponent(REFERENCE_RANGE_M, config, params.path_loss_exponent)?;
    let amp = rician_gain(params.rician_k(), rng).norm()
        * reference
        * 10f64.powf(gain_db / 20.0)
        * attenuation_with_exponent(range_m, config, params.path_loss_exponent)?;
    let phase = rng.random_range(0.0..2.0 * PI);
    Ok(Complex64::from_polar(amp, phase))
}

fn draw_range<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> f64 {
    // Uniform on (min, max]: reflect the half-open [min, max) draw.
    params.range_max_m - rng.random_range(0.0..params.range_max_m - params.range_min_m)
}

/// One target with uniform range and velocity.
pub fn draw_target<R: Rng + ?Sized>(params: &ScenarioParams, config: &RfConfig, rng: &mut R) -> Result<Scatterer> {
    let r = draw_range(params, rng);
    let v = if params.velocity_max_mps > params.velocity_min_mps {
        rng.random_range(params.velocity_min_mps..params.velocity_max_mps)
    } else {
        params.velocity_min_mps
    };
    Ok(Scatterer::target(r, v, nominal_coefficient(params, config, r, 0.0, rng)?))
}

/// Draws `n_clutter` static clutter scatterers and one moving target.
pub fn generate_scenario<R: Rng + ?Sized>(params: &ScenarioParams, config: &RfConfig, rng: &mut R) -> Result<Scenario> {
    params.validate()?;
    let mut clutter = Vec::with_capacity(params.n_clutter);
    for _ in 0..params.n_clutter {
        let r = draw_range(params, rng);
        clutter.push(Scatterer::clutter(r, nominal_coefficient(params, config, r, params.clutter_gain_db, rng)?));
    }
    let target = draw_target(params, config, rng)?;
    Ok(Scenario {
        clutter,
        target,
        rician_k: params.rician_k(),
        fading: params.fading_per_acquisition,
    })
}

impl Scenario {
    /// Fixed scene without per-acquisition fading.
    pub fn new(clutter: Vec<Scatterer>, target: Scatterer) -> Self {
        Self { clutter, target, rician_k: f64::INFINITY, fading: false }
    }

    /// Same scene with per-acquisition Rician fading of the given K-factor (linear).
    pub fn with_fading(mut self, rician_k: f64) -> Self {
        self.rician_k = rician_k;
        self.fading = true;
        self
    }

    /// Scatterers present in one acquisition, with fading applied when enabled.
    pub fn realize<R: Rng + ?Sized>(&self, with_target: bool, rng: &mut R) -> Vec<Scatterer> {
        let mut out: Vec<Scatterer> = self.clutter.clone();
        if with_target {
            out.push(self.target);
        }
        if self.fading && self.rician_k.is_finite() {
            for s in &mut out {
                s.coeff *= rician_gain(self.rician_k, rng);
            }
        }
        out
    }

    /// One acquisition with a fresh global phase drawn uniformly from `[0, 2 pi)`.
    pub fn acquisition<R: Rng + ?Sized>(
        &self,
        config: &RfConfig,
        noise: NoiseSpec,
        with_target: bool,
        rng: &mut R,
    ) -> CsiFrame {
        let scatterers = self.realize(with_target, rng);
        let phase = rng.random_range(0.0..2.0 * PI);
        synthesize_csi(config, &scatterers, noise, phase, rng)
    }
}
