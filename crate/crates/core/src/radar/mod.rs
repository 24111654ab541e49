//! OFDM radar processing: range-Doppler periodogram, CFAR threshold, strongest-peak
//! detection with fractional bins, and conversion to physical units.

pub mod cfar;
pub mod detect;
pub mod dump;
pub mod periodogram;

pub use cfar::{cfar_threshold, Threshold};
pub use detect::{detect_strongest, strongest_peak, Detection};
pub use dump::{read_periodogram, write_peak_csv, write_periodogram, PEAK_CSV_HEADER, PGRAM_MAGIC};
pub use periodogram::{periodogram, periodogram_oversampled, Periodogram};

use crate::scene::{RfConfig, SPEED_OF_LIGHT};

/// Theoretical range and velocity resolution of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolutions {
    pub range_m: f64,
    pub velocity_mps: f64,
}

/// `Δr = c / (2 N Δf)` and `Δv = c / (2 M T0 f_c)`.
///
/// The velocity form is the Doppler span of `M` symbols; it reduces to
/// `c Δf / (2 M f_c)` when `T0 = 1/Δf`.
pub fn resolutions(config: &RfConfig) -> Resolutions {
    Resolutions {
        range_m: SPEED_OF_LIGHT / (2.0 * config.n_subcarriers as f64 * config.subcarrier_spacing_hz),
        velocity_mps: SPEED_OF_LIGHT
            / (2.0 * config.n_symbols as f64 * config.symbol_duration_s * config.carrier_hz),
    }
}

/// Width of one periodogram bin along each axis (`N'`, `M'` include padding).
pub fn bin_widths(config: &RfConfig, n_prime: usize, m_prime: usize) -> Resolutions {
    Resolutions {
        range_m: SPEED_OF_LIGHT / (2.0 * config.subcarrier_spacing_hz * n_prime as f64),
        velocity_mps: SPEED_OF_LIGHT / (2.0 * config.symbol_duration_s * config.carrier_hz * m_prime as f64),
    }
}

/// Fractional periodogram indices to `(range_m, velocity_mps)`. The Doppler axis is
/// taken as centered, so index `M'/2` is zero velocity.
pub fn bins_to_physical(n_frac: f64, m_frac: f64, pg: &Periodogram, config: &RfConfig) -> (f64, f64) {
    let w = bin_widths(config, pg.n_prime, pg.m_prime);
    let centre = if pg.doppler_centered { (pg.m_prime / 2) as f64 } else { 0.0 };
    (n_frac * w.range_m, (m_frac - centre) * w.velocity_mps)
}
