use super::bins_to_physical;
use super::periodogram::Periodogram;
use crate::scene::RfConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub peak_power: f64,
    /// Fractional range bin.
    pub n_frac: f64,
    /// Fractional Doppler bin on the centered axis.
    pub m_frac: f64,
    pub above_threshold: bool,
    /// Interpolation skipped along range because the peak sits on the array edge.
    pub range_edge: bool,
    /// Same for the Doppler axis.
    pub doppler_edge: bool,
}

/// Global maximum with per-axis three-point parabolic refinement on dB values,
/// regardless of any threshold.
pub fn strongest_peak(pg: &Periodogram, eta: f64, config: &RfConfig) -> Detection {
    let (n, m) = pg.argmax();
    let peak = pg.get(n, m);
    let floor = (peak * 1e-30).max(f64::MIN_POSITIVE);
    let db = |v: f64| 10.0 * v.max(floor).log10();

    let (dn, range_edge) = if n == 0 || n + 1 == pg.n_prime {
        (0.0, true)
    } else {
        (vertex(db(pg.get(n - 1, m)), db(peak), db(pg.get(n + 1, m))), false)
    };
    let (dm, doppler_edge) = if m == 0 || m + 1 == pg.m_prime {
        (0.0, true)
    } else {
        (vertex(db(pg.get(n, m - 1)), db(peak), db(pg.get(n, m + 1))), false)
    };

    let n_frac = n as f64 + dn;
    let m_frac = m as f64 + dm;
    let (range_m, velocity_mps) = bins_to_physical(n_frac, m_frac, pg, config);
    Detection {
        range_m,
        velocity_mps,
        peak_power: peak,
        n_frac,
        m_frac,
        above_threshold: peak > eta,
        range_edge,
        doppler_edge,
    }
}

/// Strongest peak if it exceeds `eta`, else `None`.
pub fn detect_strongest(pg: &Periodogram, eta: f64, config: &RfConfig) -> Option<Detection> {
    let d = strongest_peak(pg, eta, config);
    d.above_threshold.then_some(d)
}

/// Offset of the parabola vertex through `(-1, a), (0, b), (1, c)`, clamped to half a bin.
fn vertex(a: f64, b: f64, c: f64) -> f64 {
    let curvature = a - 2.0 * b + c;
    if !(curvature < 0.0) {
        return 0.0;
    }
    (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
}
