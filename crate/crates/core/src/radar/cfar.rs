use super::periodogram::Periodogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub eta: f64,
    /// Estimated mean noise power per bin.
    pub noise_level: f64,
    /// Set when the map is identically zero, so no noise estimate exists.
    pub degenerate: bool,
}

/// Frame-level CFAR threshold.
///
/// Noise-only bins are exponential, so the median over ln 2 estimates their mean `mu`.
/// The threshold is chosen so that the largest of `N'M'` independent noise bins exceeds
/// it with probability `p_fa`: `eta = -mu ln(1 - (1 - p_fa)^{1/(N'M')})`.
pub fn cfar_threshold(pg: &Periodogram, p_fa: f64) -> Result<Threshold> {
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::InvalidInput(format!("p_fa must lie in (0, 1), got {p_fa}")));
    }
    let mut scratch = pg.values.clone();
    let mid = scratch.len() / 2;
    let (_, median, _) = scratch.select_nth_unstable_by(mid, f64::total_cmp);
    let mu = *median / std::f64::consts::LN_2;
    if mu == 0.0 && pg.values.iter().all(|&v| v == 0.0) {
        return Ok(Threshold { eta: 0.0, noise_level: 0.0, degenerate: true });
    }
    let bins = pg.values.len() as f64;
    // 1 - (1 - p)^{1/B}, the per-bin exceedance probability, without cancellation
    // for tiny p/B.
    let per_bin = -((-p_fa).ln_1p() / bins).exp_m1();
    Ok(Threshold {
        eta: -mu * per_bin.ln(),
        noise_level: mu,
        degenerate: false,
    })
}
