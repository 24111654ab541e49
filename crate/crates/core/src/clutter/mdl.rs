//! Model-order selection by minimum description length (Wax and Kailath form).
//!
//! Treats the `K` snapshots as variables observed over `Q` samples, so the sample
//! covariance eigenvalues are `sigma_i^2 / Q`.

use crate::error::{Error, Result};

/// Eigenvalues closer than this relative spread count as "all equal".
const EQUAL_TOLERANCE: f64 = 1e-9;
/// Eigenvalues are floored at this fraction of the largest before taking logs.
const EIGEN_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone)]
pub struct OrderEstimate {
    pub order: usize,
    /// Criterion value for each candidate order `0..K`.
    pub criterion: Vec<f64>,
    /// All eigenvalues were equal: no signal subspace was found.
    pub degenerate: bool,
}

pub fn estimate_order_mdl(singular_values: &[f64], k: usize, q: usize) -> Result<OrderEstimate> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("MDL needs K >= 2, got {k}")));
    }
    if singular_values.len() != k {
        return Err(Error::dims(format!("{k} singular values"), format!("{}", singular_values.len())));
    }
    if q == 0 {
        return Err(Error::InvalidInput("MDL needs Q >= 1".into()));
    }
    if singular_values.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidInput("singular values must be finite and non-negative".into()));
    }
    if singular_values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("singular values must be sorted descending".into()));
    }

    let qf = q as f64;
    let top = singular_values[0] * singular_values[0] / qf;
    let lambda: Vec<f64> = singular_values
        .iter()
        .map(|s| (s * s / qf).max(top * EIGEN_FLOOR))
        .collect();

    let lo = *lambda.last().unwrap();
    let degenerate = top == 0.0 || (top - lo) <= EQUAL_TOLERANCE * top;
    if degenerate {
        return Ok(OrderEstimate { order: 0, criterion: vec![0.0; k], degenerate: true });
    }

    let kf = k as f64;
    let criterion: Vec<f64> = (0..k)
        .map(|order| {
            let tail = &lambda[order..];
            let count = tail.len() as f64;
            let arith = tail.iter().sum::<f64>() / count;
            let log_geo = tail.iter().map(|l| l.ln()).sum::<f64>() / count;
            let fit = -qf * count * (log_geo - arith.ln());
            let of = order as f64;
            fit + 0.5 * of * (2.0 * kf - of) * qf.ln()
        })
        .collect();
    let order = criterion
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(OrderEstimate { order, criterion, degenerate: false })
}
