use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_m = sum_l x_l exp(-j 2 pi l m / P')`
    Forward,
    /// `x_n = sum_k X_k exp(+j 2 pi k n / P')`, without `1/P'` scaling.
    Inverse,
}

/// Smallest power of two `>= n` (with `pad_pow2(0) == 1`).
pub fn pad_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Reusable unnormalized transform of length `len`, for batched use.
pub fn plan(direction: Direction, len: usize) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    match direction {
        Direction::Forward => planner.plan_fft_forward(len),
        Direction::Inverse => planner.plan_fft_inverse(len),
    }
}

/// Zero-pads `x` to `padded_len` and transforms it. Neither direction normalizes.
pub fn dft_1d(x: &[Complex64], direction: Direction, padded_len: usize) -> Result<Vec<Complex64>> {
    if padded_len < x.len() {
        return Err(Error::InvalidInput(format!(
            "padded length {padded_len} shorter than input length {}",
            x.len()
        )));
    }
    let mut buf = Vec::with_capacity(padded_len);
    buf.extend_from_slice(x);
    buf.resize(padded_len, Complex64::new(0.0, 0.0));
    if padded_len == 0 {
        return Ok(buf);
    }
    plan(direction, padded_len).process(&mut buf);
    Ok(buf)
}
