use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{pad_pow2, plan, ComplexMatrix, Direction};
use crate::scene::CsiFrame;

/// Range-Doppler power map, `N' x M'`, stored row-major (range index outer).
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub values: Vec<f64>,
    pub n_prime: usize,
    pub m_prime: usize,
    /// Doppler axis shifted so index `M'/2` is zero velocity.
    pub doppler_centered: bool,
}

impl Periodogram {
    pub fn zeros(n_prime: usize, m_prime: usize) -> Self {
        Self {
            values: vec![0.0; n_prime * m_prime],
            n_prime,
            m_prime,
            doppler_centered: true,
        }
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[n * self.m_prime + m]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.m_prime..(n + 1) * self.m_prime]
    }

    /// Index of the largest value as `(n, m)`; the first one wins on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        (best / self.m_prime, best % self.m_prime)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, gamma: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * gamma).collect(),
            ..self.clone()
        }
    }
}

/// `S(n, m) = |sum_k (sum_l H(k,l) e^{-j2pi lm/M'}) e^{+j2pi kn/N'}|^2 / (N'M')` with
/// `N' = pad_pow2(N)`, `M' = pad_pow2(M)` and a centered Doppler axis.
pub fn periodogram(frame: &CsiFrame) -> Periodogram {
    periodogram_oversampled(frame, 1).expect("oversample factor 1 is valid")
}

/// Like [`periodogram`] with both axes padded further to `oversample * pad_pow2(.)`.
/// `oversample` must be a power of two.
pub fn periodogram_oversampled(frame: &CsiFrame, oversample: usize) -> Result<Periodogram> {
    if oversample == 0 || !oversample.is_power_of_two() {
        return Err(Error::InvalidInput(format!("oversample must be a power of two, got {oversample}")));
    }
    Ok(compute(&frame.h, oversample))
}

fn compute(h: &ComplexMatrix, oversample: usize) -> Periodogram {
    let (n, m) = (h.rows(), h.cols());
    let n_prime = pad_pow2(n) * oversample;
    let m_prime = pad_pow2(m) * oversample;
    let zero = Complex64::new(0.0, 0.0);

    // Doppler: forward transform of each subcarrier row over symbols.
    let mut rows = vec![zero; n * m_prime];
    let fwd = plan(Direction::Forward, m_prime);
    rows.par_chunks_mut(m_prime).enumerate().for_each(|(k, row)| {
        for (l, v) in row.iter_mut().take(m).enumerate() {
            *v = h[(k, l)];
        }
        fwd.process(row);
    });

    // Range: inverse transform of each Doppler column over subcarriers, written into
    // the centered output.
    let inv = plan(Direction::Inverse, n_prime);
    let norm = 1.0 / (n_prime as f64 * m_prime as f64);
    let half = m_prime / 2;
    let cols: Vec<Vec<f64>> = (0..m_prime)
        .into_par_iter()
        .map(|mm| {
            let mut col = vec![zero; n_prime];
            for (k, v) in col.iter_mut().take(n).enumerate() {
                *v = rows[k * m_prime + mm];
            }
            inv.process(&mut col);
            col.iter().map(|v| v.norm_sqr() * norm).collect()
        })
        .collect();
    let mut values = vec![0.0; n_prime * m_prime];
    for (mm, col) in cols.iter().enumerate() {
        let dst = (mm + half) % m_prime;
        for (nn, v) in col.iter().enumerate() {
            values[nn * m_prime + dst] = *v;
        }
    }
    Periodogram {
        values,
        n_prime,
        m_prime,
        doppler_centered: true,
    }
}
