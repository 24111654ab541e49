//! Subspace clutter calibration (offline) and removal (runtime).

use num_complex::Complex64;
use rayon::prelude::*;

use super::mdl::estimate_order_mdl;
use super::snapshots::{ClutterSnapshots, Convention};
use crate::error::{Error, Result};
use crate::numerics::lstsq::Cholesky;
use crate::numerics::{svd_thin, ComplexMatrix, GramSpectrum, SvdResult};
use crate::scene::CsiFrame;

/// Singular values below this fraction of the largest are treated as zero when
/// checking a requested order against the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-6;

const RUNTIME_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSelection {
    Fixed(usize),
    Mdl,
}

/// Everything the runtime removal needs, plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterCalibration {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    /// Number of snapshots the calibration was computed from.
    pub k: usize,
    /// `L x Q`: row `i` is the `i`-th clutter basis vector, conjugated.
    pub c_hat_h: ComplexMatrix,
    /// `Q x L`: `C_hat (C_hat^H C_hat)^{-1}`.
    pub p_prime: ComplexMatrix,
    /// Full singular spectrum of the stacked snapshots.
    pub singular_values: Vec<f64>,
    pub convention: Convention,
    pub snapshot_hash: [u8; 32],
    /// The requested order exceeded the numerical rank and was reduced.
    pub truncated: bool,
}

impl ClutterCalibration {
    pub fn order(&self) -> usize {
        self.c_hat_h.rows()
    }

    pub fn q(&self) -> usize {
        self.c_hat_h.cols()
    }

    /// Subspace coefficients `C_hat^H h` (length `L`).
    pub fn coefficients(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        if h.len() != self.q() {
            return Err(Error::dims(format!("vector of length {}", self.q()), format!("{}", h.len())));
        }
        let l = self.order();
        if l == 0 {
            return Ok(Vec::new());
        }
        let partials: Vec<Vec<Complex64>> = self
            .c_hat_h
            .as_slice()
            .par_chunks(l * RUNTIME_CHUNK)
            .zip(h.par_chunks(RUNTIME_CHUNK))
            .map(|(cols, hs)| {
                let mut y = vec![Complex64::new(0.0, 0.0); l];
                for (col, hq) in cols.chunks_exact(l).zip(hs) {
                    for (yi, c) in y.iter_mut().zip(col) {
                        *yi += c * hq;
                    }
                }
                y
            })
            .collect();
        let mut y = vec![Complex64::new(0.0, 0.0); l];
        for p in partials {
            for (a, b) in y.iter_mut().zip(p) {
                *a += b;
            }
        }
        Ok(y)
    }

    /// `h - P' (C_hat^H h)`, evaluated right to left so no `Q x Q` matrix appears.
    pub fn remove_vec(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        let y = self.coefficients(h)?;
        let q = self.q();
        let mut out = h.to_vec();
        for (j, yj) in y.iter().enumerate() {
            let col = &self.p_prime.as_slice()[j * q..(j + 1) * q];
            out.par_chunks_mut(RUNTIME_CHUNK)
                .zip(col.par_chunks(RUNTIME_CHUNK))
                .for_each(|(o, p)| {
                    for (ov, pv) in o.iter_mut().zip(p) {
                        *ov -= pv * yj;
                    }
                });
        }
        Ok(out)
    }

    /// Dense `Q x Q` projector `P' C_hat^H`. Only sensible for small `Q`.
    pub fn projector(&self) -> ComplexMatrix {
        self.p_prime.matmul(&self.c_hat_h).expect("Q x L times L x Q")
    }

    pub fn check_frame(&self, h: &ComplexMatrix) -> Result<()> {
        if h.rows() != self.n_subcarriers || h.cols() != self.n_symbols {
            return Err(Error::dims(
                format!("{}x{}", self.n_subcarriers, self.n_symbols),
                format!("{}x{}", h.rows(), h.cols()),
            ));
        }
        Ok(())
    }
}

/// Computes the clutter subspace and the runtime projection factor from snapshots.
pub fn calibrate(snapshots: &ClutterSnapshots, order: OrderSelection) -> Result<ClutterCalibration> {
    let c = snapshots.matrix();
    let k = snapshots.k();
    let q = snapshots.q();

    let (singular_values, leading): (Vec<f64>, Box<dyn Fn(usize) -> SvdResult + '_>) = if k <= q {
        let spectrum = GramSpectrum::new(c)?;
        let sv = spectrum.singular_values();
        (sv, Box::new(move |l| spectrum.leading(c, l)))
    } else {
        let full = svd_thin(c)?;
        let sv = full.singular_values.clone();
        (
            sv,
            Box::new(move |l| SvdResult {
                left_vectors: ComplexMatrix::from_fn(k, l, |i, j| full.left_vectors[(i, j)]),
                singular_values: full.singular_values[..l].to_vec(),
                right_vectors_h: ComplexMatrix::from_fn(l, q, |i, j| full.right_vectors_h[(i, j)]),
            }),
        )
    };

    let requested = match order {
        OrderSelection::Fixed(l) => {
            if l == 0 || l > k {
                return Err(Error::InvalidInput(format!("clutter order must be in 1..={k}, got {l}")));
            }
            l
        }
        OrderSelection::Mdl => {
            let mut padded = singular_values.clone();
            padded.resize(k, 0.0);
            let est = estimate_order_mdl(&padded, k, q)?;
            if est.degenerate {
                log::warn!("MDL found no dominant clutter component; calibrating with order 0");
            }
            est.order
        }
    };

    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > top * RANK_TOLERANCE && s > 0.0).count();
    let truncated = requested > rank;
    let l = if truncated {
        log::warn!("requested clutter order {requested} exceeds numerical rank {rank}; truncating");
        rank
    } else {
        requested
    };

    // Rows of C are vec(h)^T, so the right singular vectors span the conjugated
    // acquisitions. Conjugating them gives a basis for the acquisitions themselves.
    let svd = leading(l);
    let mut c_hat_h = svd.right_vectors_h;
    for v in c_hat_h.as_mut_slice() {
        *v = v.conj();
    }
    let p_prime = projection_factor(&c_hat_h)?;

    Ok(ClutterCalibration {
        n_subcarriers: snapshots.n_subcarriers(),
        n_symbols: snapshots.n_symbols(),
        k,
        c_hat_h,
        p_prime,
        singular_values,
        convention: Convention::ColumnMajor,
        snapshot_hash: snapshots.hash(),
        truncated,
    })
}

/// `P' = C_hat (C_hat^H C_hat)^{-1}` with `C_hat = (c_hat_h)^H`.
fn projection_factor(c_hat_h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = c_hat_h.rows();
    let q = c_hat_h.cols();
    if l == 0 {
        return Ok(ComplexMatrix::zeros(q, 0));
    }
    // G = C_hat^H C_hat = c_hat_h c_hat_h^H (L x L).
    let mut g = ComplexMatrix::zeros(l, l);
    for col in c_hat_h.as_slice().chunks_exact(l) {
        for i in 0..l {
            for j in i..l {
                g[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    for i in 0..l {
        for j in 0..i {
            g[(i, j)] = g[(j, i)].conj();
        }
    }
    let chol = Cholesky::factor(&g).ok_or_else(|| Error::Singular("clutter subspace Gram matrix".into()))?;
    // X = G^{-1}, column by column.
    let mut x = ComplexMatrix::zeros(l, l);
    for j in 0..l {
        let mut e = vec![Complex64::new(0.0, 0.0); l];
        e[j] = Complex64::new(1.0, 0.0);
        x.column_mut(j).copy_from_slice(&chol.solve(&e));
    }
    // P'[q, j] = sum_i conj(c_hat_h[i, q]) X[i, j]
    let mut p = ComplexMatrix::zeros(q, l);
    for j in 0..l {
        let xj = x.column(j).to_vec();
        let dst = p.column_mut(j);
        for (qi, col) in c_hat_h.as_slice().chunks_exact(l).enumerate() {
            dst[qi] = col.iter().zip(&xj).map(|(c, xv)| c.conj() * xv).sum();
        }
    }
    Ok(p)
}

/// Runtime clutter removal on one frame.
pub fn crap_remove(cal: &ClutterCalibration, frame: &CsiFrame) -> Result<CsiFrame> {
    cal.check_frame(&frame.h)?;
    let out = cal.remove_vec(frame.h.as_slice())?;
    let h = ComplexMatrix::new(cal.n_subcarriers, cal.n_symbols, out)?;
    Ok(frame.with_matrix(h))
}
