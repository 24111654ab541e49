//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Jacobi is slow for large matrices but very accurate for small ones, which is all
//! this crate needs: Gram matrices here are at most a few hundred rows.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues sorted descending.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the same order as `values`.
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition `A = V diag(values) V^H` of a Hermitian matrix.
///
/// Only the upper triangle is trusted; the lower triangle is overwritten with its
/// conjugate mirror before iterating.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dims("square matrix", format!("{}x{}", a.rows(), a.cols())));
    }
    a.ensure_finite("hermitian_eigen input")?;

    // Row-major working copy, Hermitian by construction.
    let mut w = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        w[i * n + i] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            w[i * n + j] = a[(i, j)];
            w[j * n + i] = a[(i, j)].conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let total: f64 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let tol = f64::EPSILON * total.max(f64::MIN_POSITIVE);

    let off_norm = |w: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * w[i * n + j].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&w);
        if off <= tol || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = w[p * n + q];
                let g_abs = g.norm();
                if g_abs <= tol / (n as f64) {
                    continue;
                }
                let app = w[p * n + p].re;
                let aqq = w[q * n + q].re;
                let phase_conj = (g / g_abs).conj();
                let theta = (aqq - app) / (2.0 * g_abs);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // J = diag(1, conj(e)) * [[c, s], [-s, c]] restricted to (p, q).
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = phase_conj * (-s);
                let j_qq = phase_conj * c;

                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = akp * j_pp + akq * j_qp;
                    w[k * n + q] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    w[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                w[p * n + q] = Complex64::new(0.0, 0.0);
                w[q * n + p] = Complex64::new(0.0, 0.0);
                w[p * n + p] = Complex64::new(app - t * g_abs, 0.0);
                w[q * n + q] = Complex64::new(aqq + t * g_abs, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].re.total_cmp(&w[i * n + i].re));
    let values = order.iter().map(|&i| w[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}
