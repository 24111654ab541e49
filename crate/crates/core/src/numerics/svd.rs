//! Thin SVD through the eigendecomposition of the smaller Gram matrix.
//!
//! For a `K x Q` matrix with `K <= Q` the work is one pass to form `C C^H`
//! (`O(K^2 Q)`), a `K x K` Jacobi eigensolve, and one more pass to map the left
//! vectors onto the right ones. Nothing of size `Q x Q` is ever formed.

use num_complex::Complex64;
use rayon::prelude::*;

use super::eigen::{hermitian_eigen, HermitianEigen};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Columns per rayon work item when streaming over the long dimension.
const COLUMN_CHUNK: usize = 2048;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `K x r`, orthonormal columns.
    pub left_vectors: ComplexMatrix,
    /// `r` values, non-negative and descending.
    pub singular_values: Vec<f64>,
    /// `r x Q`, orthonormal rows (conjugated right singular vectors).
    pub right_vectors_h: ComplexMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(sigma) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let r = self.rank();
        let us = ComplexMatrix::from_fn(self.left_vectors.rows(), r, |i, j| {
            self.left_vectors[(i, j)] * self.singular_values[j]
        });
        us.matmul(&self.right_vectors_h).expect("shapes are consistent by construction")
    }
}

/// `C C^H` for a `K x Q` matrix. Partial sums are reduced in a fixed chunk order so the
/// result does not depend on the thread count.
pub fn gram_rows(c: &ComplexMatrix) -> ComplexMatrix {
    let k = c.rows();
    let q = c.cols();
    let chunk_cols = COLUMN_CHUNK.max(q.div_ceil(64));
    let partials: Vec<Vec<Complex64>> = c
        .as_slice()
        .par_chunks(chunk_cols * k.max(1))
        .map(|block| {
            let mut g = vec![Complex64::new(0.0, 0.0); k * k];
            for col in block.chunks_exact(k.max(1)) {
                for i in 0..k {
                    let ci = col[i];
                    let row = &mut g[i * k + i..(i + 1) * k];
                    for (gij, cj) in row.iter_mut().zip(&col[i..]) {
                        *gij += ci * cj.conj();
                    }
                }
            }
            g
        })
        .collect();

    let mut g = vec![Complex64::new(0.0, 0.0); k * k];
    for p in &partials {
        for (a, b) in g.iter_mut().zip(p) {
            *a += b;
        }
    }
    // g holds the upper triangle in row-major order.
    ComplexMatrix::from_fn(k, k, |i, j| {
        if i <= j {
            g[i * k + j]
        } else {
            g[j * k + i].conj()
        }
    })
}

/// `C^H C` for a `K x Q` matrix (used when `K > Q`).
pub fn gram_cols(c: &ComplexMatrix) -> ComplexMatrix {
    let q = c.cols();
    let mut g = ComplexMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = super::matrix::dot_conj(c.column(i), c.column(j));
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

/// Thin SVD with `r = min(K, Q)` components.
pub fn svd_thin(c: &ComplexMatrix) -> Result<SvdResult> {
    check_input(c)?;
    if c.rows() <= c.cols() {
        let eig = hermitian_eigen(&gram_rows(c))?;
        let r = c.rows();
        Ok(from_row_gram(c, &eig, r))
    } else {
        let eig = hermitian_eigen(&gram_cols(c))?;
        Ok(from_col_gram(c, &eig))
    }
}

/// The `count` leading singular triplets of a wide matrix (`K <= Q`). Only `count`
/// right vectors are materialized, which is what keeps full-scale calibration in memory.
pub fn svd_leading(c: &ComplexMatrix, count: usize) -> Result<SvdResult> {
    let spectrum = GramSpectrum::new(c)?;
    Ok(spectrum.leading(c, count))
}

/// Eigendecomposition of `C C^H`, kept so the singular values can be inspected (for
/// model-order selection) before deciding how many right vectors to build.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    eigen: HermitianEigen,
}

impl GramSpectrum {
    pub fn new(c: &ComplexMatrix) -> Result<Self> {
        check_input(c)?;
        if c.rows() > c.cols() {
            return Err(Error::InvalidInput(format!(
                "row Gram path needs K <= Q, got {}x{}",
                c.rows(),
                c.cols()
            )));
        }
        Ok(Self {
            eigen: hermitian_eigen(&gram_rows(c))?,
        })
    }

    /// Singular values derived from the Gram eigenvalues, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        self.eigen.values.iter().map(|&l| l.max(0.0).sqrt()).collect()
    }

    /// Builds the first `count` triplets; `c` must be the matrix the spectrum came from.
    pub fn leading(&self, c: &ComplexMatrix, count: usize) -> SvdResult {
        from_row_gram(c, &self.eigen, count.min(c.rows()))
    }
}

fn check_input(c: &ComplexMatrix) -> Result<()> {
    if c.rows() == 0 || c.cols() == 0 {
        return Err(Error::InvalidInput("SVD of an empty matrix".into()));
    }
    c.ensure_finite("SVD input")
}

fn from_row_gram(c: &ComplexMatrix, eig: &HermitianEigen, count: usize) -> SvdResult {
    let k = c.rows();
    let q = c.cols();
    let u = &eig.vectors;

    // W = U[:, ..count]^H C, stored count x Q column-major.
    let mut w = ComplexMatrix::zeros(count, q);
    if count > 0 {
        let u_cols: Vec<&[Complex64]> = (0..count).map(|i| u.column(i)).collect();
        w.as_mut_slice()
            .par_chunks_mut(count * COLUMN_CHUNK)
            .zip(c.as_slice().par_chunks(k * COLUMN_CHUNK))
            .for_each(|(dst, src)| {
                for (wcol, ccol) in dst.chunks_exact_mut(count).zip(src.chunks_exact(k)) {
                    for (wi, ui) in wcol.iter_mut().zip(&u_cols) {
                        *wi = super::matrix::dot_conj(ui, ccol);
                    }
                }
            });
    }

    let mut rows = RowSet::new(w);
    let sigma = rows.orthonormalize();
    let left = ComplexMatrix::from_fn(k, count, |r, j| u[(r, j)]);
    sort_triplets(left, sigma, rows.into_matrix())
}

fn from_col_gram(c: &ComplexMatrix, eig: &HermitianEigen) -> SvdResult {
    let k = c.rows();
    let q = c.cols();
    let v = &eig.vectors;
    // Candidate left vectors C v_i, laid out as rows of a q x k matrix so the
    // orthonormalization routine can be shared.
    let mut y = ComplexMatrix::zeros(q, k);
    for i in 0..q {
        let cv = c.mul_vec(v.column(i)).expect("square eigenvector basis");
        y.set_row(i, &cv);
    }
    let mut rows = RowSet::new(y);
    let sigma = rows.orthonormalize();
    let u_rows = rows.into_matrix();
    let left = u_rows.transpose();
    let vh = v.conj_transpose();
    sort_triplets(left, sigma, vh)
}

/// Reorders triplets by descending singular value. `left` is `K x r`, `vh` is `r x Q`.
fn sort_triplets(left: ComplexMatrix, sigma: Vec<f64>, vh: ComplexMatrix) -> SvdResult {
    let r = sigma.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return SvdResult {
            left_vectors: left,
            singular_values: sigma,
            right_vectors_h: vh,
        };
    }
    let left_sorted = ComplexMatrix::from_fn(left.rows(), r, |i, j| left[(i, order[j])]);
    let vh_sorted = ComplexMatrix::from_fn(r, vh.cols(), |i, j| vh[(order[i], j)]);
    SvdResult {
        left_vectors: left_sorted,
        singular_values: order.iter().map(|&i| sigma[i]).collect(),
        right_vectors_h: vh_sorted,
    }
}

/// Rows of a column-major matrix treated as vectors for Gram-Schmidt.
struct RowSet {
    m: ComplexMatrix,
}

impl RowSet {
    fn new(m: ComplexMatrix) -> Self {
        Self { m }
    }

    fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    fn row_dot(&self, a: usize, b: usize) -> Complex64 {
        let r = self.m.rows();
        self.m
            .as_slice()
            .chunks_exact(r)
            .fold(Complex64::new(0.0, 0.0), |acc, col| acc + col[a].conj() * col[b])
    }

    fn row_norm(&self, a: usize) -> f64 {
        let r = self.m.rows();
        self.m
            .as_slice()
            .chunks_exact(r)
            .map(|col| col[a].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `row[dst] -= coef * row[src]`
    fn axpy(&mut self, dst: usize, src: usize, coef: Complex64) {
        let r = self.m.rows();
        for col in self.m.as_mut_slice().chunks_exact_mut(r) {
            let s = col[src];
            col[dst] -= coef * s;
        }
    }

    fn scale_row(&mut self, a: usize, s: f64) {
        let r = self.m.rows();
        for col in self.m.as_mut_slice().chunks_exact_mut(r) {
            col[a] *= s;
        }
    }

    fn project_out_previous(&mut self, i: usize) {
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for j in 0..i {
                let coef = self.row_dot(j, i);
                self.axpy(i, j, coef);
            }
        }
    }

    /// Orthonormalizes rows in order and returns each row's norm after projection,
    /// which becomes its singular value. Rows that vanish exactly are replaced by
    /// unit vectors completing the orthonormal set.
    fn orthonormalize(&mut self) -> Vec<f64> {
        let count = self.m.rows();
        let len = self.m.cols();
        let mut sigma = Vec::with_capacity(count);
        let mut next_basis = 0usize;
        for i in 0..count {
            self.project_out_previous(i);
            let nrm = self.row_norm(i);
            if nrm > 1e-200 && nrm.is_finite() {
                self.scale_row(i, 1.0 / nrm);
                sigma.push(nrm);
                continue;
            }
            sigma.push(0.0);
            loop {
                assert!(next_basis < len, "cannot complete an orthonormal set beyond its dimension");
                for j in 0..len {
                    self.m[(i, j)] = Complex64::new(if j == next_basis { 1.0 } else { 0.0 }, 0.0);
                }
                next_basis += 1;
                self.project_out_previous(i);
                let nrm = self.row_norm(i);
                if nrm > 0.5 {
                    self.scale_row(i, 1.0 / nrm);
                    break;
                }
            }
        }
        sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(k: usize, q: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(k, q, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn rel_recon_error(c: &ComplexMatrix, s: &SvdResult) -> f64 {
        s.reconstruct().sub(c).unwrap().frobenius_norm() / c.frobenius_norm()
    }

    fn row_orthonormality_error(vh: &ComplexMatrix) -> f64 {
        let g = vh.matmul(&vh.conj_transpose()).unwrap();
        g.sub(&ComplexMatrix::identity(vh.rows())).unwrap().frobenius_norm()
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd_thin(&ComplexMatrix::identity(2)).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
        let proj = s.right_vectors_h.conj_transpose().matmul(&s.right_vectors_h).unwrap();
        assert!(proj.sub(&ComplexMatrix::identity(2)).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn rank_one_recovers_right_vector_up_to_phase() {
        let a = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let raw = [Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.5), Complex64::new(0.3, -1.0)];
        let nb = super::super::matrix::norm(&raw);
        let b: Vec<Complex64> = raw.iter().map(|x| x / nb).collect();
        let c = ComplexMatrix::from_fn(2, 3, |i, j| a[i] * b[j].conj());
        let s = svd_thin(&c).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-14);
        assert!(s.singular_values[1].abs() < 1e-7);
        // First right singular vector is the conjugate of row 0 of V^H.
        let v0: Vec<Complex64> = (0..3).map(|j| s.right_vectors_h[(0, j)].conj()).collect();
        let overlap = super::super::matrix::dot_conj(&b, &v0).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
        assert!(row_orthonormality_error(&s.right_vectors_h) < 1e-12);
    }

    #[test]
    fn wide_and_tall_inputs_reconstruct() {
        for (k, q, seed) in [(4, 7, 1), (7, 4, 2), (1, 9, 3), (9, 1, 4), (30, 500, 5)] {
            let c = random(k, q, seed);
            let s = svd_thin(&c).unwrap();
            assert_eq!(s.rank(), k.min(q));
            assert!(rel_recon_error(&c, &s) < 1e-12, "{k}x{q}");
            assert!(row_orthonormality_error(&s.right_vectors_h) < 1e-10, "{k}x{q}");
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.singular_values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn rank_deficient_input_still_gets_orthonormal_rows() {
        // Three identical rows: rank one.
        let base = random(1, 6, 9);
        let c = ComplexMatrix::from_fn(3, 6, |_, j| base[(0, j)]);
        let s = svd_thin(&c).unwrap();
        assert!(rel_recon_error(&c, &s) < 1e-12);
        assert!(row_orthonormality_error(&s.right_vectors_h) < 1e-10);
        assert!(s.singular_values[1] < 1e-7 * s.singular_values[0]);
    }

    #[test]
    fn zero_matrix_is_completed() {
        let c = ComplexMatrix::zeros(2, 4);
        let s = svd_thin(&c).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);
        assert!(row_orthonormality_error(&s.right_vectors_h) < 1e-14);
    }

    #[test]
    fn leading_matches_full() {
        let c = random(6, 40, 11);
        let full = svd_thin(&c).unwrap();
        let lead = svd_leading(&c, 2).unwrap();
        assert_eq!(lead.rank(), 2);
        for i in 0..2 {
            assert!((full.singular_values[i] - lead.singular_values[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut c = random(2, 3, 1);
        c[(1, 2)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(matches!(svd_thin(&c), Err(Error::NonFinite(_))));
    }

    #[test]
    fn gram_is_deterministic_across_chunking() {
        let c = random(5, 3 * COLUMN_CHUNK + 17, 4);
        let g = gram_rows(&c);
        let direct = c.matmul(&c.conj_transpose()).unwrap();
        assert!(g.sub(&direct).unwrap().frobenius_norm() < 1e-10 * direct.frobenius_norm());
    }
}
