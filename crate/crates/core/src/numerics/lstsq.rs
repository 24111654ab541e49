//! Orthogonal projections onto the row or column space of a small basis block, solved
//! through a Cholesky factorization of its Gram matrix.

use num_complex::Complex64;

use super::matrix::{dot_conj, ComplexMatrix};
use crate::error::{Error, Result};

/// Gram systems with an estimated condition number above this are diagonally loaded.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Diagonal loading is `LOADING_FACTOR * trace(G) / dim`.
pub const LOADING_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionSide {
    /// Basis vectors are the rows of a `K x D` block; right-hand sides are row vectors.
    RowSpace,
    /// Basis vectors are the columns of a `D x K` block; right-hand sides are columns.
    ColumnSpace,
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // Row-major lower triangle.
    l: Vec<Complex64>,
}

impl Cholesky {
    /// Returns `None` when a pivot is not strictly positive.
    pub fn factor(g: &ComplexMatrix) -> Option<Self> {
        let n = g.rows();
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut d = g[(j, j)].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    /// Lower bound on the 2-norm condition number from the factor's diagonal.
    pub fn condition_estimate(&self) -> f64 {
        let diag = (0..self.n).map(|i| self.l[i * self.n + i].re);
        let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        (hi / lo).powi(2)
    }

    /// Solves `L L^H x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i].conj() * y[k];
            }
            y[i] = s / self.l[i * n + i].re;
        }
        y
    }
}

/// Precomputed projector onto the span of a basis block. Build once, apply to many
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct GramProjector {
    /// Basis vectors stored as the columns of a `D x K` matrix regardless of side.
    basis: ComplexMatrix,
    side: ProjectionSide,
    chol: Cholesky,
    regularized: bool,
}

#[derive(Debug, Clone)]
pub struct Projection {
    /// Weights `w` such that the projection is `w * block` (row space) or `block * w`
    /// (column space).
    pub coefficients: Vec<Complex64>,
    pub projection: Vec<Complex64>,
    pub regularized: bool,
}

impl GramProjector {
    pub fn new(block: &ComplexMatrix, side: ProjectionSide) -> Result<Self> {
        block.ensure_finite("projection basis")?;
        // Row-space basis {rows of B} spans the same space as the columns of B^T;
        // keeping B^H instead lets both cases share the column-space code with the
        // right-hand side conjugated.
        let basis = match side {
            ProjectionSide::ColumnSpace => block.clone(),
            ProjectionSide::RowSpace => block.conj_transpose(),
        };
        let k = basis.cols();
        if k == 0 || basis.rows() == 0 {
            return Err(Error::InvalidInput("empty projection basis".into()));
        }
        let mut gram = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = dot_conj(basis.column(i), basis.column(j));
                gram[(i, j)] = v;
                gram[(j, i)] = v.conj();
            }
        }
        let (chol, regularized) = factor_with_loading(&gram)?;
        Ok(Self {
            basis,
            side,
            chol,
            regularized,
        })
    }

    pub fn is_regularized(&self) -> bool {
        self.regularized
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn project(&self, rhs: &[Complex64]) -> Result<Projection> {
        if rhs.len() != self.basis.rows() {
            return Err(Error::dims(format!("length {}", self.basis.rows()), format!("{}", rhs.len())));
        }
        let x: Vec<Complex64> = match self.side {
            ProjectionSide::ColumnSpace => rhs.to_vec(),
            ProjectionSide::RowSpace => rhs.iter().map(|v| v.conj()).collect(),
        };
        let k = self.basis.cols();
        let bx: Vec<Complex64> = (0..k).map(|i| dot_conj(self.basis.column(i), &x)).collect();
        let w = self.chol.solve(&bx);
        let mut p = vec![Complex64::new(0.0, 0.0); x.len()];
        for (i, wi) in w.iter().enumerate() {
            for (pj, bj) in p.iter_mut().zip(self.basis.column(i)) {
                *pj += bj * wi;
            }
        }
        Ok(match self.side {
            ProjectionSide::ColumnSpace => Projection {
                coefficients: w,
                projection: p,
                regularized: self.regularized,
            },
            ProjectionSide::RowSpace => Projection {
                coefficients: w.iter().map(|v| v.conj()).collect(),
                projection: p.iter().map(|v| v.conj()).collect(),
                regularized: self.regularized,
            },
        })
    }

    /// `rhs` minus its projection.
    pub fn remove(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let p = self.project(rhs)?;
        Ok(rhs.iter().zip(&p.projection).map(|(a, b)| a - b).collect())
    }
}

fn factor_with_loading(gram: &ComplexMatrix) -> Result<(Cholesky, bool)> {
    if let Some(ch) = Cholesky::factor(gram) {
        if ch.condition_estimate() <= CONDITION_LIMIT {
            return Ok((ch, false));
        }
    }
    let k = gram.rows();
    let trace: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
    let eps = LOADING_FACTOR * trace / k as f64;
    if !(eps > 0.0) {
        return Err(Error::Singular("Gram matrix has zero trace".into()));
    }
    let mut loaded = gram.clone();
    for i in 0..k {
        loaded[(i, i)] += eps;
    }
    Cholesky::factor(&loaded)
        .map(|ch| (ch, true))
        .ok_or_else(|| Error::Singular("Gram matrix not positive definite after loading".into()))
}

/// One-shot projection of `rhs` onto the row or column space of `block`.
pub fn solve_ls_projection(block: &ComplexMatrix, rhs: &[Complex64], side: ProjectionSide) -> Result<Projection> {
    GramProjector::new(block, side)?.project(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(r: usize, c: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn in_space_vector_is_fully_removed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random(3, 16, &mut rng);
        // rhs = 0.5 row0 - 2j row2
        let rhs: Vec<Complex64> = (0..16)
            .map(|j| b[(0, j)] * 0.5 + b[(2, j)] * Complex64::new(0.0, -2.0))
            .collect();
        let p = GramProjector::new(&b, ProjectionSide::RowSpace).unwrap();
        let resid = p.remove(&rhs).unwrap();
        assert!(norm(&resid) <= 1e-10 * norm(&rhs));
        let coef = p.project(&rhs).unwrap().coefficients;
        assert!((coef[0] - Complex64::new(0.5, 0.0)).norm() < 1e-10);
        assert!((coef[2] - Complex64::new(0.0, -2.0)).norm() < 1e-10);
    }

    #[test]
    fn orthogonal_vector_is_untouched() {
        // Column space spanned by e0, e1; rhs along e2 + e3.
        let b = ComplexMatrix::from_fn(4, 2, |r, c| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0));
        let rhs = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(-3.0, 0.5),
        ];
        let p = solve_ls_projection(&b, &rhs, ProjectionSide::ColumnSpace).unwrap();
        assert!(p.coefficients.iter().all(|c| c.norm() < 1e-15));
        assert!(!p.regularized);
        let resid: Vec<_> = rhs.iter().zip(&p.projection).map(|(a, b)| a - b).collect();
        assert!(resid.iter().zip(&rhs).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn collinear_basis_engages_loading() {
        let mut b = ComplexMatrix::zeros(2, 5);
        for j in 0..5 {
            b[(0, j)] = Complex64::new(j as f64 + 1.0, 0.0);
            b[(1, j)] = Complex64::new(2.0 * (j as f64 + 1.0), 0.0);
        }
        let p = GramProjector::new(&b, ProjectionSide::RowSpace).unwrap();
        assert!(p.is_regularized());
        let resid = p.remove(&b.row(0)).unwrap();
        assert!(norm(&resid) < 1e-5 * norm(&b.row(0)));
    }

    #[test]
    fn zero_basis_is_singular() {
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(GramProjector::new(&b, ProjectionSide::RowSpace), Err(Error::Singular(_))));
    }

    #[test]
    fn cholesky_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random(6, 4, &mut rng);
        let g = a.conj_transpose().matmul(&a).unwrap();
        let ch = Cholesky::factor(&g).unwrap();
        let x: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b = g.mul_vec(&x).unwrap();
        let got = ch.solve(&b);
        for (u, v) in got.iter().zip(&x) {
            assert!((u - v).norm() < 1e-10);
        }
    }
}
