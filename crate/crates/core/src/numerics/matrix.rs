use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix stored column-major: entry `(r, c)` lives at `c * rows + r`.
///
/// Column-major storage makes [`vectorize`] a plain copy of the buffer, which is the
/// layout clutter calibrations are persisted in.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::dims(
                format!("{rows}x{cols} = {} entries", rows.saturating_mul(cols)),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Ok(Self::from_fn(n_rows, n_cols, |r, c| rows[r][c]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn row(&self, r: usize) -> Vec<Complex64> {
        (0..self.cols).map(|c| self[(r, c)]).collect()
    }

    pub fn set_row(&mut self, r: usize, values: &[Complex64]) {
        debug_assert_eq!(values.len(), self.cols);
        for (c, v) in values.iter().enumerate() {
            self[(r, c)] = *v;
        }
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims(
                format!("lhs cols == rhs rows ({})", self.cols),
                format!("rhs rows {}", rhs.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.column(j).iter().enumerate() {
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::dims(format!("vector of length {}", self.cols), format!("{}", x.len())));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (c, &xc) in x.iter().enumerate() {
            for (yi, &a) in y.iter_mut().zip(self.column(c)) {
                *yi += a * xc;
            }
        }
        Ok(y)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub(crate) fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::dims(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

/// Flattens an `N x M` matrix into a length `N*M` vector, entry `(n, m)` at `m*N + n`.
pub fn vectorize(h: &ComplexMatrix) -> Vec<Complex64> {
    h.data.clone()
}

/// Exact inverse of [`vectorize`].
pub fn reshape(v: Vec<Complex64>, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::new(rows, cols, v)
}

/// Hermitian inner product `sum conj(a_i) b_i`.
#[inline]
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
