//! Dense reference computations shared by the integration targets.

use crap_core::clutter::ClutterSnapshots;
use crap_core::numerics::ComplexMatrix;
use crap_core::scene::CsiFrame;
use crap_core::Complex64;
use nalgebra::DMatrix;

pub type CMat = DMatrix<Complex64>;

pub fn to_na(m: &ComplexMatrix) -> CMat {
    CMat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// `I - A (A^H A)^{-1} A^H` for a full-column-rank `A`.
pub fn complement_projector(a: &CMat) -> CMat {
    let gram = a.adjoint() * a;
    let inv = gram.try_inverse().expect("oracle Gram matrix is invertible");
    CMat::identity(a.nrows(), a.nrows()) - a * inv * a.adjoint()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Expected CRAP output: project `vec(h)` off the leading `order` left singular
/// vectors of the matrix whose columns are the vectorized snapshots.
pub fn crap_oracle(snaps: &ClutterSnapshots, order: usize, frame: &CsiFrame) -> CMat {
    let a = to_na(&snaps.matrix().transpose());
    let svd = a.clone().svd(true, false);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = svd.u.expect("left vectors requested");
    let basis = CMat::from_fn(a.nrows(), order, |i, j| u[(i, idx[j])]);
    let q = frame.h.len();
    complement_projector(&basis) * CMat::from_column_slice(q, 1, frame.h.as_slice())
}

/// Expected ECA-C output as an `N x M` matrix: each subcarrier's slow-time vector is
/// projected off the span of the snapshots' slow-time vectors on that subcarrier.
pub fn eca_c_oracle(snaps: &ClutterSnapshots, frame: &CsiFrame) -> CMat {
    let (n, m, k) = (snaps.n_subcarriers(), snaps.n_symbols(), snaps.k());
    let mut out = CMat::zeros(n, m);
    for row in 0..n {
        let a = CMat::from_fn(m, k, |l, s| snaps.entry(s, row, l));
        let x = CMat::from_fn(m, 1, |l, _| frame.h[(row, l)]);
        let y = complement_projector(&a) * x;
        for l in 0..m {
            out[(row, l)] = y[l];
        }
    }
    out
}

/// Expected ECA-S output: each symbol's frequency vector projected off the span of
/// the snapshots' frequency vectors for that symbol.
pub fn eca_s_oracle(snaps: &ClutterSnapshots, frame: &CsiFrame) -> CMat {
    let (n, m, k) = (snaps.n_subcarriers(), snaps.n_symbols(), snaps.k());
    let mut out = CMat::zeros(n, m);
    for col in 0..m {
        let a = CMat::from_fn(n, k, |r, s| snaps.entry(s, r, col));
        let x = CMat::from_fn(n, 1, |r, _| frame.h[(r, col)]);
        let y = complement_projector(&a) * x;
        for r in 0..n {
            out[(r, col)] = y[r];
        }
    }
    out
}
