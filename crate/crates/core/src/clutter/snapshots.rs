use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scene::CsiFrame;

/// How a frame is flattened into a vector. Only column-major exists today; the tag is
/// persisted so stored calibrations stay unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Entry `(n, m)` at index `m*N + n`.
    ColumnMajor,
}

impl Convention {
    pub fn tag(self) -> u8 {
        match self {
            Convention::ColumnMajor => 0,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Convention::ColumnMajor),
            other => Err(Error::Format(format!("unknown vectorization convention tag {other}"))),
        }
    }
}

/// `K` clutter-only acquisitions stacked as the rows of a `K x Q` matrix.
///
/// Frames are not kept separately; [`ClutterSnapshots::frame`] rebuilds one on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterSnapshots {
    n_subcarriers: usize,
    n_symbols: usize,
    stacked: ComplexMatrix,
}

impl ClutterSnapshots {
    /// Stacks frames; all must share the same dimensions.
    pub fn stack(frames: &[CsiFrame]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidInput("need at least one clutter snapshot".into()))?;
        let (n, m) = (first.h.rows(), first.h.cols());
        Self::from_fn(n, m, frames.len(), |k| {
            let f = &frames[k];
            if f.h.rows() != n || f.h.cols() != m {
                return Err(Error::dims(format!("{n}x{m}"), format!("{}x{} (snapshot {k})", f.h.rows(), f.h.cols())));
            }
            Ok(f.h.clone())
        })
    }

    /// Stacks `k` frames produced one at a time, so only the stacked matrix is resident.
    pub fn from_fn(
        n_subcarriers: usize,
        n_symbols: usize,
        k: usize,
        mut frame: impl FnMut(usize) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("need at least one clutter snapshot".into()));
        }
        let q = n_subcarriers * n_symbols;
        let mut stacked = ComplexMatrix::zeros(k, q);
        for idx in 0..k {
            let h = frame(idx)?;
            if h.rows() != n_subcarriers || h.cols() != n_symbols {
                return Err(Error::dims(
                    format!("{n_subcarriers}x{n_symbols}"),
                    format!("{}x{} (snapshot {idx})", h.rows(), h.cols()),
                ));
            }
            let data = stacked.as_mut_slice();
            for (qi, v) in h.as_slice().iter().enumerate() {
                data[qi * k + idx] = *v;
            }
        }
        Ok(Self { n_subcarriers, n_symbols, stacked })
    }

    pub fn from_stacked(n_subcarriers: usize, n_symbols: usize, stacked: ComplexMatrix) -> Result<Self> {
        if stacked.cols() != n_subcarriers * n_symbols || stacked.rows() == 0 {
            return Err(Error::dims(
                format!("K x {}", n_subcarriers * n_symbols),
                format!("{}x{}", stacked.rows(), stacked.cols()),
            ));
        }
        Ok(Self { n_subcarriers, n_symbols, stacked })
    }

    pub fn k(&self) -> usize {
        self.stacked.rows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn q(&self) -> usize {
        self.stacked.cols()
    }

    /// The stacked `K x Q` matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.stacked
    }

    /// Vectorized snapshot `k` (row `k` of the stacked matrix).
    pub fn row(&self, k: usize) -> Vec<Complex64> {
        self.stacked.row(k)
    }

    /// Snapshot `k` as an `N x M` matrix.
    pub fn frame(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::new(self.n_subcarriers, self.n_symbols, self.row(k)).expect("row length is N*M")
    }

    /// Entry `(n, m)` of snapshot `k`.
    #[inline]
    pub fn entry(&self, k: usize, n: usize, m: usize) -> Complex64 {
        self.stacked[(k, m * self.n_subcarriers + n)]
    }

    /// Calls `f` with each snapshot's payload in file order: snapshot-major, each
    /// snapshot column-major.
    pub fn for_each_snapshot_major(&self, mut f: impl FnMut(Complex64)) {
        let k = self.k();
        for idx in 0..k {
            for v in self.stacked.as_slice().iter().skip(idx).step_by(k) {
                f(*v);
            }
        }
    }

    /// SHA-256 over the little-endian snapshot payload.
    pub fn hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        let mut buf = Vec::with_capacity(16 * 4096);
        self.for_each_snapshot_major(|v| {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
            if buf.len() >= 16 * 4096 {
                hasher.update(&buf);
                buf.clear();
            }
        });
        hasher.update(&buf);
        hasher.finalize().into()
    }

    pub(crate) fn check_frame(&self, h: &ComplexMatrix) -> Result<()> {
        if h.rows() != self.n_subcarriers || h.cols() != self.n_symbols {
            return Err(Error::dims(
                format!("{}x{}", self.n_subcarriers, self.n_symbols),
                format!("{}x{}", h.rows(), h.cols()),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::vectorize;
    use crate::scene::RfConfig;

    fn frame(n: usize, m: usize, seed: f64) -> CsiFrame {
        let cfg = RfConfig::with_frame(n, m, 27.4e9, 120e3, 1e-3);
        let h = ComplexMatrix::from_fn(n, m, |r, c| Complex64::new(seed + r as f64, c as f64 - seed));
        CsiFrame::new(cfg, h).unwrap()
    }

    #[test]
    fn single_all_ones_frame() {
        let cfg = RfConfig::with_frame(2, 2, 27.4e9, 120e3, 1e-3);
        let f = CsiFrame::new(cfg, ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0))).unwrap();
        let s = ClutterSnapshots::stack(&[f]).unwrap();
        assert_eq!(s.matrix().rows(), 1);
        assert_eq!(s.row(0), vec![Complex64::new(1.0, 0.0); 4]);
    }

    #[test]
    fn rows_are_vectorized_frames() {
        let frames: Vec<_> = (0..3).map(|i| frame(3, 4, i as f64 * 0.5)).collect();
        let s = ClutterSnapshots::stack(&frames).unwrap();
        for (k, f) in frames.iter().enumerate() {
            assert_eq!(s.row(k), vectorize(&f.h));
            assert_eq!(s.frame(k), f.h);
        }
        assert_eq!(s.entry(2, 1, 3), frames[2].h[(1, 3)]);
    }

    #[test]
    fn mismatched_frames_are_rejected() {
        let frames = vec![frame(3, 4, 0.0), frame(4, 3, 1.0)];
        assert!(matches!(ClutterSnapshots::stack(&frames), Err(Error::DimensionMismatch { .. })));
        assert!(ClutterSnapshots::stack(&[]).is_err());
    }

    #[test]
    fn hash_depends_on_content() {
        let a = ClutterSnapshots::stack(&[frame(2, 2, 0.0), frame(2, 2, 1.0)]).unwrap();
        let b = ClutterSnapshots::stack(&[frame(2, 2, 1.0), frame(2, 2, 0.0)]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }
}
