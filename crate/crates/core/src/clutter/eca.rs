//! Extensive cancellation baselines: per-subcarrier (time-domain) and per-symbol
//! (frequency-domain) projection onto the raw clutter snapshots.

use rayon::prelude::*;

use super::snapshots::ClutterSnapshots;
use crate::error::Result;
use crate::numerics::{ComplexMatrix, GramProjector, ProjectionSide};
use crate::scene::CsiFrame;

/// Per-subcarrier canceller. Row `n` of a frame is projected off the span of row `n`
/// of every snapshot.
#[derive(Debug, Clone)]
pub struct EcaC {
    n_subcarriers: usize,
    n_symbols: usize,
    projectors: Vec<GramProjector>,
}

impl EcaC {
    pub fn new(snapshots: &ClutterSnapshots) -> Result<Self> {
        let (n, m, k) = (snapshots.n_subcarriers(), snapshots.n_symbols(), snapshots.k());
        let projectors = (0..n)
            .into_par_iter()
            .map(|row| {
                let block = ComplexMatrix::from_fn(k, m, |kk, mm| snapshots.entry(kk, row, mm));
                GramProjector::new(&block, ProjectionSide::RowSpace)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_subcarriers: n,
            n_symbols: m,
            projectors,
        })
    }

    /// Number of subcarriers whose Gram matrix needed diagonal loading.
    pub fn regularized_count(&self) -> usize {
        self.projectors.iter().filter(|p| p.is_regularized()).count()
    }

    pub fn remove(&self, frame: &CsiFrame) -> Result<CsiFrame> {
        check(frame, self.n_subcarriers, self.n_symbols)?;
        let rows = self
            .projectors
            .par_iter()
            .enumerate()
            .map(|(n, p)| p.remove(&frame.h.row(n)))
            .collect::<Result<Vec<_>>>()?;
        let mut h = ComplexMatrix::zeros(self.n_subcarriers, self.n_symbols);
        for (n, row) in rows.iter().enumerate() {
            h.set_row(n, row);
        }
        Ok(frame.with_matrix(h))
    }
}

/// Per-symbol canceller. Column `m` of a frame is projected off the span of column `m`
/// of every snapshot.
#[derive(Debug, Clone)]
pub struct EcaS {
    n_subcarriers: usize,
    n_symbols: usize,
    projectors: Vec<GramProjector>,
}

impl EcaS {
    pub fn new(snapshots: &ClutterSnapshots) -> Result<Self> {
        let (n, m, k) = (snapshots.n_subcarriers(), snapshots.n_symbols(), snapshots.k());
        let projectors = (0..m)
            .into_par_iter()
            .map(|col| {
                let block = ComplexMatrix::from_fn(n, k, |nn, kk| snapshots.entry(kk, nn, col));
                GramProjector::new(&block, ProjectionSide::ColumnSpace)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_subcarriers: n,
            n_symbols: m,
            projectors,
        })
    }

    pub fn regularized_count(&self) -> usize {
        self.projectors.iter().filter(|p| p.is_regularized()).count()
    }

    pub fn remove(&self, frame: &CsiFrame) -> Result<CsiFrame> {
        check(frame, self.n_subcarriers, self.n_symbols)?;
        let cols = self
            .projectors
            .par_iter()
            .enumerate()
            .map(|(m, p)| p.remove(frame.h.column(m)))
            .collect::<Result<Vec<_>>>()?;
        let mut h = ComplexMatrix::zeros(self.n_subcarriers, self.n_symbols);
        for (m, col) in cols.iter().enumerate() {
            h.column_mut(m).copy_from_slice(col);
        }
        Ok(frame.with_matrix(h))
    }
}

fn check(frame: &CsiFrame, n: usize, m: usize) -> Result<()> {
    if frame.h.rows() != n || frame.h.cols() != m {
        return Err(crate::Error::dims(format!("{n}x{m}"), format!("{}x{}", frame.h.rows(), frame.h.cols())));
    }
    Ok(())
}

/// One-shot per-subcarrier removal. Build an [`EcaC`] instead when many frames share
/// the same snapshots.
pub fn eca_c_remove(snapshots: &ClutterSnapshots, frame: &CsiFrame) -> Result<CsiFrame> {
    snapshots.check_frame(&frame.h)?;
    EcaC::new(snapshots)?.remove(frame)
}

/// One-shot per-symbol removal.
pub fn eca_s_remove(snapshots: &ClutterSnapshots, frame: &CsiFrame) -> Result<CsiFrame> {
    snapshots.check_frame(&frame.h)?;
    EcaS::new(snapshots)?.remove(frame)
}
