//! Complex linear-algebra kernels shared by every other module.

pub mod dft;
pub mod eigen;
pub mod lstsq;
pub mod matrix;
pub mod svd;

pub use dft::{dft_1d, pad_pow2, plan, Direction};
pub use eigen::{hermitian_eigen, HermitianEigen};
pub use lstsq::{solve_ls_projection, GramProjector, Projection, ProjectionSide};
pub use matrix::{dot_conj, norm, reshape, vectorize, ComplexMatrix};
pub use svd::{gram_rows, svd_leading, svd_thin, GramSpectrum, SvdResult};
