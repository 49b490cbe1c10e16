//! Dense numerical kernels: matrices, SVD, pseudoinverse, projectors,
//! numeric rank and nonnegative least squares, all under one
//! [`TolerancePolicy`].

mod matrix;
mod nnls;
mod policy;
mod svd;

pub use matrix::{axpy, dot, norm2, normalized, sub_vec, DenseMatrix};
pub use nnls::{nnls, NnlsSolution};
pub use policy::TolerancePolicy;
pub use svd::{
    null_space_basis, numeric_rank, orthogonal_complement, penrose_residuals, pinv, projector_range,
    projector_rowspace, svd, SvdFactors,
};
