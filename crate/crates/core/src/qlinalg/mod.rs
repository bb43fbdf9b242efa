//! Dense quaternion matrices and their singular value decomposition.

mod matrix;
mod svd;

pub use matrix::{hermitian_transpose, inner, matmul, row_times, vector_norm, QuaternionMatrix};
pub use svd::{complex_adjoint, qsvd, truncate, QSvdResult};
