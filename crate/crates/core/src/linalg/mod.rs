//! Dense complex linear algebra: the substrate every other module builds on.

mod eigen;
mod hermitian;
mod kron;
mod lu;
mod matrix;
mod qr;
mod svd;

pub use eigen::{eig, eig_right, generalized_eig, hessenberg, norm2_estimate, schur, EigenDecomposition, Schur};
pub(crate) use eigen::left_from_right;
pub use hermitian::{cholesky, congruence_inverse, hermitian_eig, solve_lower};
pub use kron::{kron, kron_all, kron_vec};
pub use lu::{inverse, solve, Lu};
pub use matrix::{dot, vec_norm, Matrix};
pub use qr::{householder_qr, orthonormal_basis};
pub use svd::{cond2, norm2, normalize_columns, singular_values, subspace_distance, svd, svd_min, Svd};
