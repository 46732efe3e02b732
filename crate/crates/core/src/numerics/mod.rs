//! Dense matrices, the Adam update and a reproducible random stream.

mod adam;
mod matrix;
mod rng;

pub use adam::{adam_update, AdamState, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS};
pub use matrix::Matrix;
pub use rng::RngStream;

/// Plain function form of [`Matrix::matmul`].
pub fn matmul(a: &Matrix, b: &Matrix) -> crate::Result<Matrix> {
    a.matmul(b)
}
