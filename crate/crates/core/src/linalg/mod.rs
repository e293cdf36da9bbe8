//! Self-contained dense linear algebra kernels used by the solvers and
//! the stability analysis.

pub mod dd;
pub mod eigen;
pub mod lu;

pub use dd::DoubleDouble;
pub use eigen::{eigenvalues, max_real_part, Scalar};
pub use lu::Lu;
