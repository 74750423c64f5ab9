//! Toeplitz determinants with Fisher–Hartwig singularities and a one-cut
//! regular potential: exact finite-n evaluation, the large-n asymptotic
//! constants, and statistics of the associated point process on the circle.

pub mod asymptotics;
pub mod error;
pub mod io;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod symbol;
pub mod toeplitz;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
