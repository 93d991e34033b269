//! Deformation quantization of the split solvable symplectic symmetric spaces
//! `M = R x R^{2n} x R` in the global chart `(a, v, l)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: transvection and solvable Lie algebras, symmetric-triple checks,
//!   invariant bivectors and invariant second cohomology.
//! * [`geometry`]: points, group law, symmetries, Loos connection, kernel phases
//!   and amplitudes.
//! * [`cochains`]: multi-point functions with the `delta` / `delta_op` differentials.
//! * [`transforms`]: grids, the partial Fourier transform in `l`, the twisting map
//!   and the transport operators `T` / `T^{-1}`.
//! * [`moyal`]: the flat Weyl product on grids and its formal power-series twin.
//! * [`multipliers`]: the multiplier family `tau` (tracial, Borel-realized).
//! * [`products`]: the curved star products by the transport route and the
//!   oscillatory-kernel route, inner products and trace checks.
//! * [`verify`]: named verification suites producing [`report::Report`]s.

pub mod algebra;
pub mod cochains;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod moyal;
pub mod multipliers;
pub mod products;
pub mod report;
pub mod rng;
pub mod transforms;
pub mod verify;

pub use algebra::SpaceParams;
pub use error::{Error, Result};
pub use geometry::{Point, Triangle};
pub use num_complex::Complex64;
pub use report::{Check, Report};
pub use transforms::{GridFunction, GridSpec, Space};
