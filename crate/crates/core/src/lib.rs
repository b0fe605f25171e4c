//! Quadratic complex points of real 4-manifolds in complex 3-space.
//!
//! The crate classifies coefficient pairs (A, B) of the local model
//! `w = z̄ᵀAz + Re(zᵀBz)` by the sign of a 4×4 block determinant, reduces them
//! to normal forms under h-congruence, builds certified homotopies to the two
//! model points, checks the radial isotopy construction for new complex points,
//! and verifies Levi-form positivity of the model neighbourhood functions.

pub mod canon;
pub mod cli;
pub mod error;
pub mod homotopy;
pub mod json;
pub mod kernel;
pub mod levi;
pub mod pairs;
pub mod selftest;
pub mod surface;

pub use error::{Error, NonGenericReason, Result};
pub use kernel::{Mat2, Mat3, Mat4, C64};
pub use pairs::{act, det4, sign_class, GroupElement, MatrixPair, Sign, SignClass};
