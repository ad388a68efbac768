#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod block;
pub mod boundary;
pub mod builtin;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod poly;
pub mod propagator;
pub mod quadrature;
pub mod resolvent;
pub mod scalar;
pub mod selftest;
pub mod spectral;
pub mod system;
pub mod weyl;

pub use error::{Error, Result};
pub use nalgebra::Complex;
pub use scalar::Real;

/// Double-precision aliases used by the command-line tool and the self-test.
pub type System = system::SymmetricSystem<f64>;
pub type Pair = boundary::BoundaryPair<f64>;
pub type Function = grid::GridFunction<f64>;
pub type Spectral = spectral::SpectralFunction<f64>;
pub type Matrix = scalar::CMat<f64>;
pub type Vector = scalar::CVec<f64>;

/// Single-precision system, for quick low-accuracy runs.
pub type System32 = system::SymmetricSystem<f32>;
