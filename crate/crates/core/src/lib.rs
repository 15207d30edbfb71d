//! Orthogonal decompositions of symmetric-matrix fields on the periodic box.
//!
//! The crate samples fields on `[0, L)^d` (`d` = 2, 3 or 4), works with their
//! Fourier-series coefficients, and provides:
//!
//! * the four-part split of a symmetric field into strain, Hessian,
//!   adjusted-identity and trace-and-divergence-free parts ([`decomp`]),
//!   together with the anti-symmetric and vector Helmholtz splits and a
//!   frame-based reference projector ([`basis`]);
//! * residual checks for the structural identities of the strain space
//!   ([`identities`]);
//! * the max-mid eigenvalue program: sharp bounds, near-maximizers and an
//!   ascent estimator for the open supremum ([`extremal`]);
//! * integrating-factor RK4 integrators for the velocity and matrix-potential
//!   forms of Navier-Stokes ([`ns`]);
//! * a self-describing binary field format ([`io`]).
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod basis;
pub mod decomp;
pub mod error;
pub mod extremal;
mod fft;
pub mod field;
pub mod grid;
pub mod identities;
pub mod io;
pub mod ns;
pub mod ops;
pub mod random;
pub mod scalar;
pub mod small;

pub use error::{Error, Result};
pub use field::{
    AntiSymMatrix, Field, Kind, Matrix, Rep, Scalar, SymMatrix, Vector,
};
pub use grid::Grid;
pub use rustfft::num_complex::Complex;
pub use scalar::Real;

pub type Grid64 = grid::Grid<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type SymMatrixField64 = field::SymMatrixField<f64>;
pub type AntiSymMatrixField64 = field::AntiSymMatrixField<f64>;
pub type MatrixField64 = field::MatrixField<f64>;
pub type DecompositionResult64 = decomp::DecompositionResult<f64>;
pub type MaxMidField64 = extremal::MaxMidField<f64>;
pub type EigenField64 = extremal::EigenField<f64>;
pub type SupremumEstimate64 = extremal::SupremumEstimate<f64>;
pub type Trajectory64<K> = ns::Trajectory<f64, K>;

pub type Grid32 = grid::Grid<f32>;
pub type ScalarField32 = field::ScalarField<f32>;
pub type VectorField32 = field::VectorField<f32>;
pub type SymMatrixField32 = field::SymMatrixField<f32>;
