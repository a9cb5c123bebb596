//! # nslab-core
//!
//! Allocation-only (`no_std` + `alloc`) numerical kernels for the incompressible
//! Navier-Stokes equations on the periodic torus `(R/2πZ)^d`, `d ∈ {2, 3}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`fft`], [`grid`], [`field`]: Fourier storage of real, mean-free vector fields.
//! * [`ops`] and [`norms`]: Leray projection, heat semiflow, horizontal averaging,
//!   dealiased products and the usual Lebesgue/Sobolev norms.
//! * [`lp`]: Littlewood-Paley blocks, dyadic and heat-flow Besov norms and the
//!   time-weighted `X_λ` norm.
//! * [`solver`]: integrating-factor RK4 for the 3D system, the three-component 2D
//!   system with forcing, and the perturbed system around a reference flow.
//! * [`decomposition`]: the split `u = u_F + u_2D + R` and a Duhamel/Picard solver.
//! * [`conditions`]: the oscillating large-data example and its hypothesis report.
//!
//! Nothing here performs IO; file formats and the CLI live in the `nslab` crate.
#![no_std]

extern crate alloc;

pub mod conditions;
pub mod decomposition;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod lp;
pub mod norms;
pub mod ops;
pub mod physical;
pub mod solver;
pub mod sum;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::TorusGrid;
pub use num_complex::Complex64;
pub use trajectory::{Interpolation, TimeSampledField};
