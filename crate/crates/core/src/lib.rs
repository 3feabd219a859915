//! Executable model of the noncommutative torus `A(Λ;σ)`, the gerby Dolbeault
//! algebra of a complex torus with constant B-field, and the deformed Poincaré
//! bimodules between them.
//!
//! Exact algebra (twisted group algebra, exterior algebra, polynomial-Gaussian
//! oscillator calculus, finite curved DGAs) lives next to grid discretisations
//! of the Z-connections, their Laplacians and the integral pairings.
//!
//! The crate is `no_std` + `alloc`; enable the `std` feature for `std::error::Error`
//! impls on hosted targets.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod connections;
pub mod dg;
pub mod error;
pub mod exterior;
pub mod field;
pub mod math;
pub mod nc_algebra;
pub mod pairings;
pub mod polygauss;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use math::C64;
