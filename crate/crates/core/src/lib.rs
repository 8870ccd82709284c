//! Multi-photon interferometric lithography.
//!
//! Deposition rates of entangled photon-number states on an `N`-photon
//! absorbing substrate, checked against a brute-force Fock-space oracle, and
//! synthesis of target exposure patterns in one and two dimensions.
//!
//! - [`fock`]: sparse Fock vectors, ladder operators, the moment oracle.
//! - [`states`]: proto-states and their superpositions.
//! - [`deposition`]: closed-form rates and matrix elements.
//! - [`synth`]: targets, Fourier synthesis, distances, fitting objectives,
//!   and the classical two-beam baseline.
//! - [`optimize`]: seeded, thread-count-independent differential evolution.
//! - [`fit`]: superposition-method fits that tie the above together.
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the optimizer and
//! the command-line front end use.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deposition;
pub mod error;
pub mod fit;
pub mod fock;
pub mod optimize;
pub mod scalar;
pub mod states;
pub mod synth;
pub mod verify;

pub use error::{Error, Result, Violation};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type FockVector64 = fock::FockVector<f64>;
pub type ProtoState1D64 = states::ProtoState1D<f64>;
pub type ProtoState2D64 = states::ProtoState2D<f64>;
pub type SuperpositionFixedN64 = states::SuperpositionFixedN<f64>;
pub type SuperpositionFixedM64 = states::SuperpositionFixedM<f64>;
pub type Superposition2D64 = states::Superposition2D<f64>;
pub type FourierProgram64 = synth::fourier::FourierProgram<f64>;
pub type FockVector32 = fock::FockVector<f32>;
pub type SuperpositionFixedN32 = states::SuperpositionFixedN<f32>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Normalization convention recorded alongside every exported result.
pub const NORMALIZATION: &str =
    "Delta = <(e^dag)^N e^N>/N!, e = (a+b)/sqrt(2) in 1D and (a+b+c+d)/2 in 2D; phi = k x / 2";
