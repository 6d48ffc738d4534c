//! Construction and asymptotic analysis of spatially coupled LDPC chains and
//! of ensembles built by joining several chains with bridges.
//!
//! * [`protograph`] builds the base graphs.
//! * [`de_bec`] runs erasure-channel density evolution under flooding and
//!   selective schedules and measures decoding complexity.
//! * [`de_awgn`] runs quantized density evolution for the binary-input
//!   Gaussian channel.
//! * [`distance`] computes the asymptotic weight spectrum and the minimum
//!   distance growth rate.
//! * [`codes`] lifts protographs to parity-check matrices and simulates
//!   peeling decoding.
//!
//! The numerical kernels are generic over [`Real`]; the aliases below fix
//! the scalar type to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// dense linear algebra reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod adjacency;
pub mod codes;
pub mod de_awgn;
pub mod de_bec;
pub mod distance;
pub mod error;
pub mod protograph;
pub mod scalar;
pub mod symmetry;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BecEvolution = de_bec::BecEvolution<f64>;
pub type BecEvolution32 = de_bec::BecEvolution<f32>;
pub type QuantDensity = de_awgn::QuantDensity<f64>;
pub type AwgnEvolution = de_awgn::AwgnEvolution<f64>;
pub type SpectralShape = distance::SpectralShape<f64>;
pub type WeightSpectrum = distance::WeightSpectrum<f64>;
