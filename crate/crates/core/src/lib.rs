//! Harmonic analysis on the Heisenberg group `H^n = C^n × R`.
//!
//! Everything numerical is generic over [`scalar::Real`] (`f32`, `f64`); the
//! `*64` aliases below fix `f64`.

pub mod archive;
pub mod error;
pub mod factorizer;
pub mod foundations;
pub mod fourier;
pub mod grid;
pub mod hermite;
pub mod scalar;
pub mod schrodinger;
pub mod twisted;
pub mod weyl;

pub use error::{Error, Result};
pub use foundations::{Discretization, MultiIndex, TruncationScheme};
pub use scalar::{Real, C, CMatrix};

pub type Complex64 = C<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type OperatorMatrix64 = schrodinger::OperatorMatrix<f64>;
pub type GroupElement64 = schrodinger::GroupElement<f64>;
pub type HermiteBasis64 = hermite::HermiteBasis<f64>;
pub type QuadratureRule64 = foundations::QuadratureRule<f64>;
pub type PhaseSpaceGrid64 = grid::PhaseSpaceGrid<f64>;
pub type Coefficients64 = twisted::Coefficients<f64>;
pub type PhaseSpaceFunction64 = twisted::PhaseSpaceFunction<f64>;
pub type WeylQuadrature64 = weyl::WeylQuadrature<f64>;
pub type HeisenbergFunction64 = fourier::HeisenbergFunction<f64>;
pub type SpectralMeasure64 = fourier::SpectralMeasure<f64>;
pub type HomomorphismSpec64 = factorizer::HomomorphismSpec<f64>;
pub type Decomposition64 = factorizer::Decomposition<f64>;
