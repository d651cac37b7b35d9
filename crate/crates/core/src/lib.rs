//! Fourier analysis of probability measures on the torus, SU(2) and SO(3).
//!
//! * [`dual`]: highest weights, dimensions, Casimir values.
//! * [`groups`]: elements, characters, representation matrices, Haar
//!   sampling and class-function quadrature.
//! * [`spectra`]: Fourier coefficients, synthesis, Plancherel, convolution.
//! * [`measures`]: central measure families and their samplers.
//! * [`diagnostics`]: square-integrability, smoothness and super-smoothness
//!   tests read off the coefficient decay.
//! * [`deconv`]: spectral-cutoff deconvolution density estimation.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is
//! enabled; see [`exec::Exec`].

pub mod deconv;
pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod exec;
pub mod groups;
pub mod measures;
pub mod quadrature;
pub mod spectra;
pub mod stats;

pub use error::{NcfaError, Result};

/// Library version, recorded in CLI run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
