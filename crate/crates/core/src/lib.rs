//! Single-photon transport through a coupled-cavity array whose middle `N`
//! cavities each hold a V-type three-level atom.
//!
//! * [`model`]: parameters, renormalized site energy, regimes.
//! * [`scattering`]: closed-form amplitudes via Chebyshev polynomials.
//! * [`lineshape`]: Breit-Wigner, Fano and small-detuning line shapes.
//! * [`oracle`]: brute-force linear-system and transfer-matrix solvers.
//! * [`spectrum`]: sweeps, band edges, half-widths, gap attenuation.
//! * [`cli`]: the command-line front end.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod lineshape;
pub mod model;
pub mod oracle;
pub mod scattering;
pub mod spectrum;

pub use error::{Result, TransportError};
pub use model::{classify, EnergyPoint, ModelParams, Regime};
pub use scattering::{scatter, ScatteringAmplitudes};
