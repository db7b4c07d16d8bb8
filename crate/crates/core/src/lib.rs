//! Numerics for isotropic unimodal Lévy processes: transition densities,
//! resolvents and Green functions recovered from the Lévy–Khintchine exponent,
//! concentration functions of the Lévy measure, and diagnostics for the
//! asymptotic formulas and two-sided estimates these objects satisfy.

pub mod bounds;
pub mod error;
pub mod kernels;
pub mod levy_measure;
pub mod quad;
pub mod special_fn;
pub mod symbols;
pub mod transforms;

pub use error::{Error, Result};
pub use quad::QuadratureResult;
