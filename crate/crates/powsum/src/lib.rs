//! Separable-series evaluation of |r_1 + ... + r_N|^{-nu} for vectors in R^M,
//! together with the verified special-function and quadrature machinery the
//! series rest on.
//!
//! The crate exposes two expansion families over the norms and mutual angles
//! of the summands: a rational expansion in norm ratios (valid when one norm
//! dominates the rest) and an orthogonal-basis expansion valid for all norm
//! configurations. Every supporting identity ships with a numerical check
//! against an independent route; see [`verify`].

pub mod angular;
pub mod error;
pub mod expand;
pub mod numerics;
pub mod radial;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
