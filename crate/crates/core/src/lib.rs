//! Fractal interpolation functions on the product of two Sierpiński gaskets.
//!
//! The crate builds the lifted iterated function system
//! `W_{ωη}(t, s, x) = (L_ω t, K_η s, α_{ωη}(t, s) x + h_{ωη}(t, s))` from data on
//! the product vertex set, evaluates its attractor function exactly at dyadic
//! vertices and approximately (with a certified bound) anywhere else, and
//! analyses its Hölder regularity and box-counting dimension.

pub mod analysis;
pub mod checks;
pub mod error;
pub mod evaluator;
pub mod export;
pub mod gasket;
pub mod model;
pub mod rb;
pub mod reference;
pub mod sampling;
pub mod vertex_grid;

pub use error::{FifError, Result};
