//! Exact algebra for quantization of symmetric pairs g = k + p.
//!
//! Everything except the `graphs` module works over the rationals.

pub mod catalog;
pub mod error;
pub mod freelie;
pub mod graphs;
pub mod hc;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod polarization;
pub mod polyops;
pub mod poly;
pub mod rat;
pub mod starprod;
pub mod trace;
pub mod uea;

pub use error::{Error, Result};
pub use rat::Q;
