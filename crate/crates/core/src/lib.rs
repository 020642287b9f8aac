//! Exact computation of first resonance varieties of exterior-algebra
//! quotients `A = E/I` with `I` generated in degree 2, together with a
//! verification harness for the decomposition of the resonance variety of
//! the pure symmetric automorphism groups into 2- and 3-dimensional linear
//! components.

pub mod cli;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod presentation;
pub mod replay;
pub mod resonance;
pub mod sampling;
pub mod theorem;

pub use error::{Error, Result};
