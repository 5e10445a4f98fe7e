//! Exact algebra over finite chain rings, harmonic analysis on finite modules,
//! and a Monte Carlo harness for cokernels of random matrices.

pub mod equidist;
pub mod error;
pub mod matrix;
pub mod measures;
pub mod modules;
pub mod montecarlo;
pub mod ring;
pub mod theory_dist;

pub use error::{Error, Result};
pub use ring::{Ideal, Ring, RingElem, RingKind, RingSpec};
