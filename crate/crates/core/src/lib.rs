//! Semi-analytic spectral laboratory for the linear MGT equation with
//! exponential memory and the nonlinear JMGT equations on a periodic box.
//!
//! The linear pipeline is radial and exact per Fourier mode: quartic
//! characteristic roots, Vandermonde synthesis, closed-form memory
//! auxiliaries, and quadrature-based Sobolev norms for arbitrary real
//! dimension. The nonlinear pipeline is pseudospectral with two
//! independent integrators. Everything downstream (rate fits, envelope
//! calibrations, inviscid-limit sweeps) builds on these two.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values;
// indexed loops walk several parallel arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod energy;
pub mod error;
pub mod fit;
pub mod grid;
pub mod jmgt;
pub mod mode;
pub mod norms;
pub mod params;
pub mod profile;
pub mod quartic;
pub mod torus;

pub use error::{MgtError, Result};
pub use params::{FrequencyZones, MemoryKernel, PhysParams, Zone};
