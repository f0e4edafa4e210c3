//! Quantized symplectic cat maps modulo prime powers.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`]: exact residue arithmetic, multiplicative orders, Hensel lifting.
//! * [`symplectic`]: validation of the classical map, characteristic
//!   polynomial, good primes, matrix orders and orbit matrices.
//! * [`quantization`]: Heisenberg operators, observables and the propagator.
//! * [`spectra`]: eigendecomposition of the propagator and the discrepancy.
//! * [`verify`]: congruence counts, exponential sums, moment identities and
//!   the rate constants.
//!
//! Interchangeable algorithms (Hermitian eigensolvers, congruence counters)
//! are registered by name in a [`registry::Registry`].

pub mod arith;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod linalg;
pub mod poly;
pub mod quantization;
pub mod registry;
pub mod spectra;
pub mod symplectic;
pub mod verify;

pub use error::{CatError, Result};
