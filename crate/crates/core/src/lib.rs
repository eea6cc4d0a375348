//! Bipartite entanglement measures and one-sided LOCC simulation, with a
//! harness that checks average monotonicity and strict monotonicity
//! numerically.
//!
//! Conventions used throughout:
//!
//! * Kronecker products are row-major with subsystem A as the left (slow)
//!   factor, so basis index `i * d_b + j` is `|i>_A |j>_B`.
//! * Entropies and relative entropies are in nats. Only the logarithmic
//!   negativity is reported in bits, per its definition.
//! * Randomness always flows through an explicit [`qstate::Rng`]; equal seeds
//!   give bit-identical results, including for parallel sweeps.

pub mod error;
pub mod locc;
pub mod measures;
pub mod qstate;
pub mod ree;
pub mod roof;
pub mod verifier;

pub use error::{Error, Result};
