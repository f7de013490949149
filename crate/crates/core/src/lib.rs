//! Correlation-based lower bounds on the circuit depth of mixed states.
//!
//! The library evaluates `I(A′:B) − I(A′:E)` for local channels on A,
//! Holevo-type quantities after weak or projective measurements, their
//! second-order expansions, and the resulting depth bounds, with dense
//! (exact diagonalization), free-fermion and CFT backends.

// `!(x > 0.0)` rejects NaN as well; that is the intent throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cft;
pub mod criterion;
pub mod ed;
pub mod entropy;
pub mod error;
pub mod freefermion;
pub mod graph;
pub mod linalg;
pub mod measurement;
pub mod perturbative;
pub mod purification;
pub mod random;
pub mod state;

pub use error::{Error, Result};
pub use linalg::C64;
