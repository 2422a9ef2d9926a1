//! Numerical toolkit for multipartite convex splitting, sandwiched Rényi
//! information, quantum state splitting and broadcast channel simulation
//! bounds at small Hilbert-space dimension.
//!
//! All logarithms are base 2; information quantities are in bits.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod channel;
pub mod convex_split;
pub mod error;
pub mod operator;
pub mod purification;
pub mod random;
pub mod renyi;
pub mod space;
pub mod spectral;
pub mod state_splitting;

pub use error::{Error, Result};
pub use operator::{partial_trace, tensor, DensityOperator, Ket, Mat, Operator, Vector, C64};
pub use purification::{purify, uhlmann_isometry, Isometry};
pub use space::{Space, Subset, Subsystems};
pub use channel::{InputOptions, QuantumChannel, RateVector, RegionReport};
pub use renyi::{MinimizerOptions, RenyiOrder};
