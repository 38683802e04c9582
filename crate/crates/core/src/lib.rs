//! Exact-arithmetic engine for Schreier families, Tsirelson-type norms and
//! the tree-coded norming sets `W_α ⊇ W_𝒯`.
//!
//! Every quantity is an exact rational on arbitrary-precision natural
//! indices. Nothing here uses floating point.
//!
//! Module map:
//!
//! * [`vector`]: rationals, sparse vectors, supports, ranges, canonical text.
//! * [`schreier`]: membership, maximality and admissibility for `S_n`.
//! * [`norms`]: the Tsirelson norm and the exact `W_α` norm engine.
//! * [`coding`]: the weight sets `L′ = L_0 ∪ L_1′`, `φ`, comparability and
//!   the persistent coding function.
//! * [`tree`]: special sequences, subtree policies.
//! * [`wt`]: functionals, the `α_c`-average taxonomy and `W_𝒯` certificates.
//! * [`scc`]: basic special convex combinations.
//! * [`analysis`]: composite-object checkers, estimate harness, `α`-index
//!   profile and the separation demo.

pub mod analysis;
pub mod coding;
pub mod error;
pub mod norms;
pub mod scc;
pub mod schreier;
pub mod tree;
pub mod vector;
pub mod wt;

pub use error::{Error, Result};
pub use vector::{Interval, Rational, SparseVector};
