//! Find-or-refute engines for stable sets in `{T, K_{k+1}}`-free graphs.
//!
//! The crate is organised around three layers:
//!
//! * [`graph`], [`tree`] — the immutable bitset graph, vertex-subset algebra,
//!   elementary extraction routines (greedy / Turán / Ramsey / degeneracy),
//!   and tree patterns (brooms, multibrooms, dfs-enumerations).
//! * [`sparsify`], [`multibroom`], [`fraccolour`] — the constructive engines:
//!   iterated sparsification for general trees, the weighted layered search
//!   for multibrooms, and an explicit fractional-colouring builder on top.
//! * [`witness`] — brute-force oracles (exact α, ω, induced-pattern search,
//!   exact fractional chromatic number via a rational LP solver) and
//!   certificate validators. Every engine outcome can be re-checked here.
//!
//! All weight and threshold arithmetic is exact rational ([`Rational`]);
//! no floating point participates in any certificate or oracle path.

pub mod bitset;
pub mod dimacs;
pub mod error;
pub mod fraccolour;
pub mod graph;
pub mod multibroom;
pub mod numeric;
pub mod outcome;
pub mod sparsify;
pub mod tree;
pub mod weights;
pub mod witness;

/// Exact rational scalar used for weights, thresholds and certificates.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer backing [`Rational`].
pub type Int = num_bigint::BigInt;

pub use bitset::VertexSet;
pub use error::{EngineError, GraphError};
pub use graph::Graph;
pub use outcome::{SearchOutcome, StableSetCert, TreeWitness};
pub use tree::{MultibroomSpec, TreePattern};
pub use weights::Weighting;

/// Builds a `Rational` from an integer.
pub fn ratio(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

/// Builds the `Rational` `n / d`, panicking on `d == 0`.
pub fn ratio_fr(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}
