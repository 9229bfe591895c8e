//! Noncommutative Orlicz spaces `L_Φ(M, τ)` and their weighted variants
//! `L_{Φ,α}(M, φ, τ)` realized on finite direct sums of matrix algebras.
//!
//! The crate is organized bottom-up:
//!
//! - [`nfunction`]: N-functions given by a density, inverses, complementary
//!   functions and growth checks.
//! - [`algebra`]: block matrix model of a von Neumann algebra with a
//!   faithful trace, polar decomposition and functional calculus.
//! - [`orlicz`]: trace modular, Luxemburg, Amemiya and `L_p` norms.
//! - [`weighted`]: the map `U`, weighted modular and weighted norm.
//! - [`duality`]: the pairing `τ(xy)` and dual norm computations.
//! - [`counterexample`]: log-domain evaluation of two traces on `ℓ∞`
//!   with non-equivalent weighted Orlicz norms.
//! - [`suite`]: seeded randomized invariant checks used by the CLI and the
//!   acceptance tests.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod counterexample;
pub mod duality;
mod error;
pub mod io;
pub mod nfunction;
pub mod orlicz;
pub mod random;
pub mod roots;
pub mod suite;
pub mod weighted;

pub use algebra::{BlockElement, BlockShape, TraceSpec, C64};
pub use error::{Error, Result};
pub use nfunction::{Density, NFunction};
pub use orlicz::{ModularValue, NormResult};
pub use weighted::{WeightSpec, WeightedOrlicz};
