//! Construction and certification of genus-2 curves over ℚ with prescribed
//! period and index, together with the divisibility calculus that lifts them
//! to higher genus.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: exact integers and rationals, valuations, residue symbols, prime search
//! - [`poly`]: dense univariate polynomials over exact fields
//! - [`tower`]: iterated quadratic extensions of ℚ
//! - [`curve`]: elliptic and hyperelliptic models
//! - [`local`]: local solvability and per-place certificates
//! - [`forge`]: the three genus-2 constructions
//! - [`divisor`]: divisors of functions `y^m·g(z)/h(z)`
//! - [`calculus`]: admissibility and the higher-genus derivation traces
//! - [`cert`]: certificate bundles, verification and the end-to-end pipeline

pub mod arith;
pub mod calculus;
pub mod cert;
pub mod curve;
pub mod divisor;
pub mod forge;
pub mod local;
pub mod poly;
pub mod serde_str;
pub mod tower;

pub use arith::{Modulus, Place, Prime, Rational};
