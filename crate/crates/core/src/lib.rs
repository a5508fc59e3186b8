//! Exact minimal models of rational self-maps of the projective line over
//! the rationals, and a search for maps with many integers in one orbit.
//!
//! The crate is organised bottom-up:
//!
//! - [`polyval`]: big-integer polynomials, p-adic valuations, resultants,
//!   rational roots, and arithmetic over prime fields.
//! - [`model`]: models `[F, G]` of degree-d maps, the `(lambda, A)` action,
//!   the homogeneous resultant `Res_d`, and resultant factorisation.
//! - [`localmin`]: minimality at one prime and the local minimiser.
//! - [`globalmin`]: minimal models over the integers.
//! - [`dynamics`]: orbits, reduction modulo primes, periodic and preperiodic
//!   points, wandering certificates.
//! - [`interp`]: interpolation of maps through orbit prefixes and the
//!   `N`/`D` divisibility polynomials.
//! - [`search`]: the sharded, checkpointed orbit search.
//!
//! The mathematics is exact; floats appear only in timing reports.

pub mod arith;
pub mod dynamics;
pub mod globalmin;
pub mod interp;
pub mod localmin;
pub mod model;
pub mod polyval;
pub mod search;

mod error;

pub use error::{Error, Result};
