//! Exact counting of words by degree and of semigroup orbits by height for
//! finitely generated semigroups of rational maps on the projective line
//! over the rationals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod orbit;
pub mod p1;
pub mod poly;
pub mod report;
pub mod weights;

pub use error::{Error, Result};
