//! Exact-arithmetic laboratory for the ordered structures that live on an
//! algebraic closure of a finite field.
//!
//! The library realizes, at a finite level `F_{p^L}`, the structure obtained
//! by pulling the circle ordering back along an injective multiplicative
//! character `chi: F_{p^L}^x -> Q/Z`. Everything is exact: field elements are
//! coefficient vectors mod p, circle points are reduced rationals with
//! denominators coprime to p, and every predicate is decided by integer
//! arithmetic.
//!
//! Module map:
//! * [`gf`] — finite fields with deterministic generators, discrete logs,
//!   subfields and coherent extensions.
//! * [`circle`] — the circle group of p-free roots of unity: ordering,
//!   winding numbers, the root predicates, and the ordered-group cover.
//! * [`chi`] — the character itself, cyclotomic invariants and the
//!   invariant-file round trip.
//! * [`variety`] — quasi-affine varieties, point enumeration, multiplicative
//!   largeness, hyper-arcs and the genericity probe.
//! * [`sums`] — multiplicative character sums, point-count tables,
//!   Weyl sums and box discrepancy.
//! * [`depattern`] — multiplicative dependence patterns of root tuples.
//! * [`logic`] — parser and decision procedure for special sentences.
//!
//! The `book/` directory of the repository is an mdbook guide whose code
//! snippets are compiled as doc-tests (see `cargo test --doc`).

pub mod chi;
pub mod circle;
pub mod cyclotomic;
pub mod depattern;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod logic;
pub mod sums;
pub mod variety;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
