//! Subsystem quantum codes built from classical GF(2) codes.
//!
//! The crate constructs Bravyi-Bacon-Shor (BBS), subsystem hypergraph product
//! (SHP) and hypergraph product (HGP) codes, decodes BBS and SHP codes by
//! lifting belief-propagation corrections from the underlying classical code,
//! and estimates logical failure rates under phenomenological and
//! circuit-level noise.

// index loops read better than zipped iterators in the matrix code
#![allow(clippy::needless_range_loop)]

pub mod bp;
pub mod circuit;
pub mod classical;
pub mod codes;
pub mod error;
pub mod exec;
pub mod gf2;
pub mod induced;
pub mod pheno;
pub mod stats;

pub use error::{Error, Result};
pub use gf2::{BinaryMatrix, BitVector, Rref};
