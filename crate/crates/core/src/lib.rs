//! Prime statistics at desk scale: segmented sieving, prime counts in short
//! windows, the random model, admissible linear forms, residue-class
//! constructions that force composite runs, interval walks and discrepancy
//! measurements.
//!
//! The guide in `book/` walks through each module; its snippets run as
//! doctests of this crate.

pub mod admissible;
pub mod cramer_model;
pub mod discrepancy;
pub mod erdos_rankin;
pub mod error;
pub mod interval_stats;
pub mod interval_walk;
pub mod numeric;
pub mod sieve;

pub use error::{Error, Result};

// The book's snippets run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sieve.md")]
    mod sieve {}
    #[doc = include_str!("../../../book/src/short-intervals.md")]
    mod short_intervals {}
    #[doc = include_str!("../../../book/src/random-model.md")]
    mod random_model {}
    #[doc = include_str!("../../../book/src/admissible.md")]
    mod admissible {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/interval-walk.md")]
    mod interval_walk {}
    #[doc = include_str!("../../../book/src/discrepancy.md")]
    mod discrepancy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
