//! Bit-exact laboratory for deterministic two-party communication protocols
//! around sponsored search auctions.
//!
//! The Website holds slot click-through rates (as integer ticks) and a
//! surplus threshold; the Bidders hold their bids. [`protocols`] implements
//! the rank-based canonical protocols for the permutation problem (PP) and
//! the optimal social surplus inequality (OSSI), and the reduction that
//! solves PP with one OSSI query. [`engine`] runs them with exact bit
//! accounting, [`oracles`] supplies reference answers, and [`bounds`]
//! builds and checks fooling sets.

pub mod bounds;
pub mod cli;
pub mod combinatorics;
pub mod engine;
mod error;
pub mod oracles;
pub mod protocols;
pub mod seqcore;

pub use error::{Error, Result};
