//! Gray-box optimization of k-bounded additively decomposed pseudo-Boolean
//! functions.
//!
//! The crate covers the whole pipeline from an instance to its structure and
//! back to search:
//!
//! * [`adf`], [`generate`], [`format`](mod@format): instances, generators and files.
//! * [`graph`], [`chordal`], [`junction`], [`dot`]: interaction and factor
//!   graphs, chordal completion, junction trees and factorizations.
//! * [`marginal`]: exhaustive hyperplane statistics, Boltzmann
//!   distributions and deception diagnostics.
//! * [`fda`]: a factorized distribution algorithm on a fixed factorization.
//! * [`local_search`]: hill climbing with incremental delta evaluation.
//! * [`replicate`]: regenerates the ten-variable landscape tables and checks
//!   them against the bundled golden copies.

pub mod adf;
pub mod chordal;
pub mod dot;
pub mod error;
pub mod fda;
pub mod format;
pub mod generate;
pub mod graph;
pub mod junction;
pub mod local_search;
pub mod marginal;
pub mod replicate;
pub mod worked_example;

pub use adf::{project, AdfInstance, Solution, Subfunction, Visibility, Wgb};
pub use error::{Error, Result};
