//! Word calculus for free groups and two-factor free products, folded
//! subgroup graphs, and the verification suites built on top of them:
//! a truncated splitting embedding with its basis/closure/abelianization
//! audits, a bounded exhaustive search for conjugation length-inequality
//! violations, and a staged-construction replay with per-pair invariant
//! checks.

pub mod construction;
pub mod error;
pub mod free_product;
pub mod length_descent;
pub mod matrix;
pub mod report;
pub mod stages;
pub mod subgroup;
pub mod words;

pub use error::{Error, Result};
