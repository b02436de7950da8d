//! Balanced Cantor-type sets on the line, generalized iterated function
//! systems of infinite order that reproduce them, and certified Hutchinson
//! fixed-point iteration on finite nets.
//!
//! Compact sets are finite [`metric::CompactNet`]s with a declared
//! resolution. A balanced set is a [`balanced::CellTree`]: nested closed
//! intervals indexed by digit addresses. The maps in [`gifs`] act on
//! addresses through digit parities, so every self-similarity identity and
//! Lipschitz bound can be checked exactly at finite depth.

pub mod address;
pub mod appendix;
pub mod balanced;
pub mod cli;
pub mod error;
pub mod gifs;
pub mod lipschitz;
pub mod measure;
pub mod metric;
pub mod svg;

pub use address::{Address, ArityProfile, IndexingFunction};
pub use balanced::{build_balanced_set, verify_conditions, CellTree, VerificationReport};
pub use error::{GifsError, Result};
pub use metric::{hausdorff_distance, seq_metric, BoundedSeq, CompactNet, Interval, Point};
