//! Optimal and approximate alignments between traces and process trees.
//!
//! Trees are parsed with [`ProcessTree::parse`], characteristics computed
//! once per tree with [`compute_characteristics`], and traces aligned with
//! [`optimal_align`] or [`approximate_align`].

pub mod align;
pub mod approx;
pub mod characteristics;
pub mod eval;
pub mod log;
pub mod semantics;
pub mod synth;
pub mod tree;

pub use align::{check_alignment, optimal_align, validate_alignment, Alignment, Move};
pub use approx::{approximate_align, ApproxParams};
pub use characteristics::{compute_characteristics, CharacteristicsTable, TreeCharacteristics};
pub use log::{EventLog, Trace, Variant};
pub use tree::{NodeId, Operator, ProcessTree};
