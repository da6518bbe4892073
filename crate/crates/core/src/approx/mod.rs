//! Recursive alignment approximation.
//!
//! Below the thresholds (trace length at most `tl` or subtree height at most
//! `th`) the exact aligner is used. Otherwise the trace is split over the
//! children of the current operator, each part is aligned recursively against
//! its child and the results are composed.

pub mod compose;
pub mod interpretation;
pub mod split;

use thiserror::Error;

use crate::align::{optimal_align_at, Alignment};
use crate::characteristics::CharacteristicsTable;
use crate::log::Trace;
use crate::tree::{NodeId, ProcessTree};

pub use compose::{compose, ComposeError};
pub use interpretation::{interpretation_cost, SegmentCoster};
pub use split::{split, split_and, split_loop, split_seq, split_xor, Child, Part, SplitAssignment};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("{name} must be at least 1, got {value}")]
    TooSmall { name: &'static str, value: usize },
}

/// Recursion thresholds, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApproxParams {
    tl: usize,
    th: usize,
}

impl ApproxParams {
    pub fn new(tl: usize, th: usize) -> Result<Self, ParamsError> {
        if tl == 0 {
            return Err(ParamsError::TooSmall { name: "TL", value: tl });
        }
        if th == 0 {
            return Err(ParamsError::TooSmall { name: "TH", value: th });
        }
        Ok(ApproxParams { tl, th })
    }

    pub fn tl(&self) -> usize {
        self.tl
    }

    pub fn th(&self) -> usize {
        self.th
    }

    /// Whether the exact aligner is used for a trace of length `len` on a
    /// subtree of height `height`.
    pub fn stops(&self, len: usize, height: usize) -> bool {
        len <= self.tl || height <= self.th
    }
}

/// Approximate alignment of `trace` against a binary `tree` with
/// precomputed characteristics.
pub fn approximate_align(
    trace: &Trace,
    tree: &ProcessTree,
    chars: &CharacteristicsTable,
    params: ApproxParams,
) -> Alignment {
    approximate_align_at(trace, tree, tree.root(), chars, params)
}

/// Like [`approximate_align`] for the subtree rooted at `v`.
pub fn approximate_align_at(
    trace: &Trace,
    tree: &ProcessTree,
    v: NodeId,
    chars: &CharacteristicsTable,
    params: ApproxParams,
) -> Alignment {
    if params.stops(trace.len(), tree.height_of(v)) {
        return optimal_align_at(trace, tree, v);
    }
    let assignment = split(trace, tree, v, chars);
    let children = tree.children(v);
    let subs = assignment
        .parts
        .iter()
        .map(|p| approximate_align_at(&p.trace, tree, children[p.child.index()], chars, params))
        .collect();
    compose(trace, &assignment, subs).expect("sub-alignments match their parts")
}
