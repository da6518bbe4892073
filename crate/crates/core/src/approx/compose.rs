//! Reassembles child alignments into an alignment of the parent node.

use thiserror::Error;

use crate::align::{Alignment, Move};
use crate::log::Trace;
use crate::tree::Operator;

use super::split::SplitAssignment;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("expected {expected} sub-alignments, got {found}")]
    PartCount { expected: usize, found: usize },
    #[error("sub-alignment {part} does not explain trace position {position}")]
    Mismatch { part: usize, position: usize },
    #[error("sub-alignment {part} has unused log moves")]
    Leftover { part: usize },
}

/// Composes the alignments of the parts of `split` (same order) into an
/// alignment of `trace`.
///
/// Choice returns the single sub-alignment, sequence and loop concatenate.
/// Parallel walks the trace and, for every event, takes the moves of the
/// owning child's alignment up to and including the one consuming the event;
/// remaining model moves of both children are appended at the end.
pub fn compose(trace: &Trace, split: &SplitAssignment, subs: Vec<Alignment>) -> Result<Alignment, ComposeError> {
    if subs.len() != split.parts.len() {
        return Err(ComposeError::PartCount {
            expected: split.parts.len(),
            found: subs.len(),
        });
    }
    let composed = match split.operator {
        Operator::Choice | Operator::Sequence | Operator::Loop => Alignment::concat(subs),
        Operator::Parallel => interleave(trace, split, subs)?,
    };
    if cfg!(debug_assertions) {
        let projection = composed.log_projection();
        if projection.len() != trace.len() {
            return Err(ComposeError::Mismatch {
                part: 0,
                position: projection.len().min(trace.len()),
            });
        }
        if let Some(position) = projection.iter().zip(trace.iter()).position(|(a, b)| *a != b) {
            return Err(ComposeError::Mismatch { part: 0, position });
        }
    }
    Ok(composed)
}

fn interleave(trace: &Trace, split: &SplitAssignment, subs: Vec<Alignment>) -> Result<Alignment, ComposeError> {
    let mut iters: Vec<_> = subs.into_iter().map(|a| a.into_moves().into_iter()).collect();
    let mut moves: Vec<Move> = Vec::new();
    for (position, (x, owner)) in trace.iter().zip(&split.owners).enumerate() {
        let part = owner.index();
        loop {
            let m = iters[part].next().ok_or(ComposeError::Mismatch { part, position })?;
            let consumed = m.log_activity().map(|a| a == x);
            moves.push(m);
            match consumed {
                Some(true) => break,
                Some(false) => return Err(ComposeError::Mismatch { part, position }),
                None => {}
            }
        }
    }
    for (part, rest) in iters.into_iter().enumerate() {
        for m in rest {
            if m.log_activity().is_some() {
                return Err(ComposeError::Leftover { part });
            }
            moves.push(m);
        }
    }
    Ok(Alignment::new(moves))
}
