//! Edit distance of a trace to the most liberal interpretation of a subtree.
//!
//! The interpretation accepts every word `s·m·e` with `s` a start activity,
//! `e` an end activity and `m` any word over the alphabet, every singleton
//! that is both a start and an end activity, and the empty word when the
//! subtree accepts it. The distances below are exact for that language.

use crate::characteristics::TreeCharacteristics;

/// Levenshtein distance from `trace` to the interpretation language of `c`.
pub fn interpretation_cost<S: AsRef<str>>(trace: &[S], c: &TreeCharacteristics) -> u32 {
    let n = trace.len();
    let in_start = |x: &S| c.start.contains(x.as_ref());
    let in_end = |x: &S| c.end.contains(x.as_ref());
    match n {
        0 => empty_cost(c),
        1 => singleton_cost(in_start(&trace[0]), in_end(&trace[0]), c),
        _ => {
            let middle = trace[1..n - 1]
                .iter()
                .filter(|x| !c.activities.contains(x.as_ref()))
                .count() as u32;
            u32::from(!in_start(&trace[0])) + middle + u32::from(!in_end(&trace[n - 1]))
        }
    }
}

pub(crate) fn empty_cost(c: &TreeCharacteristics) -> u32 {
    if c.accepts_empty {
        0
    } else if c.start_end_overlap() {
        1
    } else {
        2
    }
}

pub(crate) fn singleton_cost(in_start: bool, in_end: bool, c: &TreeCharacteristics) -> u32 {
    let mut best = u32::MAX;
    if c.accepts_empty {
        best = 1;
    }
    if c.start_end_overlap() {
        best = best.min(u32::from(!(in_start && in_end)));
    }
    if !c.start.is_empty() && !c.end.is_empty() {
        // keep the event as start or end and insert the other side
        best = best.min(1 + u32::from(!in_start).min(u32::from(!in_end)));
    }
    best
}

/// Constant-time interpretation costs for the contiguous segments of one
/// trace against one subtree.
#[derive(Debug, Clone)]
pub struct SegmentCoster {
    in_start: Vec<bool>,
    in_end: Vec<bool>,
    /// `outside[i]`: number of events before position `i` not in the alphabet.
    outside: Vec<u32>,
    empty: u32,
    singleton: Vec<u32>,
    min_len: usize,
    max_len: Option<usize>,
}

impl SegmentCoster {
    pub fn new<S: AsRef<str>>(trace: &[S], c: &TreeCharacteristics) -> Self {
        let in_start: Vec<bool> = trace.iter().map(|x| c.start.contains(x.as_ref())).collect();
        let in_end: Vec<bool> = trace.iter().map(|x| c.end.contains(x.as_ref())).collect();
        let mut outside = Vec::with_capacity(trace.len() + 1);
        outside.push(0);
        for x in trace {
            let last = *outside.last().unwrap();
            outside.push(last + u32::from(!c.activities.contains(x.as_ref())));
        }
        let singleton = (0..trace.len())
            .map(|i| singleton_cost(in_start[i], in_end[i], c))
            .collect();
        SegmentCoster {
            in_start,
            in_end,
            outside,
            empty: empty_cost(c),
            singleton,
            min_len: c.min_len,
            max_len: c.max_len,
        }
    }

    /// Cost of the segment `from..to`.
    pub fn cost(&self, from: usize, to: usize) -> u32 {
        debug_assert!(from <= to && to <= self.in_start.len());
        match to - from {
            0 => self.empty,
            1 => self.singleton[from],
            _ => {
                u32::from(!self.in_start[from])
                    + (self.outside[to - 1] - self.outside[from + 1])
                    + u32::from(!self.in_end[to - 1])
            }
        }
    }

    /// Distance of the segment length to the subtree's range of trace
    /// lengths; used to rank segmentations of equal cost.
    pub fn length_gap(&self, from: usize, to: usize) -> usize {
        let len = to - from;
        self.min_len.saturating_sub(len) + self.max_len.map_or(0, |max| len.saturating_sub(max))
    }

    pub fn empty(&self) -> u32 {
        self.empty
    }

    pub fn singleton(&self, i: usize) -> u32 {
        self.singleton[i]
    }

    pub fn not_start(&self, i: usize) -> u32 {
        u32::from(!self.in_start[i])
    }

    pub fn not_end(&self, i: usize) -> u32 {
        u32::from(!self.in_end[i])
    }

    pub fn not_in_alphabet(&self, i: usize) -> u32 {
        self.outside[i + 1] - self.outside[i]
    }
}
