//! Operator-specific trace splitting.
//!
//! Every splitter returns a valid assignment of (sub-)traces to the children
//! of a binary operator node that minimizes the summed interpretation costs.
//! Ties are broken deterministically. The summed length gap comes first (how
//! far each part's length lies outside the range of trace lengths of its
//! child, a lower bound on the true cost that the interpretation ignores).
//! Remaining ties: choice prefers the first child, sequence the leftmost
//! split, parallel the first child position by position, loop the fewest
//! segments and then the leftmost cuts.

use std::fmt;

use crate::characteristics::CharacteristicsTable;
use crate::log::Trace;
use crate::tree::{NodeId, Operator, ProcessTree};

use super::interpretation::SegmentCoster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Child {
    First,
    Second,
}

impl Child {
    pub fn index(self) -> usize {
        match self {
            Child::First => 0,
            Child::Second => 1,
        }
    }

    pub fn other(self) -> Child {
        match self {
            Child::First => Child::Second,
            Child::Second => Child::First,
        }
    }
}

impl fmt::Display for Child {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub trace: Trace,
    pub child: Child,
}

/// Sub-traces assigned to the children of one operator node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub operator: Operator,
    pub parts: Vec<Part>,
    /// For parallel nodes: the child owning each trace position.
    pub owners: Vec<Child>,
    /// Summed interpretation cost of the parts.
    pub objective: u32,
}

impl SplitAssignment {
    /// Checks the shape conditions of the operator against the split trace.
    pub fn is_valid_for(&self, trace: &Trace) -> bool {
        let concat = || -> Vec<&str> { self.parts.iter().flat_map(|p| p.trace.iter()).collect() };
        let children: Vec<Child> = self.parts.iter().map(|p| p.child).collect();
        let whole: Vec<&str> = trace.iter().collect();
        match self.operator {
            Operator::Choice => self.parts.len() == 1 && concat() == whole,
            Operator::Sequence => children == [Child::First, Child::Second] && concat() == whole,
            Operator::Loop => {
                children.len() % 2 == 1
                    && children
                        .iter()
                        .enumerate()
                        .all(|(i, &c)| c == if i % 2 == 0 { Child::First } else { Child::Second })
                    && concat() == whole
            }
            Operator::Parallel => {
                if children != [Child::First, Child::Second] || self.owners.len() != trace.len() {
                    return false;
                }
                let mut next = [0usize; 2];
                for (x, owner) in trace.iter().zip(&self.owners) {
                    let k = owner.index();
                    if self.parts[k].trace.get(next[k]) != Some(x) {
                        return false;
                    }
                    next[k] += 1;
                }
                next[0] == self.parts[0].trace.len() && next[1] == self.parts[1].trace.len()
            }
        }
    }
}

/// Segment costers for both children of `v`.
fn costers(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> [SegmentCoster; 2] {
    let ch = tree.children(v);
    assert_eq!(ch.len(), 2, "splitting requires a binary tree");
    let acts = trace.activities();
    [
        SegmentCoster::new(acts, chars.get(ch[0])),
        SegmentCoster::new(acts, chars.get(ch[1])),
    ]
}

pub fn split_xor(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> SplitAssignment {
    let [c1, c2] = costers(trace, tree, v, chars);
    let n = trace.len();
    let k1 = (c1.cost(0, n), c1.length_gap(0, n));
    let k2 = (c2.cost(0, n), c2.length_gap(0, n));
    let (child, objective) = if k2 < k1 {
        (Child::Second, k2.0)
    } else {
        (Child::First, k1.0)
    };
    SplitAssignment {
        operator: Operator::Choice,
        parts: vec![Part {
            trace: trace.clone(),
            child,
        }],
        owners: Vec::new(),
        objective,
    }
}

pub fn split_seq(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> SplitAssignment {
    let [c1, c2] = costers(trace, tree, v, chars);
    let n = trace.len();
    let (objective, _, p) = (0..=n)
        .map(|p| {
            let gap = c1.length_gap(0, p) + c2.length_gap(p, n);
            (c1.cost(0, p) + c2.cost(p, n), gap, p)
        })
        .min()
        .expect("at least one split position");
    SplitAssignment {
        operator: Operator::Sequence,
        parts: vec![
            Part {
                trace: trace.slice(0, p),
                child: Child::First,
            },
            Part {
                trace: trace.slice(p, n),
                child: Child::Second,
            },
        ],
        owners: Vec::new(),
        objective,
    }
}

/// Progress of one child of a parallel node while scanning the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// No event assigned yet.
    Idle,
    /// First event assigned, last one still to come.
    Open,
    /// Last event assigned.
    Done,
}

const PHASES: [Phase; 3] = [Phase::Idle, Phase::Open, Phase::Done];

fn phase_index(p: Phase) -> usize {
    match p {
        Phase::Idle => 0,
        Phase::Open => 1,
        Phase::Done => 2,
    }
}

/// Transitions of a child's phase when it receives the event at `i`.
fn receive(coster: &SegmentCoster, phase: Phase, i: usize) -> Vec<(Phase, u32)> {
    match phase {
        Phase::Idle => vec![(Phase::Done, coster.singleton(i)), (Phase::Open, coster.not_start(i))],
        Phase::Open => vec![
            (Phase::Open, coster.not_in_alphabet(i)),
            (Phase::Done, coster.not_end(i)),
        ],
        Phase::Done => Vec::new(),
    }
}

fn final_cost(coster: &SegmentCoster, phase: Phase) -> Option<u32> {
    match phase {
        Phase::Idle => Some(coster.empty()),
        Phase::Open => None,
        Phase::Done => Some(0),
    }
}

/// Exact minimization over all assignments of positions to children.
///
/// The state after each position is the pair of child phases plus the number
/// of events given to the first child; a child's subsequence cost decomposes
/// into start, middle and end indicators (or the singleton/empty cost), so
/// the per-transition costs sum to the objective. Ties are broken by the
/// length gap of both subsequences, then by preferring the first child.
pub fn split_and(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> SplitAssignment {
    let coster = costers(trace, tree, v, chars);
    let n = trace.len();
    let width = n + 1;
    let index =
        |i: usize, p: [Phase; 2], first: usize| ((i * 9) + phase_index(p[0]) * 3 + phase_index(p[1])) * width + first;
    const INF: (u32, u32) = (u32::MAX, u32::MAX);
    let add = |a: (u32, u32), b: (u32, u32)| (a.0 + b.0, a.1 + b.1);

    // to_go[(i, phases, first)]: best (cost, gap) of positions i.. when the
    // first child already received `first` events
    let mut to_go = vec![INF; (n + 1) * 9 * width];
    for p1 in PHASES {
        for p2 in PHASES {
            if let (Some(a), Some(b)) = (final_cost(&coster[0], p1), final_cost(&coster[1], p2)) {
                for first in 0..=n {
                    let gap = coster[0].length_gap(0, first) + coster[1].length_gap(first, n);
                    to_go[index(n, [p1, p2], first)] = (a + b, gap as u32);
                }
            }
        }
    }
    for i in (0..n).rev() {
        for p1 in PHASES {
            for p2 in PHASES {
                let phases = [p1, p2];
                for first in 0..=i {
                    let mut best = INF;
                    for k in 0..2 {
                        for (next, cost) in receive(&coster[k], phases[k], i) {
                            let mut after = phases;
                            after[k] = next;
                            let rest = to_go[index(i + 1, after, first + usize::from(k == 0))];
                            if rest != INF {
                                best = best.min(add((cost, 0), rest));
                            }
                        }
                    }
                    to_go[index(i, phases, first)] = best;
                }
            }
        }
    }

    let mut phases = [Phase::Idle, Phase::Idle];
    let objective = to_go[index(0, phases, 0)].0;
    let mut first = 0;
    let mut owners = Vec::with_capacity(n);
    let mut subs: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        let target = to_go[index(i, phases, first)];
        let (k, next) = (0..2)
            .flat_map(|k| {
                receive(&coster[k], phases[k], i)
                    .into_iter()
                    .map(move |(next, cost)| (k, next, cost))
            })
            .find(|&(k, next, cost)| {
                let mut after = phases;
                after[k] = next;
                let rest = to_go[index(i + 1, after, first + usize::from(k == 0))];
                rest != INF && add((cost, 0), rest) == target
            })
            .map(|(k, next, _)| (k, next))
            .expect("an optimal transition exists");
        phases[k] = next;
        first += usize::from(k == 0);
        owners.push(if k == 0 { Child::First } else { Child::Second });
        subs[k].push(trace.activities()[i].clone());
    }
    let [s1, s2] = subs;
    SplitAssignment {
        operator: Operator::Parallel,
        parts: vec![
            Part {
                trace: Trace::from_vec_unchecked(s1),
                child: Child::First,
            },
            Part {
                trace: Trace::from_vec_unchecked(s2),
                child: Child::Second,
            },
        ],
        owners,
        objective,
    }
}

/// Ranking of partial loop segmentations: cost, length gap, segment count,
/// then segment end positions lexicographically. Extending two partial
/// segmentations alike preserves their order, so the ranking is compatible
/// with the dynamic program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct LoopKey {
    cost: u32,
    gap: usize,
    segments: usize,
    ends: Vec<usize>,
}

impl LoopKey {
    fn extend(&self, coster: &SegmentCoster, start: usize, end: usize) -> LoopKey {
        let mut ends = self.ends.clone();
        ends.push(end);
        LoopKey {
            cost: self.cost + coster.cost(start, end),
            gap: self.gap + coster.length_gap(start, end),
            segments: self.segments + 1,
            ends,
        }
    }
}

/// Exact minimization over alternating segmentations `1,2,1,…,1`.
///
/// States are (position, child of the next segment). Non-empty segments move
/// forward; empty segments switch the child in place. Two consecutive empty
/// segments return to the same state with a larger key, so relaxing the
/// in-place edges once per position suffices.
pub fn split_loop(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> SplitAssignment {
    let coster = costers(trace, tree, v, chars);
    let n = trace.len();
    let mut best: Vec<[Option<LoopKey>; 2]> = vec![[None, None]; n + 1];
    best[0][Child::First.index()] = Some(LoopKey {
        cost: 0,
        gap: 0,
        segments: 0,
        ends: Vec::new(),
    });

    let relax = |slot: &mut Option<LoopKey>, key: LoopKey| {
        if slot.as_ref().is_none_or(|old| key < *old) {
            *slot = Some(key);
        }
    };

    for i in 0..=n {
        let old = best[i].clone();
        for k in 0..2 {
            if let Some(key) = &old[k] {
                relax(&mut best[i][1 - k], key.extend(&coster[k], i, i));
            }
        }
        for k in 0..2 {
            let Some(key) = best[i][k].clone() else { continue };
            for (j, slot) in best.iter_mut().enumerate().skip(i + 1) {
                relax(&mut slot[1 - k], key.extend(&coster[k], i, j));
            }
        }
    }

    let key = best[n][Child::Second.index()]
        .clone()
        .expect("the single-segment split is always feasible");
    let mut parts = Vec::with_capacity(key.segments);
    let mut start = 0;
    for (s, &end) in key.ends.iter().enumerate() {
        let child = if s % 2 == 0 { Child::First } else { Child::Second };
        parts.push(Part {
            trace: trace.slice(start, end),
            child,
        });
        start = end;
    }
    SplitAssignment {
        operator: Operator::Loop,
        parts,
        owners: Vec::new(),
        objective: key.cost,
    }
}

/// Dispatches on the operator at `v`.
pub fn split(trace: &Trace, tree: &ProcessTree, v: NodeId, chars: &CharacteristicsTable) -> SplitAssignment {
    match tree.operator(v).expect("only operator nodes are split") {
        Operator::Choice => split_xor(trace, tree, v, chars),
        Operator::Sequence => split_seq(trace, tree, v, chars),
        Operator::Parallel => split_and(trace, tree, v, chars),
        Operator::Loop => split_loop(trace, tree, v, chars),
    }
}
