//! Alignments between a trace and a process tree, the optimal aligner and
//! alignment validation.
//!
//! The optimal aligner is a uniform-cost search over the synchronous product
//! of trace positions and tree configurations (see [`crate::semantics`]).
//! Synchronous moves, invisible model moves and silent control steps cost 0;
//! log moves and visible model moves cost 1. Equal-cost alignments are ranked
//! by number of moves, remaining ties by discovery order, which makes the
//! result deterministic.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::Trace;
use crate::semantics::{ExecutionState, Semantics, Step};
use crate::tree::{is_reserved, Label, NodeId, ProcessTree, SKIP, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Sync,
    Log,
    VisibleModel,
    InvisibleModel,
}

/// One column of an alignment. The log-only and model-only shapes make the
/// pair (skip, skip) unrepresentable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    Sync { activity: String, leaf: NodeId },
    Log { activity: String },
    VisibleModel { leaf: NodeId },
    InvisibleModel { leaf: NodeId },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::Sync { .. } => MoveKind::Sync,
            Move::Log { .. } => MoveKind::Log,
            Move::VisibleModel { .. } => MoveKind::VisibleModel,
            Move::InvisibleModel { .. } => MoveKind::InvisibleModel,
        }
    }

    pub fn log_activity(&self) -> Option<&str> {
        match self {
            Move::Sync { activity, .. } | Move::Log { activity } => Some(activity),
            _ => None,
        }
    }

    pub fn model_leaf(&self) -> Option<NodeId> {
        match self {
            Move::Sync { leaf, .. } | Move::VisibleModel { leaf } | Move::InvisibleModel { leaf } => Some(*leaf),
            Move::Log { .. } => None,
        }
    }

    pub fn cost(&self) -> u32 {
        match self {
            Move::Log { .. } | Move::VisibleModel { .. } => 1,
            Move::Sync { .. } | Move::InvisibleModel { .. } => 0,
        }
    }
}

/// Serialized form of a move: `{"kind": ..., "activity": ..., "leaf": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub kind: MoveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("move {index}: {msg}")]
    IllegalMove { index: usize, msg: String },
    #[error("log projection {found} differs from trace {expected}")]
    LogProjection { expected: String, found: String },
    #[error("model projection is not in the language of the tree")]
    ModelProjection,
    #[error("invalid alignment record: {0}")]
    Record(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Alignment {
    moves: Vec<Move>,
}

impl Alignment {
    pub fn new(moves: Vec<Move>) -> Self {
        Alignment { moves }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn into_moves(self) -> Vec<Move> {
        self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Standard cost: number of log moves plus visible model moves.
    pub fn cost(&self) -> u32 {
        self.moves.iter().map(Move::cost).sum()
    }

    pub fn log_projection(&self) -> Vec<&str> {
        self.moves.iter().filter_map(Move::log_activity).collect()
    }

    pub fn concat(parts: impl IntoIterator<Item = Alignment>) -> Alignment {
        Alignment {
            moves: parts.into_iter().flat_map(|a| a.moves).collect(),
        }
    }

    /// Label pairs `(log, model)` with `>>` for skips and `tau` for silent
    /// leaves.
    pub fn label_pairs(&self, tree: &ProcessTree) -> Vec<(String, String)> {
        self.moves
            .iter()
            .map(|m| {
                let log = m.log_activity().unwrap_or(SKIP).to_string();
                let model = m.model_leaf().map_or(SKIP.to_string(), |v| leaf_name(tree, v));
                (log, model)
            })
            .collect()
    }

    /// Two-row table: trace part on top, model part (label and node) below.
    pub fn to_table(&self, tree: &ProcessTree) -> String {
        let mut top = vec!["log".to_string()];
        let mut bottom = vec!["model".to_string()];
        for m in &self.moves {
            top.push(m.log_activity().unwrap_or(SKIP).to_string());
            bottom.push(match m.model_leaf() {
                Some(v) => format!("{} ({v})", leaf_name(tree, v)),
                None => SKIP.to_string(),
            });
        }
        let widths: Vec<usize> = top
            .iter()
            .zip(&bottom)
            .map(|(a, b)| a.chars().count().max(b.chars().count()))
            .collect();
        let row = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        format!("{}\n{}\n", row(&top), row(&bottom))
    }

    pub fn to_records(&self) -> Vec<MoveRecord> {
        self.moves
            .iter()
            .map(|m| MoveRecord {
                kind: m.kind(),
                activity: m.log_activity().map(str::to_string),
                leaf: m.model_leaf().map(NodeId::index),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("records always serialize")
    }

    pub fn from_records(records: &[MoveRecord]) -> Result<Alignment, AlignmentError> {
        let moves = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let bad = |msg: &str| AlignmentError::Record(format!("record {i}: {msg}"));
                match (r.kind, &r.activity, r.leaf) {
                    (MoveKind::Sync, Some(a), Some(l)) => Ok(Move::Sync {
                        activity: a.clone(),
                        leaf: NodeId(l),
                    }),
                    (MoveKind::Log, Some(a), None) => Ok(Move::Log { activity: a.clone() }),
                    (MoveKind::VisibleModel, None, Some(l)) => Ok(Move::VisibleModel { leaf: NodeId(l) }),
                    (MoveKind::InvisibleModel, None, Some(l)) => Ok(Move::InvisibleModel { leaf: NodeId(l) }),
                    _ => Err(bad("fields do not match the move kind")),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Alignment { moves })
    }

    pub fn from_json(text: &str) -> Result<Alignment, AlignmentError> {
        let records: Vec<MoveRecord> = serde_json::from_str(text).map_err(|e| AlignmentError::Record(e.to_string()))?;
        Self::from_records(&records)
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

fn leaf_name(tree: &ProcessTree, v: NodeId) -> String {
    match tree.label(v) {
        Label::Activity(a) => a.clone(),
        Label::Tau => TAU.to_string(),
        Label::Operator(op) => op.symbol().to_string(),
    }
}

/// An optimal alignment of `trace` against the whole tree.
pub fn optimal_align(trace: &Trace, tree: &ProcessTree) -> Alignment {
    optimal_align_at(trace, tree, tree.root())
}

#[derive(Debug, Clone, Copy)]
enum Edge {
    Silent,
    Log(u32),
    Sync(u32, NodeId),
    Model(NodeId),
    Invisible(NodeId),
}

struct SearchNode {
    pos: u32,
    config: u32,
    parent: u32,
    edge: Edge,
}

/// Configurations seen during one search, with memoized successors.
struct ConfigSpace<'t> {
    sem: Semantics<'t>,
    states: Vec<ExecutionState>,
    ids: HashMap<ExecutionState, u32>,
    successors: Vec<Option<Vec<(Step, u32)>>>,
}

impl<'t> ConfigSpace<'t> {
    fn new(sem: Semantics<'t>) -> Self {
        ConfigSpace {
            sem,
            states: Vec::new(),
            ids: HashMap::new(),
            successors: Vec::new(),
        }
    }

    fn intern(&mut self, s: ExecutionState) -> u32 {
        if let Some(&id) = self.ids.get(&s) {
            return id;
        }
        let id = self.states.len() as u32;
        self.states.push(s.clone());
        self.ids.insert(s, id);
        self.successors.push(None);
        id
    }

    fn successors(&mut self, id: u32) -> Vec<(Step, u32)> {
        if let Some(s) = &self.successors[id as usize] {
            return s.clone();
        }
        let steps = self.sem.enabled_steps(&self.states[id as usize]);
        let succ: Vec<(Step, u32)> = steps
            .into_iter()
            .map(|(step, next)| (step, self.intern(next)))
            .collect();
        self.successors[id as usize] = Some(succ.clone());
        succ
    }

    fn is_final(&self, id: u32) -> bool {
        self.sem.is_final(&self.states[id as usize])
    }
}

/// An optimal alignment of `trace` against the subtree rooted at `root`.
/// Model moves reference node ids of the full tree.
pub fn optimal_align_at(trace: &Trace, tree: &ProcessTree, root: NodeId) -> Alignment {
    let sem = Semantics::new(tree, root);
    let mut space = ConfigSpace::new(sem);
    let n = trace.len() as u32;
    let acts = trace.activities();

    let mut arena: Vec<SearchNode> = Vec::new();
    let mut best: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    let mut closed: HashSet<(u32, u32)> = HashSet::new();
    let mut heap = BinaryHeap::new();

    let start = space.intern(sem.initial());
    arena.push(SearchNode {
        pos: 0,
        config: start,
        parent: u32::MAX,
        edge: Edge::Silent,
    });
    best.insert((0, start), (0, 0));
    heap.push(Reverse((0u32, 0u32, 0u32)));

    let goal = loop {
        let Reverse((cost, len, idx)) = heap.pop().expect("a complete alignment always exists");
        let (pos, config) = (arena[idx as usize].pos, arena[idx as usize].config);
        if !closed.insert((pos, config)) {
            continue;
        }
        if pos == n && space.is_final(config) {
            break idx;
        }
        let mut push = |arena: &mut Vec<SearchNode>,
                        heap: &mut BinaryHeap<_>,
                        pos: u32,
                        config: u32,
                        cost: u32,
                        len: u32,
                        edge: Edge| {
            if closed.contains(&(pos, config)) {
                return;
            }
            let key = (cost, len);
            match best.get(&(pos, config)) {
                Some(&b) if b <= key => return,
                _ => {}
            }
            best.insert((pos, config), key);
            let id = arena.len() as u32;
            arena.push(SearchNode {
                pos,
                config,
                parent: idx,
                edge,
            });
            heap.push(Reverse((cost, len, id)));
        };

        for (step, next) in space.successors(config) {
            match step {
                Step::Fire(leaf) => match tree.label(leaf) {
                    Label::Tau => push(&mut arena, &mut heap, pos, next, cost, len + 1, Edge::Invisible(leaf)),
                    Label::Activity(a) => {
                        if pos < n && acts[pos as usize] == *a {
                            push(
                                &mut arena,
                                &mut heap,
                                pos + 1,
                                next,
                                cost,
                                len + 1,
                                Edge::Sync(pos, leaf),
                            );
                        }
                        push(&mut arena, &mut heap, pos, next, cost + 1, len + 1, Edge::Model(leaf));
                    }
                    Label::Operator(_) => unreachable!("only leaves fire"),
                },
                _ => push(&mut arena, &mut heap, pos, next, cost, len, Edge::Silent),
            }
        }
        if pos < n {
            push(
                &mut arena,
                &mut heap,
                pos + 1,
                config,
                cost + 1,
                len + 1,
                Edge::Log(pos),
            );
        }
    };

    let mut moves = Vec::new();
    let mut cur = goal;
    while cur != u32::MAX {
        let node = &arena[cur as usize];
        match node.edge {
            Edge::Silent => {}
            Edge::Log(p) => moves.push(Move::Log {
                activity: acts[p as usize].clone(),
            }),
            Edge::Sync(p, leaf) => moves.push(Move::Sync {
                activity: acts[p as usize].clone(),
                leaf,
            }),
            Edge::Model(leaf) => moves.push(Move::VisibleModel { leaf }),
            Edge::Invisible(leaf) => moves.push(Move::InvisibleModel { leaf }),
        }
        cur = node.parent;
    }
    moves.reverse();
    Alignment::new(moves)
}

/// Checks that `alignment` is an alignment of `trace` and the subtree rooted
/// at `root`:
///
/// 1. its log projection equals the trace,
/// 2. its sequence of visible model leaves can be replayed to completion on
///    the subtree (silent leaves and control steps are free), and
/// 3. every move is well formed: synchronous moves pair an activity with a
///    leaf of the same label, model moves use leaves of the subtree with the
///    right visibility.
pub fn check_alignment_at(
    trace: &Trace,
    tree: &ProcessTree,
    root: NodeId,
    alignment: &Alignment,
) -> Result<(), AlignmentError> {
    let in_subtree = |v: NodeId| tree.contains(v) && tree.is_ancestor_or_self(root, v) && tree.is_leaf(v);
    for (index, m) in alignment.moves().iter().enumerate() {
        let illegal = |msg: String| AlignmentError::IllegalMove { index, msg };
        if let Some(a) = m.log_activity() {
            if is_reserved(a) {
                return Err(illegal(format!("reserved activity '{a}'")));
            }
        }
        if let Some(v) = m.model_leaf() {
            if !in_subtree(v) {
                return Err(illegal(format!("{v} is not a leaf of the subtree")));
            }
        }
        match m {
            Move::Sync { activity, leaf } => {
                if tree.label(*leaf).activity() != Some(activity.as_str()) {
                    return Err(illegal(format!("activity '{activity}' synchronized with {leaf}")));
                }
            }
            Move::VisibleModel { leaf } => {
                if tree.label(*leaf) == &Label::Tau {
                    return Err(illegal(format!("{leaf} is silent")));
                }
            }
            Move::InvisibleModel { leaf } => {
                if tree.label(*leaf) != &Label::Tau {
                    return Err(illegal(format!("{leaf} is not silent")));
                }
            }
            Move::Log { .. } => {}
        }
    }

    let projection = alignment.log_projection();
    if projection.len() != trace.len() || projection.iter().zip(trace.iter()).any(|(a, b)| *a != b) {
        return Err(AlignmentError::LogProjection {
            expected: trace.to_string(),
            found: format!("<{}>", projection.join(",")),
        });
    }

    let visible: Vec<NodeId> = alignment
        .moves()
        .iter()
        .filter_map(|m| match m {
            Move::Sync { leaf, .. } | Move::VisibleModel { leaf } => Some(*leaf),
            _ => None,
        })
        .collect();
    if replay(&Semantics::new(tree, root), &visible) {
        Ok(())
    } else {
        Err(AlignmentError::ModelProjection)
    }
}

pub fn check_alignment(trace: &Trace, tree: &ProcessTree, alignment: &Alignment) -> Result<(), AlignmentError> {
    check_alignment_at(trace, tree, tree.root(), alignment)
}

pub fn validate_alignment(trace: &Trace, tree: &ProcessTree, alignment: &Alignment) -> bool {
    check_alignment(trace, tree, alignment).is_ok()
}

/// Whether the given sequence of visible leaves can fire in order, with
/// arbitrary silent steps in between, ending in a final configuration.
pub fn replay(sem: &Semantics<'_>, visible: &[NodeId]) -> bool {
    let tree = sem.tree();
    let closure = |seed: Vec<ExecutionState>| -> HashSet<ExecutionState> {
        let mut seen: HashSet<ExecutionState> = HashSet::new();
        let mut stack = seed;
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for (step, next) in sem.enabled_steps(&s) {
                let silent = match step {
                    Step::Fire(leaf) => tree.label(leaf) == &Label::Tau,
                    _ => true,
                };
                if silent && !seen.contains(&next) {
                    stack.push(next);
                }
            }
        }
        seen
    };
    let mut current = closure(vec![sem.initial()]);
    for &leaf in visible {
        let fired: Vec<ExecutionState> = current
            .iter()
            .filter(|s| sem.open_leaves(s).any(|l| l == leaf))
            .map(|s| sem.apply(s, Step::Fire(leaf)))
            .collect();
        if fired.is_empty() {
            return false;
        }
        current = closure(fired);
    }
    current.iter().any(|s| sem.is_final(s))
}
