//! Operational semantics of a (binary) process tree.
//!
//! A configuration assigns every node of the subtree one of three phases:
//! future, open or closed. Steps are either leaf firings (observable for
//! activity leaves, silent for `tau` leaves) or silent control decisions
//! (which branch of a choice to take, whether a loop exits or redoes).
//! Everything else is forced and applied eagerly, so every configuration
//! handed out is normalized:
//!
//! * a sequence opens its first child, then its second, then closes;
//! * a parallel node opens both children and closes once both are closed;
//! * a choice closes as soon as its chosen child is closed;
//! * a loop opens its body; after the redo part closes it re-opens the body.
//!
//! Closing a node resets its descendants to future, so a configuration never
//! remembers completed work below a closed node and loop iterations are not
//! counted. The reachable configuration space is therefore finite.

use crate::tree::{Label, NodeId, Operator, ProcessTree};

const FUTURE: u8 = 0;
const OPEN: u8 = 1;
const CLOSED: u8 = 2;

/// Opaque, hashable configuration of a subtree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecutionState(Box<[u8]>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// A leaf executes; observable iff the leaf carries an activity.
    Fire(NodeId),
    /// A choice node commits to one of its children.
    Choose { node: NodeId, child: NodeId },
    /// A loop whose body just completed terminates.
    LoopExit(NodeId),
    /// A loop whose body just completed starts its redo part.
    LoopRedo(NodeId),
}

impl Step {
    pub fn is_silent_control(&self) -> bool {
        !matches!(self, Step::Fire(_))
    }
}

/// Transition system of the subtree rooted at `root`. Node ids in steps refer
/// to the full tree.
#[derive(Debug, Clone, Copy)]
pub struct Semantics<'t> {
    tree: &'t ProcessTree,
    root: NodeId,
}

impl<'t> Semantics<'t> {
    pub fn new(tree: &'t ProcessTree, root: NodeId) -> Self {
        debug_assert!(tree.contains(root));
        Semantics { tree, root }
    }

    pub fn of_tree(tree: &'t ProcessTree) -> Self {
        Self::new(tree, tree.root())
    }

    pub fn tree(&self) -> &'t ProcessTree {
        self.tree
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    fn local(&self, v: NodeId) -> usize {
        v.0 - self.root.0
    }

    fn size(&self) -> usize {
        self.tree.range(self.root).len()
    }

    pub fn initial(&self) -> ExecutionState {
        let mut phases = vec![FUTURE; self.size()];
        phases[0] = OPEN;
        self.normalize(&mut phases);
        ExecutionState(phases.into_boxed_slice())
    }

    pub fn is_final(&self, state: &ExecutionState) -> bool {
        state.0[0] == CLOSED
    }

    /// Leaves currently able to fire.
    pub fn open_leaves<'s>(&self, state: &'s ExecutionState) -> impl Iterator<Item = NodeId> + 's
    where
        't: 's,
    {
        let offset = self.root.0;
        let tree = self.tree;
        state
            .0
            .iter()
            .enumerate()
            .filter(move |&(i, &p)| p == OPEN && tree.is_leaf(NodeId(i + offset)))
            .map(move |(i, _)| NodeId(i + offset))
    }

    /// All steps enabled in `state` with their (normalized) successors, in
    /// node order.
    pub fn enabled_steps(&self, state: &ExecutionState) -> Vec<(Step, ExecutionState)> {
        let mut out = Vec::new();
        for (i, &phase) in state.0.iter().enumerate() {
            if phase != OPEN {
                continue;
            }
            let v = NodeId(i + self.root.0);
            match self.tree.label(v) {
                Label::Activity(_) | Label::Tau => out.push(Step::Fire(v)),
                Label::Operator(Operator::Choice) => {
                    let ch = self.tree.children(v);
                    if ch.iter().all(|&c| state.0[self.local(c)] == FUTURE) {
                        out.extend(ch.iter().map(|&c| Step::Choose { node: v, child: c }));
                    }
                }
                Label::Operator(Operator::Loop) => {
                    let ch = self.tree.children(v);
                    if state.0[self.local(ch[0])] == CLOSED && state.0[self.local(ch[1])] == FUTURE {
                        out.push(Step::LoopExit(v));
                        out.push(Step::LoopRedo(v));
                    }
                }
                Label::Operator(_) => {}
            }
        }
        out.into_iter()
            .map(|step| {
                let next = self.apply(state, step);
                (step, next)
            })
            .collect()
    }

    /// Applies an enabled step. The caller guarantees that `step` came from
    /// [`Semantics::enabled_steps`] for this state.
    pub fn apply(&self, state: &ExecutionState, step: Step) -> ExecutionState {
        let mut phases = state.0.to_vec();
        match step {
            Step::Fire(leaf) => phases[self.local(leaf)] = CLOSED,
            Step::Choose { child, .. } => phases[self.local(child)] = OPEN,
            Step::LoopExit(node) => self.close(&mut phases, self.local(node)),
            Step::LoopRedo(node) => {
                let ch = self.tree.children(node);
                phases[self.local(ch[0])] = FUTURE;
                phases[self.local(ch[1])] = OPEN;
            }
        }
        self.normalize(&mut phases);
        ExecutionState(phases.into_boxed_slice())
    }

    fn close(&self, phases: &mut [u8], i: usize) {
        phases[i] = CLOSED;
        let end = self.local(NodeId(self.tree.range(NodeId(i + self.root.0)).end));
        phases[i + 1..end].fill(FUTURE);
    }

    fn normalize(&self, phases: &mut [u8]) {
        loop {
            let mut changed = false;
            for i in 0..phases.len() {
                if phases[i] != OPEN {
                    continue;
                }
                let v = NodeId(i + self.root.0);
                let op = match self.tree.label(v) {
                    Label::Operator(op) => *op,
                    _ => continue,
                };
                let ch = self.tree.children(v);
                let (c1, c2) = (self.local(ch[0]), self.local(ch[1]));
                match (op, phases[c1], phases[c2]) {
                    (Operator::Sequence, FUTURE, FUTURE) => phases[c1] = OPEN,
                    (Operator::Sequence, CLOSED, FUTURE) => phases[c2] = OPEN,
                    (Operator::Sequence, _, CLOSED) => self.close(phases, i),
                    (Operator::Parallel, FUTURE, FUTURE) => {
                        phases[c1] = OPEN;
                        phases[c2] = OPEN;
                    }
                    (Operator::Parallel, CLOSED, CLOSED) => self.close(phases, i),
                    (Operator::Choice, CLOSED, _) | (Operator::Choice, _, CLOSED) => self.close(phases, i),
                    (Operator::Loop, FUTURE, FUTURE) => phases[c1] = OPEN,
                    (Operator::Loop, FUTURE, CLOSED) => {
                        phases[c2] = FUTURE;
                        phases[c1] = OPEN;
                    }
                    _ => continue,
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }
}
