//! Gray-box summaries of subtrees: alphabet, possible start and end
//! activities, and whether the empty trace is accepted.

use std::collections::BTreeSet;

use crate::tree::{Label, NodeId, Operator, ProcessTree};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeCharacteristics {
    /// All activity labels in the subtree.
    pub activities: BTreeSet<String>,
    /// Activities that may start a non-empty trace.
    pub start: BTreeSet<String>,
    /// Activities that may end a non-empty trace.
    pub end: BTreeSet<String>,
    pub accepts_empty: bool,
    /// Length of the shortest trace.
    pub min_len: usize,
    /// Length of the longest trace, `None` if unbounded.
    pub max_len: Option<usize>,
}

impl TreeCharacteristics {
    fn activity(a: &str) -> Self {
        let set: BTreeSet<String> = [a.to_string()].into();
        TreeCharacteristics {
            activities: set.clone(),
            start: set.clone(),
            end: set,
            accepts_empty: false,
            min_len: 1,
            max_len: Some(1),
        }
    }

    fn tau() -> Self {
        TreeCharacteristics {
            accepts_empty: true,
            max_len: Some(0),
            ..Default::default()
        }
    }

    /// Some activity is both a possible start and end activity.
    pub fn start_end_overlap(&self) -> bool {
        self.start.iter().any(|a| self.end.contains(a))
    }

    /// How far `len` lies outside the range of trace lengths; a lower bound
    /// on the edit distance of any trace of that length.
    pub fn length_gap(&self, len: usize) -> usize {
        let below = self.min_len.saturating_sub(len);
        let above = self.max_len.map_or(0, |max| len.saturating_sub(max));
        below + above
    }

    fn combine(op: Operator, c1: &Self, c2: &Self) -> Self {
        let union = |a: &BTreeSet<String>, b: &BTreeSet<String>| a | b;
        let activities = union(&c1.activities, &c2.activities);
        let (min_len, max_len) = match op {
            Operator::Sequence | Operator::Parallel => {
                (c1.min_len + c2.min_len, c1.max_len.zip(c2.max_len).map(|(a, b)| a + b))
            }
            Operator::Choice => (
                c1.min_len.min(c2.min_len),
                c1.max_len.zip(c2.max_len).map(|(a, b)| a.max(b)),
            ),
            Operator::Loop => (
                c1.min_len,
                (c1.max_len == Some(0) && c2.max_len == Some(0)).then_some(0),
            ),
        };
        let base = match op {
            Operator::Sequence => TreeCharacteristics {
                activities,
                start: if c1.accepts_empty {
                    union(&c1.start, &c2.start)
                } else {
                    c1.start.clone()
                },
                end: if c2.accepts_empty {
                    union(&c1.end, &c2.end)
                } else {
                    c2.end.clone()
                },
                accepts_empty: c1.accepts_empty && c2.accepts_empty,
                ..Default::default()
            },
            Operator::Parallel | Operator::Choice => TreeCharacteristics {
                activities,
                start: union(&c1.start, &c2.start),
                end: union(&c1.end, &c2.end),
                accepts_empty: if op == Operator::Parallel {
                    c1.accepts_empty && c2.accepts_empty
                } else {
                    c1.accepts_empty || c2.accepts_empty
                },
                ..Default::default()
            },
            Operator::Loop => {
                let (start, end) = if c1.accepts_empty {
                    (union(&c1.start, &c2.start), union(&c1.end, &c2.end))
                } else {
                    (c1.start.clone(), c1.end.clone())
                };
                TreeCharacteristics {
                    activities,
                    start,
                    end,
                    accepts_empty: c1.accepts_empty,
                    ..Default::default()
                }
            }
        };
        TreeCharacteristics {
            min_len,
            max_len,
            ..base
        }
    }
}

/// Characteristics of every subtree, indexed by node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicsTable {
    entries: Vec<TreeCharacteristics>,
}

impl CharacteristicsTable {
    pub fn get(&self, v: NodeId) -> &TreeCharacteristics {
        &self.entries[v.0]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &TreeCharacteristics)> {
        self.entries.iter().enumerate().map(|(i, c)| (NodeId(i), c))
    }

    /// CSV dump: `node,A,SA,EA,accepts_empty`, sets joined with `|`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["node", "A", "SA", "EA", "accepts_empty"])
            .expect("in-memory write");
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join("|");
        for (v, c) in self.iter() {
            w.write_record([
                v.0.to_string(),
                join(&c.activities),
                join(&c.start),
                join(&c.end),
                c.accepts_empty.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }
}

/// Bottom-up computation over a binary tree.
///
/// Panics if an operator node does not have exactly two children; binarize
/// first.
pub fn compute_characteristics(tree: &ProcessTree) -> CharacteristicsTable {
    let mut entries = vec![TreeCharacteristics::default(); tree.len()];
    // reverse pre-order visits children before parents
    for v in tree.node_ids().collect::<Vec<_>>().into_iter().rev() {
        entries[v.0] = match tree.label(v) {
            Label::Activity(a) => TreeCharacteristics::activity(a),
            Label::Tau => TreeCharacteristics::tau(),
            Label::Operator(op) => {
                let ch = tree.children(v);
                assert_eq!(ch.len(), 2, "characteristics require a binary tree");
                TreeCharacteristics::combine(*op, &entries[ch[0].0], &entries[ch[1].0])
            }
        };
    }
    CharacteristicsTable { entries }
}
