//! Seeded generation of random process trees, sampled traces and noise.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::log::{EventLog, Trace};
use crate::tree::{Label, NodeId, Operator, ProcessTree, TreeNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("noise probability must lie in [0, 1], got {0}")]
    NoiseProbability(f64),
    #[error("tree size must be at least 1")]
    EmptyTree,
    #[error("at least one noise kind is required")]
    NoNoiseKinds,
    #[error("unknown noise kind '{0}' (expected delete, relabel or insert)")]
    UnknownNoiseKind(String),
}

/// Shape parameters of random trees.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeShape {
    /// Number of leaves.
    pub leaves: usize,
    /// Number of distinct activity labels; labels repeat when smaller than
    /// the number of leaves.
    pub alphabet: usize,
    pub tau_probability: f64,
    /// Probability of a loop at an operator node; the remaining mass is
    /// split evenly over sequence, choice and parallel.
    pub loop_probability: f64,
}

impl TreeShape {
    pub fn new(leaves: usize) -> Self {
        TreeShape {
            leaves,
            alphabet: leaves,
            tau_probability: 0.1,
            loop_probability: 0.2,
        }
    }
}

/// Activity names `a`..`z`, `aa`, `ab`, ...
pub fn activity_name(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

pub fn alphabet(size: usize) -> Vec<String> {
    (0..size).map(activity_name).collect()
}

/// A random binary tree with `shape.leaves` leaves.
pub fn random_tree<R: Rng>(rng: &mut R, shape: &TreeShape) -> Result<ProcessTree, SynthError> {
    if shape.leaves == 0 {
        return Err(SynthError::EmptyTree);
    }
    let names = alphabet(shape.alphabet.max(1));
    let root = random_node(rng, shape, &names, shape.leaves);
    Ok(ProcessTree::from_node(root).expect("generated trees are well formed"))
}

fn random_node<R: Rng>(rng: &mut R, shape: &TreeShape, names: &[String], leaves: usize) -> TreeNode {
    if leaves == 1 {
        return if rng.gen_bool(shape.tau_probability) {
            TreeNode::Tau
        } else {
            TreeNode::activity(names.choose(rng).expect("non-empty alphabet").clone())
        };
    }
    let op = if rng.gen_bool(shape.loop_probability) {
        Operator::Loop
    } else {
        *[Operator::Sequence, Operator::Choice, Operator::Parallel]
            .choose(rng)
            .expect("non-empty")
    };
    let left = rng.gen_range(1..leaves);
    TreeNode::op(
        op,
        vec![
            random_node(rng, shape, names, left),
            random_node(rng, shape, names, leaves - left),
        ],
    )
}

/// Maximum number of redo iterations of a loop during sampling.
pub const MAX_REDO: usize = 3;

/// A trace of the tree obtained by random execution: choices are uniform,
/// parallel branches are merged uniformly at random and loops redo with
/// probability 1/2 per iteration, at most [`MAX_REDO`] times.
pub fn sample_trace<R: Rng>(rng: &mut R, tree: &ProcessTree) -> Trace {
    let mut out = Vec::new();
    sample_into(rng, tree, tree.root(), &mut out);
    Trace::from_vec_unchecked(out)
}

fn sample_into<R: Rng>(rng: &mut R, tree: &ProcessTree, v: NodeId, out: &mut Vec<String>) {
    let ch = tree.children(v);
    match tree.label(v) {
        Label::Activity(a) => out.push(a.clone()),
        Label::Tau => {}
        Label::Operator(Operator::Sequence) => {
            for &c in ch {
                sample_into(rng, tree, c, out);
            }
        }
        Label::Operator(Operator::Choice) => {
            let c = *ch.choose(rng).expect("operators have children");
            sample_into(rng, tree, c, out);
        }
        Label::Operator(Operator::Parallel) => {
            let mut branches: Vec<Vec<String>> = ch
                .iter()
                .map(|&c| {
                    let mut b = Vec::new();
                    sample_into(rng, tree, c, &mut b);
                    b.reverse();
                    b
                })
                .collect();
            while branches.iter().any(|b| !b.is_empty()) {
                let remaining: usize = branches.iter().map(Vec::len).sum();
                let mut pick = rng.gen_range(0..remaining);
                for b in branches.iter_mut() {
                    if pick < b.len() {
                        out.push(b.pop().expect("non-empty"));
                        break;
                    }
                    pick -= b.len();
                }
            }
        }
        Label::Operator(Operator::Loop) => {
            sample_into(rng, tree, ch[0], out);
            let mut redo = 0;
            while redo < MAX_REDO && rng.gen_bool(0.5) {
                sample_into(rng, tree, ch[1], out);
                sample_into(rng, tree, ch[0], out);
                redo += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Delete,
    Relabel,
    Insert,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Delete, NoiseKind::Relabel, NoiseKind::Insert];
}

impl FromStr for NoiseKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "delete" => Ok(NoiseKind::Delete),
            "relabel" => Ok(NoiseKind::Relabel),
            "insert" => Ok(NoiseKind::Insert),
            other => Err(SynthError::UnknownNoiseKind(other.to_string())),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Delete => "delete",
            NoiseKind::Relabel => "relabel",
            NoiseKind::Insert => "insert",
        })
    }
}

/// Per-event noise: with probability `probability` an event is deleted,
/// relabeled to another activity, or preceded by an inserted activity, the
/// kind drawn uniformly from `kinds`.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    pub probability: f64,
    pub kinds: Vec<NoiseKind>,
}

impl Noise {
    pub fn new(probability: f64, kinds: Vec<NoiseKind>) -> Result<Self, SynthError> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(SynthError::NoiseProbability(probability));
        }
        if kinds.is_empty() {
            return Err(SynthError::NoNoiseKinds);
        }
        Ok(Noise { probability, kinds })
    }

    pub fn none() -> Self {
        Noise {
            probability: 0.0,
            kinds: NoiseKind::ALL.to_vec(),
        }
    }

    pub fn apply<R: Rng>(&self, rng: &mut R, trace: &Trace, names: &[String]) -> Trace {
        let mut out = Vec::with_capacity(trace.len());
        for x in trace.iter() {
            if self.probability == 0.0 || !rng.gen_bool(self.probability) {
                out.push(x.to_string());
                continue;
            }
            match *self.kinds.choose(rng).expect("non-empty") {
                NoiseKind::Delete => {}
                NoiseKind::Relabel => {
                    let others: Vec<&String> = names.iter().filter(|n| *n != x).collect();
                    match others.choose(rng) {
                        Some(n) => out.push((*n).clone()),
                        None => out.push(x.to_string()),
                    }
                }
                NoiseKind::Insert => {
                    out.push(names.choose(rng).expect("non-empty alphabet").clone());
                    out.push(x.to_string());
                }
            }
        }
        Trace::from_vec_unchecked(out)
    }
}

/// `n_traces` sampled traces with noise, merged into variants.
pub fn sample_log<R: Rng>(
    rng: &mut R,
    tree: &ProcessTree,
    n_traces: usize,
    noise: &Noise,
    names: &[String],
) -> EventLog {
    let traces: Vec<Trace> = (0..n_traces)
        .map(|_| {
            let clean = sample_trace(rng, tree);
            noise.apply(rng, &clean, names)
        })
        .collect();
    EventLog::from_traces(traces)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub n_trees: usize,
    pub shape: TreeShape,
    pub n_traces: usize,
    pub noise: Noise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub trees: Vec<ProcessTree>,
    /// One log per tree.
    pub logs: Vec<EventLog>,
}

/// Deterministic corpus: identical configurations give identical corpora.
pub fn synthesize(config: &CorpusConfig) -> Result<Corpus, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let names = alphabet(config.shape.alphabet.max(1));
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut logs = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let tree = random_tree(&mut rng, &config.shape)?;
        logs.push(sample_log(&mut rng, &tree, config.n_traces, &config.noise, &names));
        trees.push(tree);
    }
    Ok(Corpus { trees, logs })
}
