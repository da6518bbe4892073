//! Oracles shared by the integration tests. Everything here works directly on
//! the tree structure and never calls the code under test beyond reading
//! labels and children.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use treealign::approx::interpretation_cost;
use treealign::tree::{Label, NodeId, Operator, ProcessTree, TreeNode};
use treealign::TreeCharacteristics;

pub type Word = Vec<String>;

pub fn word(s: &str) -> Word {
    s.chars().map(|c| c.to_string()).collect()
}

/// Language of the subtree at `v` with every loop taking at most `unroll`
/// redo rounds.
pub fn language(tree: &ProcessTree, v: NodeId, unroll: usize) -> BTreeSet<Word> {
    let ch = tree.children(v);
    match tree.label(v) {
        Label::Activity(a) => [vec![a.clone()]].into(),
        Label::Tau => [Vec::new()].into(),
        Label::Operator(op) => {
            let langs: Vec<BTreeSet<Word>> = ch.iter().map(|&c| language(tree, c, unroll)).collect();
            match op {
                Operator::Sequence => langs
                    .into_iter()
                    .reduce(|acc, l| concat(&acc, &l))
                    .expect("operators have children"),
                Operator::Choice => langs.into_iter().flatten().collect(),
                Operator::Parallel => langs
                    .into_iter()
                    .reduce(|acc, l| {
                        let mut out = BTreeSet::new();
                        for x in &acc {
                            for y in &l {
                                shuffles(x, y, &mut Vec::new(), &mut out);
                            }
                        }
                        out
                    })
                    .expect("operators have children"),
                Operator::Loop => {
                    let (body, redo) = (&langs[0], &langs[1]);
                    let mut all = body.clone();
                    let mut current = body.clone();
                    for _ in 0..unroll {
                        current = concat(&concat(&current, redo), body);
                        all.extend(current.iter().cloned());
                    }
                    all
                }
            }
        }
    }
}

pub fn tree_language(tree: &ProcessTree, unroll: usize) -> BTreeSet<Word> {
    language(tree, tree.root(), unroll)
}

fn concat(a: &BTreeSet<Word>, b: &BTreeSet<Word>) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            let mut w = x.clone();
            w.extend(y.iter().cloned());
            out.insert(w);
        }
    }
    out
}

fn shuffles(x: &[String], y: &[String], prefix: &mut Word, out: &mut BTreeSet<Word>) {
    if x.is_empty() || y.is_empty() {
        let mut w = prefix.clone();
        w.extend(x.iter().chain(y).cloned());
        out.insert(w);
        return;
    }
    prefix.push(x[0].clone());
    shuffles(&x[1..], y, prefix, out);
    prefix.pop();
    prefix.push(y[0].clone());
    shuffles(x, &y[1..], prefix, out);
    prefix.pop();
}

pub fn levenshtein<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x.as_ref() != y.as_ref());
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Words of the most liberal interpretation of `c` with at most
/// `max_middle` activities between the first and the last one.
pub fn interpretation_words(c: &TreeCharacteristics, max_middle: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if c.accepts_empty {
        out.push(Vec::new());
    }
    for s in c.start.intersection(&c.end) {
        out.push(vec![s.clone()]);
    }
    let alphabet: Vec<&String> = c.activities.iter().collect();
    let mut middles: Vec<Word> = vec![Vec::new()];
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..max_middle {
        layer = layer
            .iter()
            .flat_map(|m| {
                alphabet.iter().map(move |a| {
                    let mut w = m.clone();
                    w.push((*a).clone());
                    w
                })
            })
            .collect();
        middles.extend(layer.iter().cloned());
    }
    for s in &c.start {
        for e in &c.end {
            for m in &middles {
                let mut w = vec![s.clone()];
                w.extend(m.iter().cloned());
                w.push(e.clone());
                out.push(w);
            }
        }
    }
    out
}

/// Minimal edit distance from `trace` to the enumerated interpretation.
pub fn interpretation_distance(trace: &[String], c: &TreeCharacteristics) -> usize {
    interpretation_words(c, trace.len() + 1)
        .iter()
        .map(|w| levenshtein(trace, w))
        .min()
        // a tree without activities accepts only the empty word
        .unwrap_or(trace.len())
}

/// Minimum over all 2^n assignments of positions to the two children.
pub fn brute_force_and(trace: &[String], c1: &TreeCharacteristics, c2: &TreeCharacteristics) -> u32 {
    let n = trace.len();
    (0u32..1 << n)
        .map(|mask| {
            let (mut s1, mut s2) = (Vec::new(), Vec::new());
            for (i, x) in trace.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    s1.push(x.clone());
                } else {
                    s2.push(x.clone());
                }
            }
            interpretation_cost(&s1, c1) + interpretation_cost(&s2, c2)
        })
        .min()
        .expect("at least one assignment")
}

/// Minimum over alternating segmentations `1,2,…,1` of the trace. Two
/// consecutive empty segments can always be dropped without raising the
/// cost, so only segmentations without such pairs are enumerated.
pub fn brute_force_loop(trace: &[String], c1: &TreeCharacteristics, c2: &TreeCharacteristics) -> u32 {
    fn go(
        trace: &[String],
        cs: [&TreeCharacteristics; 2],
        pos: usize,
        child: usize,
        last_empty: bool,
        acc: u32,
        best: &mut u32,
    ) {
        let n = trace.len();
        for end in pos..=n {
            if end == pos && last_empty {
                continue;
            }
            let cost = acc + interpretation_cost(&trace[pos..end], cs[child]);
            if child == 0 && end == n {
                *best = (*best).min(cost);
            }
            go(trace, cs, end, 1 - child, end == pos, cost, best);
        }
    }
    let mut best = u32::MAX;
    go(trace, [c1, c2], 0, 0, false, 0, &mut best);
    best
}

/// Minimum over all split positions.
pub fn brute_force_seq(trace: &[String], c1: &TreeCharacteristics, c2: &TreeCharacteristics) -> u32 {
    (0..=trace.len())
        .map(|p| interpretation_cost(&trace[..p], c1) + interpretation_cost(&trace[p..], c2))
        .min()
        .expect("at least one position")
}

/// Random binary trees over a small alphabet.
pub fn arb_tree(alphabet: &'static [&'static str], depth: u32) -> impl Strategy<Value = ProcessTree> {
    let leaf = prop_oneof![
        1 => Just(TreeNode::Tau),
        6 => proptest::sample::select(alphabet).prop_map(TreeNode::activity),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        (
            prop_oneof![
                Just(Operator::Sequence),
                Just(Operator::Choice),
                Just(Operator::Parallel),
                Just(Operator::Loop),
            ],
            inner.clone(),
            inner,
        )
            .prop_map(|(op, a, b)| TreeNode::op(op, vec![a, b]))
    })
    .prop_map(|root| ProcessTree::from_node(root).expect("binary trees are valid"))
}

/// Random n-ary trees (loops stay binary).
pub fn arb_nary_tree(alphabet: &'static [&'static str]) -> impl Strategy<Value = ProcessTree> {
    let leaf = prop_oneof![
        1 => Just(TreeNode::Tau),
        6 => proptest::sample::select(alphabet).prop_map(TreeNode::activity),
    ];
    leaf.prop_recursive(3, 8, 4, |inner| {
        prop_oneof![
            (
                prop_oneof![
                    Just(Operator::Sequence),
                    Just(Operator::Choice),
                    Just(Operator::Parallel),
                ],
                proptest::collection::vec(inner.clone(), 2..=4),
            )
                .prop_map(|(op, children)| TreeNode::op(op, children)),
            (inner.clone(), inner).prop_map(|(a, b)| TreeNode::op(Operator::Loop, vec![a, b])),
        ]
    })
    .prop_map(|root| ProcessTree::from_node(root).expect("generated trees are valid"))
}

pub fn arb_word(alphabet: &'static [&'static str], max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(proptest::sample::select(alphabet).prop_map(str::to_string), 0..=max_len)
}

/// Leaves fired by one random execution of the tree (tau leaves included),
/// loops redoing at most `max_redo` times.
pub fn random_run<R: rand::Rng>(rng: &mut R, tree: &ProcessTree, v: NodeId, max_redo: usize) -> Vec<NodeId> {
    let ch = tree.children(v);
    match tree.label(v) {
        Label::Activity(_) | Label::Tau => vec![v],
        Label::Operator(Operator::Sequence) => ch.iter().flat_map(|&c| random_run(rng, tree, c, max_redo)).collect(),
        Label::Operator(Operator::Choice) => {
            let c = ch[rng.gen_range(0..ch.len())];
            random_run(rng, tree, c, max_redo)
        }
        Label::Operator(Operator::Parallel) => {
            let mut a = random_run(rng, tree, ch[0], max_redo);
            let mut b = random_run(rng, tree, ch[1], max_redo);
            a.reverse();
            b.reverse();
            let mut out = Vec::new();
            while !a.is_empty() || !b.is_empty() {
                let take_a = b.is_empty() || (!a.is_empty() && rng.gen_bool(0.5));
                out.push(if take_a { a.pop() } else { b.pop() }.expect("non-empty"));
            }
            out
        }
        Label::Operator(Operator::Loop) => {
            let mut out = random_run(rng, tree, ch[0], max_redo);
            for _ in 0..rng.gen_range(0..=max_redo) {
                out.extend(random_run(rng, tree, ch[1], max_redo));
                out.extend(random_run(rng, tree, ch[0], max_redo));
            }
            out
        }
    }
}

/// A valid alignment of `trace` and the run `leaves`: a random monotone
/// matching of equal labels becomes synchronous moves, everything else log
/// or model moves.
pub fn random_alignment<R: rand::Rng>(
    rng: &mut R,
    tree: &ProcessTree,
    trace: &[String],
    leaves: &[NodeId],
) -> treealign::Alignment {
    use treealign::Move;
    let mut moves = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < trace.len() || j < leaves.len() {
        let label = leaves.get(j).map(|&v| tree.label(v));
        match label {
            Some(Label::Tau) => {
                moves.push(Move::InvisibleModel { leaf: leaves[j] });
                j += 1;
            }
            Some(Label::Activity(a)) if i < trace.len() && trace[i] == *a && rng.gen_bool(0.7) => {
                moves.push(Move::Sync {
                    activity: a.clone(),
                    leaf: leaves[j],
                });
                i += 1;
                j += 1;
            }
            _ => {
                let log_move = j == leaves.len() || (i < trace.len() && rng.gen_bool(0.5));
                if log_move {
                    moves.push(Move::Log {
                        activity: trace[i].clone(),
                    });
                    i += 1;
                } else {
                    moves.push(Move::VisibleModel { leaf: leaves[j] });
                    j += 1;
                }
            }
        }
    }
    treealign::Alignment::new(moves)
}
