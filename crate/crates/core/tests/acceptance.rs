//! Exit criteria. Everything runs inside one test so the timing comparison
//! is not disturbed by concurrently running cases; each criterion prints one
//! `[PASS]` or `[FAIL]` line and the test fails if any criterion does.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{brute_force_and, brute_force_loop, interpretation_distance, language};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treealign::align::{check_alignment, optimal_align, optimal_align_at};
use treealign::approx::{compose, interpretation_cost, split_and, split_loop, split_seq};
use treealign::eval::{run_grid, GridConfig};
use treealign::synth::{alphabet, random_tree, sample_log, sample_trace, Noise, NoiseKind, TreeShape};
use treealign::tree::{NodeId, Operator, TreeNode};
use treealign::{approximate_align, compute_characteristics, ApproxParams, EventLog, ProcessTree, Trace};

const T0: &str = "->( *( X( ->(a,b), +(c,d) ), tau ), +(e,a) )";
const GRID: [usize; 3] = [1, 3, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn grid_params() -> Vec<ApproxParams> {
    GRID.iter()
        .flat_map(|&tl| GRID.iter().map(move |&th| ApproxParams::new(tl, th).unwrap()))
        .collect()
}

fn abcf_cost() -> Outcome {
    let t0 = ProcessTree::parse(T0).unwrap();
    let sigma = Trace::from_letters("abcf");
    let start = Instant::now();
    let a = optimal_align(&sigma, &t0);
    let elapsed = start.elapsed();
    let valid = check_alignment(&sigma, &t0, &a);
    outcome(
        a.cost() == 4 && valid.is_ok() && elapsed < Duration::from_secs(1),
        format!(
            "cost {} (want 4), valid {:?}, {:.3}s (< 1s)",
            a.cost(),
            valid.is_ok(),
            elapsed.as_secs_f64()
        ),
    )
}

fn sequence_split() -> Outcome {
    let t0 = ProcessTree::parse(T0).unwrap();
    let chars = compute_characteristics(&t0);
    let sigma = Trace::from_letters("dcabcdae");
    let s = split_seq(&sigma, &t0, t0.root(), &chars);
    let texts: Vec<String> = s.parts.iter().map(|p| p.trace.iter().collect()).collect();
    let children = t0.children(t0.root());
    let subs = s
        .parts
        .iter()
        .map(|p| optimal_align_at(&p.trace, &t0, children[p.child.index()]))
        .collect();
    let composed = compose(&sigma, &s, subs).map_err(|e| e.to_string());
    let valid = composed
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|a| check_alignment(&sigma, &t0, a).map_err(|e| e.to_string()));
    outcome(
        texts == ["dcabcd", "ae"] && s.objective == 0 && valid.is_ok(),
        format!("parts {texts:?}, objective {}, composed valid: {valid:?}", s.objective),
    )
}

fn parallel_split_and_compose() -> Outcome {
    let t = ProcessTree::parse("+(->(a,b), *(c,d))").unwrap();
    let chars = compute_characteristics(&t);
    let sigma = Trace::from_letters("cadcb");
    let s = split_and(&sigma, &t, t.root(), &chars);
    let children = t.children(t.root());
    let subs = s
        .parts
        .iter()
        .map(|p| optimal_align_at(&p.trace, &t, children[p.child.index()]))
        .collect();
    match compose(&sigma, &s, subs) {
        Ok(a) => {
            let pairs = a.label_pairs(&t);
            let expected: Vec<(String, String)> = "cadcb".chars().map(|c| (c.to_string(), c.to_string())).collect();
            let valid = check_alignment(&sigma, &t, &a).is_ok();
            outcome(
                pairs == expected && a.cost() == 0 && valid,
                format!("pairs {pairs:?}, cost {}, valid {valid}", a.cost()),
            )
        }
        Err(e) => outcome(false, format!("compose failed: {e}")),
    }
}

/// Random (tree, noisy trace) instances with at most 20 nodes and 20 events.
fn small_instances(n: usize, seed: u64) -> Vec<(ProcessTree, Trace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Noise::new(0.2, NoiseKind::ALL.to_vec()).unwrap();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let leaves = rng.gen_range(1..=10);
        let shape = TreeShape {
            alphabet: rng.gen_range(2..=8),
            ..TreeShape::new(leaves)
        };
        let tree = random_tree(&mut rng, &shape).unwrap();
        assert!(tree.len() <= 20);
        let names = alphabet(shape.alphabet);
        let clean = sample_trace(&mut rng, &tree);
        let trace = noise.apply(&mut rng, &clean, &names);
        if trace.len() <= 20 {
            out.push((tree, trace));
        }
    }
    out
}

/// Criteria 4 and 5 share one run over the instances.
fn validity_dominance_and_guard() -> (Outcome, Outcome) {
    let instances = small_instances(500, 4);
    let params = grid_params();
    let start = Instant::now();
    let (mut invalid, mut dominated, mut guard_cases, mut guard_mismatch) = (0, 0, 0, 0);
    let mut first_problem = None;
    for (i, (tree, trace)) in instances.iter().enumerate() {
        let chars = compute_characteristics(tree);
        let exact = optimal_align(trace, tree);
        if check_alignment(trace, tree, &exact).is_err() {
            invalid += 1;
        }
        for &p in &params {
            let a = approximate_align(trace, tree, &chars, p);
            if let Err(e) = check_alignment(trace, tree, &a) {
                invalid += 1;
                first_problem.get_or_insert(format!("instance {i} {p:?}: {e}"));
            }
            if a.cost() < exact.cost() {
                dominated += 1;
                first_problem.get_or_insert(format!("instance {i} {p:?}: {} < {}", a.cost(), exact.cost()));
            }
            if p.stops(trace.len(), tree.height()) {
                guard_cases += 1;
                if a.cost() != exact.cost() {
                    guard_mismatch += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let suite = outcome(
        invalid == 0 && dominated == 0 && elapsed < Duration::from_secs(300),
        format!(
            "{} instances x {} cells: {invalid} invalid, {dominated} below optimal, {:.1}s (< 300s){}",
            instances.len(),
            params.len(),
            elapsed.as_secs_f64(),
            first_problem.map(|p| format!("; first: {p}")).unwrap_or_default()
        ),
    );
    let guard = outcome(
        guard_cases > 0 && guard_mismatch == 0,
        format!("{guard_cases} guarded runs, {guard_mismatch} differ from optimal cost"),
    );
    (suite, guard)
}

fn random_subtree(rng: &mut ChaCha8Rng, names: usize) -> TreeNode {
    let leaves = rng.gen_range(1..=3);
    let shape = TreeShape {
        alphabet: names,
        ..TreeShape::new(leaves)
    };
    let t = random_tree(rng, &shape).unwrap();
    t.to_node(t.root())
}

fn random_word(rng: &mut ChaCha8Rng, symbols: &[String], max_len: usize) -> Vec<String> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| symbols.choose(rng).unwrap().clone()).collect()
}

fn splitter_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut symbols = alphabet(3);
    symbols.push("x".to_string());
    let mut mismatches = Vec::new();
    let mut counts = [0usize; 3];
    for op in [Operator::Parallel, Operator::Loop] {
        for _ in 0..200 {
            let node = TreeNode::op(op, vec![random_subtree(&mut rng, 3), random_subtree(&mut rng, 3)]);
            let tree = ProcessTree::from_node(node).unwrap();
            let chars = compute_characteristics(&tree);
            let w = random_word(&mut rng, &symbols, 10);
            let sigma = Trace::new(w.iter().cloned()).unwrap();
            let ch = tree.children(tree.root());
            let (c1, c2) = (chars.get(ch[0]), chars.get(ch[1]));
            let (got, want) = match op {
                Operator::Parallel => (
                    split_and(&sigma, &tree, tree.root(), &chars).objective,
                    brute_force_and(&w, c1, c2),
                ),
                _ => (
                    split_loop(&sigma, &tree, tree.root(), &chars).objective,
                    brute_force_loop(&w, c1, c2),
                ),
            };
            counts[usize::from(op == Operator::Loop)] += 1;
            if got != want {
                mismatches.push(format!("{op:?} {tree} on {sigma}: {got} vs {want}"));
            }
        }
    }
    for _ in 0..200 {
        let leaves = rng.gen_range(1..=5);
        let shape = TreeShape {
            alphabet: 3,
            ..TreeShape::new(leaves)
        };
        let tree = random_tree(&mut rng, &shape).unwrap();
        let chars = compute_characteristics(&tree);
        let v = NodeId(rng.gen_range(0..tree.len()));
        let w = random_word(&mut rng, &symbols, 6);
        let got = interpretation_cost(&w, chars.get(v)) as usize;
        let want = interpretation_distance(&w, chars.get(v));
        counts[2] += 1;
        if got != want {
            mismatches.push(format!("interpretation of {} at {v} on {w:?}: {got} vs {want}", tree));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "and {}, loop {}, interpretation {} instances; {} mismatches{}",
            counts[0],
            counts[1],
            counts[2],
            mismatches.len(),
            mismatches.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )
}

fn characteristics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut problems = Vec::new();
    let n = 200;
    for _ in 0..n {
        let leaves = rng.gen_range(1..=5);
        let shape = TreeShape {
            alphabet: 3,
            ..TreeShape::new(leaves)
        };
        let tree = random_tree(&mut rng, &shape).unwrap();
        assert!(tree.len() <= 10);
        let chars = compute_characteristics(&tree);
        for v in tree.node_ids() {
            let c = chars.get(v);
            let once = language(&tree, v, 1);
            let twice = language(&tree, v, 2);
            let letters: BTreeSet<String> = twice.iter().flatten().cloned().collect();
            let firsts =
                |l: &BTreeSet<Vec<String>>| l.iter().filter_map(|w| w.first().cloned()).collect::<BTreeSet<_>>();
            let lasts = |l: &BTreeSet<Vec<String>>| l.iter().filter_map(|w| w.last().cloned()).collect::<BTreeSet<_>>();
            let ok = c.activities == letters
                && c.accepts_empty == twice.contains(&Vec::new())
                && c.start == firsts(&once)
                && c.end == lasts(&once)
                && firsts(&twice).is_subset(&c.start)
                && lasts(&twice).is_subset(&c.end);
            if !ok {
                problems.push(format!("{tree} at {v}"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{n} trees, {} node mismatches{}",
            problems.len(),
            problems.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )
}

/// 100 distinct noisy variants of a 30-leaf tree of height 9, average
/// length 27.7.
fn speedup_corpus() -> (ProcessTree, EventLog) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let tree = random_tree(&mut rng, &TreeShape::new(30)).unwrap();
    let names = alphabet(30);
    let noise = Noise::new(0.1, NoiseKind::ALL.to_vec()).unwrap();
    let mut seen = BTreeSet::new();
    let mut traces = Vec::new();
    while traces.len() < 100 {
        let clean = sample_trace(&mut rng, &tree);
        let t = noise.apply(&mut rng, &clean, &names);
        if seen.insert(t.clone()) {
            traces.push(t);
        }
    }
    (tree, EventLog::from_traces(traces))
}

fn speedup_trend() -> Outcome {
    let (tree, log) = speedup_corpus();
    let variants = log.variants().len();
    let avg_len = log.variants().iter().map(|v| v.trace.len()).sum::<usize>() as f64 / variants as f64;
    if tree.height() < 8 || variants != 100 || avg_len < 25.0 {
        return outcome(
            false,
            format!(
                "corpus off: height {}, {variants} variants, avg length {avg_len:.1}",
                tree.height()
            ),
        );
    }
    let chars = compute_characteristics(&tree);
    let config = GridConfig {
        tls: GRID.to_vec(),
        ths: GRID.to_vec(),
        jobs: 1,
        validate: true,
    };
    let grid = match run_grid(&tree, &chars, &log, &config) {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("grid failed: {e}")),
    };
    let cell = grid
        .cells
        .iter()
        .find(|c| c.params.is_some_and(|p| p.tl() == 5 && p.th() == 5))
        .expect("grid contains (5, 5)");
    let faster = cell.summary.avg_time_seconds < grid.optimal.avg_time_seconds;
    let costs_ok = grid.cells.iter().all(|c| c.summary.avg_cost >= grid.optimal.avg_cost);
    outcome(
        faster && costs_ok,
        format!(
            "height {}, avg length {avg_len:.1}; optimal {:.4}s cost {:.2}, (5,5) {:.4}s cost {:.2}, all cells cost >= optimal: {costs_ok}",
            tree.height(),
            grid.optimal.avg_time_seconds,
            grid.optimal.avg_cost,
            cell.summary.avg_time_seconds,
            cell.summary.avg_cost,
        ),
    )
}

fn clean_logs_cost_nothing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let params = grid_params();
    let (mut runs, mut optimal_nonzero) = (0, 0);
    let mut per_cell = vec![0usize; params.len()];
    let mut example = None;
    for _ in 0..50 {
        let shape = TreeShape::new(rng.gen_range(3..=12));
        let tree = random_tree(&mut rng, &shape).unwrap();
        let names = alphabet(shape.alphabet);
        let log = sample_log(&mut rng, &tree, 20, &Noise::none(), &names);
        let chars = compute_characteristics(&tree);
        for v in log.variants() {
            runs += 1;
            if optimal_align(&v.trace, &tree).cost() != 0 {
                optimal_nonzero += 1;
            }
            for (k, &p) in params.iter().enumerate() {
                let cost = approximate_align(&v.trace, &tree, &chars, p).cost();
                if cost != 0 {
                    per_cell[k] += 1;
                    let size = v.trace.len() + tree.len();
                    if example.as_ref().is_none_or(|(s, _)| size < *s) {
                        example = Some((
                            size,
                            format!("{tree} on {} with TL={} TH={}: cost {cost}", v.trace, p.tl(), p.th()),
                        ));
                    }
                }
            }
        }
    }
    let approx_nonzero: usize = per_cell.iter().sum();
    let breakdown: Vec<String> = params
        .iter()
        .zip(&per_cell)
        .map(|(p, n)| format!("({},{}):{n}", p.tl(), p.th()))
        .collect();
    outcome(
        optimal_nonzero == 0 && approx_nonzero == 0,
        format!(
            "{runs} clean variants: optimal nonzero {optimal_nonzero}, approximate nonzero {approx_nonzero} of {} runs [{}]{}",
            runs * params.len(),
            breakdown.join(" "),
            example.map(|(_, e)| format!("; smallest: {e}")).unwrap_or_default()
        ),
    )
}

#[test]
fn acceptance() {
    let (suite, guard) = validity_dominance_and_guard();
    let results = [
        ("optimal alignment of <a,b,c,f> costs 4", abcf_cost()),
        ("sequence split of <d,c,a,b,c,d,a,e>", sequence_split()),
        (
            "parallel split and composition of <c,a,d,c,b>",
            parallel_split_and_compose(),
        ),
        ("validity and dominance over the (TL, TH) grid", suite),
        ("guard equivalence", guard),
        ("splitter and interpretation oracles", splitter_oracles()),
        ("characteristics oracle", characteristics_oracle()),
        ("speedup trend", speedup_trend()),
        ("clean logs align at cost 0", clean_logs_cost_nothing()),
    ];
    let mut failed = Vec::new();
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
