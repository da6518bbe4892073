use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use treealign::eval::{self, GridConfig, Mode};
use treealign::log::{load_csv, load_variants, CsvColumns};
use treealign::synth::{self, CorpusConfig, Noise, NoiseKind, TreeShape};
use treealign::tree::load_trees;
use treealign::{compute_characteristics, ApproxParams, EventLog, ProcessTree};

/// Optimal and approximate alignments between event logs and process trees
#[derive(Parser, Debug)]
#[command(name = "treealign", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Align every trace variant of a log against a tree
    Align(AlignArgs),
    /// Sweep (TL, TH) combinations and compare with optimal alignments
    Grid(GridArgs),
    /// Generate random trees and sampled logs
    Synthesize(SynthArgs),
    /// Dump alphabet, start/end activities and empty acceptance per node
    Characteristics(CharArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Tree file, one tree per line
    #[arg(long)]
    tree: PathBuf,

    /// Which tree of the file to use (0-based)
    #[arg(long, default_value_t = 0)]
    tree_index: usize,

    /// Event log: `.csv` event table, anything else a variants file
    #[arg(long)]
    log: PathBuf,

    /// Case column of a CSV log
    #[arg(long, default_value = "case")]
    case_col: String,

    /// Activity column of a CSV log
    #[arg(long, default_value = "activity")]
    activity_col: String,

    /// Timestamp column of a CSV log; file order is used when absent
    #[arg(long)]
    timestamp_col: Option<String>,

    /// Worker threads for variant-level parallelism
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Check every alignment for validity (not timed)
    #[arg(long)]
    validate: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlignMode {
    Optimal,
    Approx,
}

#[derive(Args, Debug)]
struct AlignArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_enum)]
    mode: AlignMode,

    /// Maximum trace length aligned exactly (approx mode)
    #[arg(long)]
    tl: Option<usize>,

    /// Maximum subtree height aligned exactly (approx mode)
    #[arg(long)]
    th: Option<usize>,

    /// Output CSV; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_delimiter = ',', required = true)]
    tl: Vec<usize>,

    #[arg(long, value_delimiter = ',', required = true)]
    th: Vec<usize>,

    /// Output CSV; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,

    #[arg(long)]
    n_trees: usize,

    /// Number of leaves per tree
    #[arg(long)]
    tree_size: usize,

    /// Traces sampled per tree
    #[arg(long)]
    n_traces: usize,

    /// Per-event noise probability in [0, 1]
    #[arg(long)]
    noise_prob: f64,

    /// Enabled noise kinds
    #[arg(long, value_delimiter = ',', default_value = "delete,relabel,insert")]
    noise_kinds: Vec<String>,

    /// Number of distinct activities; defaults to the tree size
    #[arg(long)]
    alphabet: Option<usize>,

    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CharArgs {
    #[arg(long)]
    tree: PathBuf,

    #[arg(long, default_value_t = 0)]
    tree_index: usize,

    /// Output CSV; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid flag combination or value; reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Align(args) => cmd_align(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Synthesize(args) => cmd_synthesize(args),
        Command::Characteristics(args) => cmd_characteristics(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_tree(path: &Path, index: usize) -> Result<ProcessTree> {
    let trees = load_trees(path).with_context(|| format!("reading trees from {}", path.display()))?;
    let tree = trees
        .into_iter()
        .nth(index)
        .with_context(|| format!("{} has no tree with index {index}", path.display()))?;
    Ok(tree.binarize())
}

fn load_log(input: &InputArgs) -> Result<EventLog> {
    let path = &input.log;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let log = if is_csv {
        let columns = CsvColumns {
            case: input.case_col.clone(),
            activity: input.activity_col.clone(),
            timestamp: input.timestamp_col.clone(),
        };
        load_csv(path, &columns)
    } else {
        load_variants(path)
    };
    log.with_context(|| format!("reading log from {}", path.display()))
}

fn check_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_align(args: AlignArgs) -> Result<()> {
    check_jobs(args.input.jobs)?;
    let mode = match args.mode {
        AlignMode::Optimal => Mode::Optimal,
        AlignMode::Approx => {
            let (Some(tl), Some(th)) = (args.tl, args.th) else {
                return Err(usage("approx mode requires --tl and --th"));
            };
            Mode::Approximate(ApproxParams::new(tl, th).map_err(|e| usage(e.to_string()))?)
        }
    };
    let tree = load_tree(&args.input.tree, args.input.tree_index)?;
    let log = load_log(&args.input)?;

    let start = Instant::now();
    let chars = compute_characteristics(&tree);
    eprintln!("characteristics: {:.6}s", start.elapsed().as_secs_f64());

    let results = eval::align_log(&tree, &chars, &log, mode, args.input.jobs)?;
    if args.input.validate {
        eval::validate_results(&tree, &log, &results)?;
    }
    eval::write_align_csv(output(args.out.as_deref())?, &results)?;
    let summary = eval::summarize(&results);
    eprintln!(
        "{mode}: {} traces, avg cost {:.4}, avg time {:.6}s",
        summary.n_traces, summary.avg_cost, summary.avg_time_seconds
    );
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    check_jobs(args.input.jobs)?;
    if args.tl.iter().chain(&args.th).any(|&v| v == 0) {
        return Err(usage("--tl and --th values must be at least 1"));
    }
    let tree = load_tree(&args.input.tree, args.input.tree_index)?;
    let log = load_log(&args.input)?;

    let start = Instant::now();
    let chars = compute_characteristics(&tree);
    eprintln!("characteristics: {:.6}s", start.elapsed().as_secs_f64());

    let config = GridConfig {
        tls: args.tl,
        ths: args.th,
        jobs: args.input.jobs,
        validate: args.input.validate,
    };
    let grid = eval::run_grid(&tree, &chars, &log, &config)?;
    grid.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}

fn cmd_synthesize(args: SynthArgs) -> Result<()> {
    let kinds = args
        .noise_kinds
        .iter()
        .map(|k| k.parse::<NoiseKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let noise = Noise::new(args.noise_prob, kinds).map_err(|e| usage(e.to_string()))?;
    if args.tree_size == 0 {
        return Err(usage("--tree-size must be at least 1"));
    }
    let mut shape = TreeShape::new(args.tree_size);
    if let Some(a) = args.alphabet {
        if a == 0 {
            return Err(usage("--alphabet must be at least 1"));
        }
        shape.alphabet = a;
    }
    let config = CorpusConfig {
        seed: args.seed,
        n_trees: args.n_trees,
        shape,
        n_traces: args.n_traces,
        noise,
    };
    let corpus = synth::synthesize(&config).map_err(|e| usage(e.to_string()))?;

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let trees: String = corpus.trees.iter().map(|t| format!("{t}\n")).collect();
    fs::write(args.out_dir.join("trees.txt"), trees)?;
    for (i, log) in corpus.logs.iter().enumerate() {
        fs::write(args.out_dir.join(format!("log_{i:03}.txt")), log.to_variants_string())?;
    }
    eprintln!("wrote {} trees to {}", corpus.trees.len(), args.out_dir.display());
    Ok(())
}

fn cmd_characteristics(args: CharArgs) -> Result<()> {
    let tree = load_tree(&args.tree, args.tree_index)?;
    let table = compute_characteristics(&tree);
    let mut out = output(args.out.as_deref())?;
    out.write_all(table.to_csv().as_bytes())?;
    out.flush()?;
    Ok(())
}
