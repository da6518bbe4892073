//! Aligning whole logs, timing, and (TL, TH) grid sweeps.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::align::{check_alignment, optimal_align, Alignment, AlignmentError};
use crate::approx::{approximate_align, ApproxParams, ParamsError};
use crate::characteristics::CharacteristicsTable;
use crate::log::EventLog;
use crate::tree::ProcessTree;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("grid needs at least one TL and one TH value")]
    EmptyGrid,
    #[error("variant {variant}: cost {approx} with TL={tl}, TH={th} is below the optimal cost {optimal}")]
    Dominance {
        variant: usize,
        tl: usize,
        th: usize,
        approx: u32,
        optimal: u32,
    },
    #[error("variant {variant}: invalid alignment: {error}")]
    Invalid { variant: usize, error: AlignmentError },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Optimal,
    Approximate(ApproxParams),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Optimal => f.write_str("optimal"),
            Mode::Approximate(p) => write!(f, "approx(TL={}, TH={})", p.tl(), p.th()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VariantResult {
    pub index: usize,
    pub count: u64,
    pub cost: u32,
    pub time_seconds: f64,
    pub alignment: Alignment,
}

/// Aligns every variant of `log`; `jobs` worker threads (1 = sequential).
/// Each variant is timed individually, excluding any precomputation. The
/// results are ordered by variant index.
pub fn align_log(
    tree: &ProcessTree,
    chars: &CharacteristicsTable,
    log: &EventLog,
    mode: Mode,
    jobs: usize,
) -> Result<Vec<VariantResult>, EvalError> {
    let run = |(index, variant): (usize, &crate::log::Variant)| {
        let start = Instant::now();
        let alignment = match mode {
            Mode::Optimal => optimal_align(&variant.trace, tree),
            Mode::Approximate(params) => approximate_align(&variant.trace, tree, chars, params),
        };
        let time_seconds = start.elapsed().as_secs_f64();
        VariantResult {
            index,
            count: variant.count,
            cost: alignment.cost(),
            time_seconds,
            alignment,
        }
    };
    let mut results: Vec<VariantResult> = if jobs <= 1 {
        log.variants().iter().enumerate().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| log.variants().par_iter().enumerate().map(run).collect())
    };
    results.sort_by_key(|r| r.index);
    Ok(results)
}

/// Checks every alignment against its trace.
pub fn validate_results(tree: &ProcessTree, log: &EventLog, results: &[VariantResult]) -> Result<(), EvalError> {
    for r in results {
        check_alignment(&log.variants()[r.index].trace, tree, &r.alignment).map_err(|error| EvalError::Invalid {
            variant: r.index,
            error,
        })?;
    }
    Ok(())
}

/// CSV: `variant_index,count,cost,time_seconds,alignment` with the
/// alignment as a JSON list of moves.
pub fn write_align_csv<W: Write>(out: W, results: &[VariantResult]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant_index", "count", "cost", "time_seconds", "alignment"])?;
    for r in results {
        w.write_record([
            r.index.to_string(),
            r.count.to_string(),
            r.cost.to_string(),
            format!("{:.9}", r.time_seconds),
            r.alignment.to_json(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Count-weighted averages of one mode over a log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub avg_cost: f64,
    pub avg_time_seconds: f64,
    pub n_traces: u64,
    /// Count-weighted cost sum, exact.
    pub total_cost: u64,
}

pub fn summarize(results: &[VariantResult]) -> Summary {
    let n_traces: u64 = results.iter().map(|r| r.count).sum();
    let total_cost: u64 = results.iter().map(|r| r.count * u64::from(r.cost)).sum();
    let total_time: f64 = results.iter().map(|r| r.count as f64 * r.time_seconds).sum();
    let denom = n_traces.max(1) as f64;
    Summary {
        avg_cost: total_cost as f64 / denom,
        avg_time_seconds: total_time / denom,
        n_traces,
        total_cost,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    /// `None` for the optimal reference row.
    pub params: Option<ApproxParams>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub optimal: Summary,
    /// One row per (TL, TH), TL-major in the given order.
    pub cells: Vec<GridRow>,
}

impl GridResult {
    pub fn rows(&self) -> impl Iterator<Item = GridRow> + '_ {
        self.cells.iter().cloned().chain(std::iter::once(GridRow {
            params: None,
            summary: self.optimal,
        }))
    }

    /// CSV: `tl,th,avg_cost,avg_time_seconds,n_traces`; the reference row
    /// has `optimal` in both parameter columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tl", "th", "avg_cost", "avg_time_seconds", "n_traces"])?;
        for row in self.rows() {
            let (tl, th) = match row.params {
                Some(p) => (p.tl().to_string(), p.th().to_string()),
                None => ("optimal".to_string(), "optimal".to_string()),
            };
            w.write_record([
                tl,
                th,
                format!("{:.6}", row.summary.avg_cost),
                format!("{:.9}", row.summary.avg_time_seconds),
                row.summary.n_traces.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub tls: Vec<usize>,
    pub ths: Vec<usize>,
    pub jobs: usize,
    /// Check every alignment against its trace (outside the timed section).
    pub validate: bool,
}

/// Runs the optimal aligner and every (TL, TH) cell over the log. Fails if
/// any approximate cost falls below the optimal cost of the same variant.
pub fn run_grid(
    tree: &ProcessTree,
    chars: &CharacteristicsTable,
    log: &EventLog,
    config: &GridConfig,
) -> Result<GridResult, EvalError> {
    if config.tls.is_empty() || config.ths.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let params: Vec<ApproxParams> = config
        .tls
        .iter()
        .flat_map(|&tl| config.ths.iter().map(move |&th| (tl, th)))
        .map(|(tl, th)| ApproxParams::new(tl, th))
        .collect::<Result<_, _>>()?;

    let optimal = align_log(tree, chars, log, Mode::Optimal, config.jobs)?;
    if config.validate {
        validate_results(tree, log, &optimal)?;
    }
    let mut cells = Vec::with_capacity(params.len());
    for p in params {
        let results = align_log(tree, chars, log, Mode::Approximate(p), config.jobs)?;
        if config.validate {
            validate_results(tree, log, &results)?;
        }
        for (a, o) in results.iter().zip(&optimal) {
            if a.cost < o.cost {
                return Err(EvalError::Dominance {
                    variant: a.index,
                    tl: p.tl(),
                    th: p.th(),
                    approx: a.cost,
                    optimal: o.cost,
                });
            }
        }
        cells.push(GridRow {
            params: Some(p),
            summary: summarize(&results),
        });
    }
    Ok(GridResult {
        optimal: summarize(&optimal),
        cells,
    })
}
