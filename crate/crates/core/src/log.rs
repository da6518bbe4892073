//! Traces and event logs.
//!
//! An [`EventLog`] is a multiset of traces stored as distinct variants with
//! counts. Logs are read either from an event-per-row CSV file (grouped by
//! case, optionally ordered by timestamp) or from a compact variants file with
//! one `count;a1,a2,...,an` line per variant.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

use crate::tree::is_reserved;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("'{0}' is reserved and cannot be used as an activity name")]
    ReservedActivity(String),
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp '{value}'")]
    Timestamp { row: usize, value: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A sequence of activity names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(Vec<String>);

impl Trace {
    pub fn new<S: Into<String>>(activities: impl IntoIterator<Item = S>) -> Result<Self, LogError> {
        let activities: Vec<String> = activities.into_iter().map(Into::into).collect();
        if let Some(bad) = activities.iter().find(|a| is_reserved(a)) {
            return Err(LogError::ReservedActivity(bad.clone()));
        }
        Ok(Trace(activities))
    }

    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    /// Shorthand for tests and examples: `Trace::from_letters("abc")`.
    pub fn from_letters(letters: &str) -> Self {
        Trace(letters.chars().map(|c| c.to_string()).collect())
    }

    pub(crate) fn from_vec_unchecked(activities: Vec<String>) -> Self {
        Trace(activities)
    }

    pub fn activities(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        self.0.get(i).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn slice(&self, from: usize, to: usize) -> Trace {
        Trace(self.0[from..to].to_vec())
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0.join(","))
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub trace: Trace,
    pub count: u64,
}

/// Distinct traces with multiplicities, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    variants: Vec<Variant>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a log from traces, merging identical ones.
    pub fn from_traces(traces: impl IntoIterator<Item = Trace>) -> Self {
        let mut log = EventLog::new();
        let mut index = HashMap::new();
        for t in traces {
            log.add(&mut index, t, 1);
        }
        log
    }

    fn add(&mut self, index: &mut HashMap<Trace, usize>, trace: Trace, count: u64) {
        match index.get(&trace) {
            Some(&i) => self.variants[i].count += count,
            None => {
                index.insert(trace.clone(), self.variants.len());
                self.variants.push(Variant { trace, count });
            }
        }
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn total_traces(&self) -> u64 {
        self.variants.iter().map(|v| v.count).sum()
    }

    /// Renders the log in the variants format.
    pub fn to_variants_string(&self) -> String {
        let mut out = String::new();
        for v in &self.variants {
            out.push_str(&format!("{};{}\n", v.count, v.trace.activities().join(",")));
        }
        out
    }
}

/// Column selection for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvColumns {
    pub case: String,
    pub activity: String,
    pub timestamp: Option<String>,
}

pub fn load_csv(path: impl AsRef<Path>, columns: &CsvColumns) -> Result<EventLog, LogError> {
    read_csv(File::open(path)?, columns)
}

pub fn read_csv(reader: impl Read, columns: &CsvColumns) -> Result<EventLog, LogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(EventLog::new());
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_string()))
    };
    let case_col = find(&columns.case)?;
    let act_col = find(&columns.activity)?;
    let ts_col = columns.timestamp.as_deref().map(find).transpose()?;

    // case id -> (events as (timestamp, activity)), in order of first appearance
    let mut cases: Vec<Vec<(Option<NaiveDateTime>, String)>> = Vec::new();
    let mut case_index: HashMap<String, usize> = HashMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, header is row 1
        let field = |c: usize| record.get(c).unwrap_or("").to_string();
        let activity = field(act_col);
        if is_reserved(&activity) {
            return Err(LogError::ReservedActivity(activity));
        }
        let ts = match ts_col {
            Some(c) => {
                let raw = field(c);
                Some(parse_timestamp(&raw).ok_or(LogError::Timestamp { row, value: raw })?)
            }
            None => None,
        };
        let case = field(case_col);
        let idx = *case_index.entry(case).or_insert_with(|| {
            cases.push(Vec::new());
            cases.len() - 1
        });
        cases[idx].push((ts, activity));
    }

    let traces = cases.into_iter().map(|mut events| {
        // stable: equal timestamps keep file order
        events.sort_by_key(|(ts, _)| *ts);
        Trace::from_vec_unchecked(events.into_iter().map(|(_, a)| a).collect())
    });
    Ok(EventLog::from_traces(traces))
}

/// Accepts `YYYY-MM-DD HH:MM[:SS]`, the same with a `T` separator, RFC 3339,
/// and bare dates.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let s = raw.trim();
    const FORMATS: [&str; 6] = [
        "%Y-%m-%d %H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M:%S%.f",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_utc()))
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

pub fn load_variants(path: impl AsRef<Path>) -> Result<EventLog, LogError> {
    read_variants(BufReader::new(File::open(path)?))
}

/// Reads `count;a1,a2,...,an` lines. Empty lines are skipped; `count;` alone
/// is the empty trace.
pub fn read_variants(reader: impl BufRead) -> Result<EventLog, LogError> {
    let mut log = EventLog::new();
    let mut index = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let (count, acts) = text.split_once(';').ok_or_else(|| LogError::Malformed {
            line: lineno,
            msg: "expected 'count;activities'".into(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| LogError::Malformed {
            line: lineno,
            msg: format!("invalid count '{}'", count.trim()),
        })?;
        if count == 0 {
            return Err(LogError::Malformed {
                line: lineno,
                msg: "count must be at least 1".into(),
            });
        }
        let activities: Vec<&str> = if acts.is_empty() {
            Vec::new()
        } else {
            acts.split(',').collect()
        };
        if activities.iter().any(|a| a.is_empty()) {
            return Err(LogError::Malformed {
                line: lineno,
                msg: "empty activity name".into(),
            });
        }
        let trace = Trace::new(activities).map_err(|e| LogError::Malformed {
            line: lineno,
            msg: e.to_string(),
        })?;
        log.add(&mut index, trace, count);
    }
    Ok(log)
}
