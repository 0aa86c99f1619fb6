use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Preset;
use crate::agents::{AgentDiagnostics, AgentKind};
use crate::env::Outcome;
use crate::error::{Error, Result};

pub const MOVING_AVERAGE_WINDOW: usize = 50;

/// One line of `metrics.jsonl`.
///
/// `moving_average` and `success_rate` are the running values up to and
/// including this episode. Wall time is kept in memory only so that the
/// file stays byte-identical across repeated runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub episode: u64,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub length: u32,
    pub outcome: Outcome,
    /// Frames consumed by the run when this episode ended.
    pub frames: u64,
    pub moving_average: f64,
    pub success_rate: f64,
    #[serde(flatten)]
    pub agent: AgentDiagnostics,
    #[serde(skip)]
    pub wall_time: f64,
}

fn window_mean(returns: &[f64], i: usize, window: usize) -> f64 {
    let lo = (i + 1).saturating_sub(window);
    let slice = &returns[lo..=i];
    slice.iter().sum::<f64>() / slice.len() as f64
}

/// Element `i` is the mean return over episodes `max(0, i-window+1)..=i`.
pub fn moving_average(returns: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Usage("moving-average window must be at least 1".into()));
    }
    Ok((0..returns.len()).map(|i| window_mean(returns, i, window)).collect())
}

/// Fraction of episodes ending at the Green fixed point; `None` when empty.
pub fn success_rate(outcomes: &[Outcome]) -> Option<f64> {
    if outcomes.is_empty() {
        return None;
    }
    let green = outcomes
        .iter()
        .filter(|o| **o == Outcome::GreenFixedPoint)
        .count();
    Some(green as f64 / outcomes.len() as f64)
}

pub fn returns(records: &[RunRecord]) -> Vec<f64> {
    records.iter().map(|r| r.episode_return).collect()
}

pub fn outcomes(records: &[RunRecord]) -> Vec<Outcome> {
    records.iter().map(|r| r.outcome).collect()
}

pub fn outcome_counts(outcomes: &[Outcome]) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> =
        Outcome::ALL.iter().map(|o| (o.name().to_string(), 0)).collect();
    for o in outcomes {
        *counts.entry(o.name().to_string()).or_default() += 1;
    }
    counts
}

/// Accumulates records and fills in the running statistics.
#[derive(Clone, Debug, Default)]
pub struct MetricsLog {
    records: Vec<RunRecord>,
    returns: Vec<f64>,
    greens: u64,
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<RunRecord> {
        self.records
    }

    /// Appends an episode; `moving_average` and `success_rate` are overwritten.
    pub fn push(&mut self, mut record: RunRecord) -> &RunRecord {
        self.returns.push(record.episode_return);
        if record.outcome == Outcome::GreenFixedPoint {
            self.greens += 1;
        }
        let i = self.returns.len() - 1;
        record.moving_average = window_mean(&self.returns, i, MOVING_AVERAGE_WINDOW);
        record.success_rate = self.greens as f64 / self.returns.len() as f64;
        self.records.push(record);
        self.records.last().expect("just pushed")
    }
}

pub fn record_line(record: &RunRecord) -> String {
    serde_json::to_string(record).expect("records serialize")
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Streams records to a file as they arrive.
pub struct RecordWriter {
    path: std::path::PathBuf,
    file: std::io::BufWriter<std::fs::File>,
}

impl RecordWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file: std::io::BufWriter::new(file),
        })
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<()> {
        writeln!(self.file, "{}", record_line(record)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.file.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub agent: AgentKind,
    pub preset: Preset,
    pub seed: u64,
    pub episodes: u64,
    pub frames: u64,
    pub mean_return: Option<f64>,
    pub success_rate: Option<f64>,
    pub final_moving_average: Option<f64>,
    pub outcome_counts: BTreeMap<String, u64>,
    pub wall_time_seconds: f64,
    pub aborted: bool,
}

impl RunSummary {
    pub fn from_records(
        agent: AgentKind,
        preset: Preset,
        seed: u64,
        records: &[RunRecord],
        frames: u64,
        wall_time_seconds: f64,
        aborted: bool,
    ) -> Self {
        let rets = returns(records);
        let outs = outcomes(records);
        Self {
            agent,
            preset,
            seed,
            episodes: records.len() as u64,
            frames,
            mean_return: (!rets.is_empty()).then(|| rets.iter().sum::<f64>() / rets.len() as f64),
            success_rate: success_rate(&outs),
            final_moving_average: records.last().map(|r| r.moving_average),
            outcome_counts: outcome_counts(&outs),
            wall_time_seconds,
            aborted,
        }
    }
}
