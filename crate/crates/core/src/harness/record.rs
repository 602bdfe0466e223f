use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verify::VerdictStatus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Answer {
    Realizable,
    Unrealizable,
    Unknown,
    Timeout,
}

impl Answer {
    pub fn is_definite(self) -> bool {
        matches!(self, Answer::Realizable | Answer::Unrealizable)
    }
}

/// One benchmark run by one configuration. Stored one per line as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub benchmark: String,
    pub config: String,
    pub answer: Answer,
    /// Controller gate count of a realizable answer with a solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<u64>,
    pub cpu_time: f64,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerdictStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl ResultRecord {
    pub fn new(benchmark: &str, config: &str, answer: Answer) -> Self {
        ResultRecord {
            benchmark: benchmark.to_string(),
            config: config.to_string(),
            answer,
            size: None,
            cpu_time: 0.0,
            wall_time: 0.0,
            verification: None,
            solution: None,
            witness: None,
        }
    }

    pub fn verified(&self) -> bool {
        self.verification.is_some_and(VerdictStatus::is_verified)
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: TIMEOUT record carries a size")]
    TimeoutWithSize { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_record(out: &mut impl Write, r: &ResultRecord) -> std::io::Result<()> {
    let line = serde_json::to_string(r).map_err(std::io::Error::other)?;
    writeln!(out, "{line}")
}

pub fn read_records(input: impl BufRead) -> Result<Vec<ResultRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: ResultRecord =
            serde_json::from_str(&line).map_err(|source| RecordError::Malformed {
                line: i + 1,
                source,
            })?;
        if r.answer == Answer::Timeout && r.size.is_some() {
            return Err(RecordError::TimeoutWithSize { line: i + 1 });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_record_file(path: &Path) -> Result<Vec<ResultRecord>, RecordError> {
    let f = std::fs::File::open(path)?;
    read_records(std::io::BufReader::new(f))
}
