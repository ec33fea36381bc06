use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use gecforge::corpus_io::{read_pairs, ErrorPolicy, PairReader, PairWriter, ReadReport};
use gecforge::SentencePair;
use serde::Serialize;
use serde_json::Value;

pub const STDIO: &str = "-";

pub fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == STDIO {
        return Ok(Box::new(BufReader::with_capacity(1 << 16, io::stdin())));
    }
    let file = File::open(path).with_context(|| format!("cannot open input {path}"))?;
    Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
}

pub fn open_output(path: &str) -> Result<Box<dyn Write>> {
    if path == STDIO {
        return Ok(Box::new(BufWriter::with_capacity(1 << 16, io::stdout())));
    }
    let file = File::create(path).with_context(|| format!("cannot create output {path}"))?;
    Ok(Box::new(BufWriter::with_capacity(1 << 16, file)))
}

/// Reads TSV records, turning a fail-fast or I/O record error into a fatal
/// error. Skipped records stay in the reader's report.
pub struct Records {
    reader: PairReader<Box<dyn BufRead>>,
    failure: Option<anyhow::Error>,
}

impl Records {
    pub fn open(path: &str, strict: bool) -> Result<Self> {
        let policy = if strict { ErrorPolicy::FailFast } else { ErrorPolicy::Skip };
        Ok(Self { reader: read_pairs(open_input(path)?, policy), failure: None })
    }

    /// The report so far, or the error that stopped the read.
    pub fn finish(self) -> Result<ReadReport> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self.reader.into_report()),
        }
    }
}

impl Iterator for Records {
    type Item = SentencePair;

    fn next(&mut self) -> Option<SentencePair> {
        if self.failure.is_some() {
            return None;
        }
        match self.reader.next()? {
            Ok(pair) => Some(pair),
            Err(e) => {
                self.failure = Some(anyhow::Error::new(e).context("invalid input record"));
                None
            }
        }
    }
}

/// Rejected records with a reason column; standard error when no path is
/// given.
pub struct Rejects {
    writer: PairWriter<Box<dyn Write>>,
}

impl Rejects {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create rejects file {}", p.display()))?,
            )),
            None => Box::new(io::stderr()),
        };
        Ok(Self { writer: PairWriter::new(sink) })
    }

    pub fn write(&mut self, pair: &SentencePair, reason: &str) -> Result<()> {
        self.writer.write_reject(pair, reason).context("cannot write reject")
    }

    pub fn finish(mut self) -> Result<u64> {
        self.writer.flush().context("cannot flush rejects")?;
        Ok(self.writer.written())
    }
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct Counts {
    pub read: u64,
    pub skipped: u64,
    pub written: u64,
    pub rejected: u64,
}

/// What a subcommand reports back for the manifest and exit code.
#[derive(Debug, Default)]
pub struct Summary {
    pub config: Value,
    pub seed: Option<u64>,
    pub counts: Counts,
    pub read_report: Option<ReadReport>,
}

impl Summary {
    pub fn from_read(config: Value, report: ReadReport, written: u64, rejected: u64) -> Self {
        let counts = Counts { read: report.read, skipped: report.skipped, written, rejected };
        Self { config, seed: None, counts, read_report: Some(report) }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub version: &'a str,
    pub config: &'a Value,
    pub input: &'a str,
    pub output: &'a str,
    pub seed: Option<u64>,
    pub started_at_ms: u128,
    pub finished_at_ms: u128,
    pub counts: &'a Counts,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or_default()
}

pub fn write_json_line(path: Option<&PathBuf>, json: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{json}\n")).with_context(|| format!("cannot write {}", p.display())),
        None => {
            eprintln!("{json}");
            Ok(())
        }
    }
}
