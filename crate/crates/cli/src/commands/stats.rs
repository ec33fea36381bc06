use anyhow::Result;
use clap::{Args, ValueEnum};
use gecforge::alignment::{pair_counts, Normalization, StatsAccumulator};
use gecforge::SentencePair;
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

use crate::common::{open_output, Records, Rejects, Summary};
use crate::{IoArgs, RunArgs};

const CHUNK: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Denominator {
    Source,
    Target,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Token count used as the WER denominator.
    #[arg(long, value_enum, default_value = "source")]
    pub normalize_by: Denominator,
    /// Records without a target go here (standard error by default).
    #[arg(long, value_name = "PATH")]
    pub rejects: Option<PathBuf>,
}

fn accumulate(chunk: &[SentencePair]) -> (StatsAccumulator, Vec<(usize, String)>) {
    chunk
        .par_iter()
        .enumerate()
        .fold(
            || (StatsAccumulator::default(), Vec::new()),
            |(mut acc, mut bad), (i, pair)| {
                match pair_counts(pair) {
                    Ok(c) => acc.add(c),
                    Err(e) => bad.push((i, e.to_string())),
                }
                (acc, bad)
            },
        )
        .reduce(
            || (StatsAccumulator::default(), Vec::new()),
            |(mut a, mut bad_a), (b, bad_b)| {
                a.merge(&b);
                bad_a.extend(bad_b);
                (a, bad_a)
            },
        )
}

pub fn run(args: &StatsArgs, run: &RunArgs) -> Result<Summary> {
    let mut records = Records::open(&args.io.input, run.strict)?;
    let mut rejects = Rejects::open(args.rejects.as_deref())?;
    let mut total = StatsAccumulator::default();
    let mut chunk: Vec<SentencePair> = Vec::with_capacity(CHUNK);
    loop {
        chunk.extend(records.by_ref().take(CHUNK));
        if chunk.is_empty() {
            break;
        }
        let (acc, mut bad) = accumulate(&chunk);
        total.merge(&acc);
        bad.sort_unstable_by_key(|(i, _)| *i);
        for (i, reason) in bad {
            rejects.write(&chunk[i], &reason)?;
        }
        chunk.clear();
    }
    let report = records.finish()?;
    let normalization = match args.normalize_by {
        Denominator::Source => Normalization::Source,
        Denominator::Target => Normalization::Target,
    };
    let stats = total.finish_with(normalization);
    let mut out = open_output(&args.io.output)?;
    if matches!(args.format, Format::Json | Format::Both) {
        writeln!(out, "{}", stats.to_json())?;
    }
    if matches!(args.format, Format::Table | Format::Both) {
        write!(out, "{}", stats.to_table())?;
    }
    out.flush()?;
    let rejected = rejects.finish()?;
    let config = json!({
        "format": args.format.to_possible_value().map(|v| v.get_name().to_owned()),
        "normalize_by": args.normalize_by.to_possible_value().map(|v| v.get_name().to_owned()),
    });
    Ok(Summary::from_read(config, report, 1, rejected))
}
