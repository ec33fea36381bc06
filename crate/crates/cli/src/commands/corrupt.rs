use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Args;
use gecforge::corpus_io::PairWriter;
use gecforge::corruption::{corrupt_sentence, Alphabet, CorruptionConfig};
use gecforge::{Paragraph, SentencePair};
use rayon::prelude::*;

use super::split::load_splitter;
use crate::common::{open_output, Records, Rejects, Summary};
use crate::{IoArgs, RunArgs};

const CHUNK: usize = 8192;

#[derive(Args, Debug)]
pub struct CorruptArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Seed of the per-record random streams.
    #[arg(long)]
    pub seed: u64,
    /// Corruption config (JSON); missing fields take defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Treat input lines as paragraphs: split them and draw insertions from
    /// the whole paragraph's characters.
    #[arg(long)]
    pub from_paragraphs: bool,
    /// Abbreviations for paragraph splitting, one per line.
    #[arg(long, value_name = "PATH", requires = "from_paragraphs")]
    pub abbreviations: Option<PathBuf>,
    /// Write one JSON plan per output record here.
    #[arg(long, value_name = "PATH")]
    pub plans: Option<PathBuf>,
    /// Rejected sentences go here (standard error by default).
    #[arg(long, value_name = "PATH")]
    pub rejects: Option<PathBuf>,
}

struct Work {
    index: u64,
    lang: String,
    sentence: String,
    alphabet: Arc<Alphabet>,
}

pub fn load_config(path: Option<&PathBuf>, seed: u64) -> Result<CorruptionConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
            CorruptionConfig::from_json(&text).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => CorruptionConfig::default(),
    };
    config.seed = seed;
    config.validate().context("invalid config")?;
    Ok(config)
}

pub fn run(args: &CorruptArgs, run: &RunArgs) -> Result<Summary> {
    let config = load_config(args.config.as_ref(), args.seed)?;
    let splitter = if args.from_paragraphs { Some(load_splitter(args.abbreviations.as_ref())?.0) } else { None };

    let mut records = Records::open(&args.io.input, run.strict)?;
    let mut out = PairWriter::new(open_output(&args.io.output)?);
    let mut plans: Option<BufWriter<File>> = match &args.plans {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => None,
    };
    let mut rejects = Rejects::open(args.rejects.as_deref())?;

    let mut next_index = 0u64;
    let mut pending: Vec<Work> = Vec::with_capacity(CHUNK);
    let mut flush = |pending: &mut Vec<Work>| -> Result<()> {
        let results: Vec<_> = pending
            .par_iter()
            .map(|w| corrupt_sentence(&w.lang, &w.sentence, &w.alphabet, &config, w.index))
            .collect();
        for (work, result) in pending.drain(..).zip(results) {
            match result {
                Ok((pair, plan)) => {
                    out.write(&pair)?;
                    if let Some(plans) = plans.as_mut() {
                        serde_json::to_writer(&mut *plans, &plan)?;
                        plans.write_all(b"\n")?;
                    }
                }
                Err(e) => {
                    let pair = SentencePair::new(work.index, work.lang, work.sentence, None);
                    rejects.write(&pair, &e.to_string())?;
                }
            }
        }
        Ok(())
    };

    for record in records.by_ref() {
        match &splitter {
            Some(splitter) => {
                let Ok(paragraph) = Paragraph::new(record.lang, record.source) else {
                    continue;
                };
                let alphabet = Arc::new(Alphabet::from_text(paragraph.text()));
                for sentence in splitter.split(&paragraph) {
                    let lang = paragraph.lang().to_owned();
                    pending.push(Work { index: next_index, lang, sentence, alphabet: Arc::clone(&alphabet) });
                    next_index += 1;
                }
            }
            None => {
                let alphabet = Arc::new(Alphabet::from_text(&record.source));
                pending.push(Work { index: next_index, lang: record.lang, sentence: record.source, alphabet });
                next_index += 1;
            }
        }
        if pending.len() >= CHUNK {
            flush(&mut pending)?;
        }
    }
    flush(&mut pending)?;
    let report = records.finish()?;
    out.flush()?;
    if let Some(mut plans) = plans {
        plans.flush()?;
    }
    let rejected = rejects.finish()?;
    let mut summary = Summary::from_read(serde_json::to_value(&config)?, report, out.written(), rejected);
    summary.seed = Some(args.seed);
    Ok(summary)
}
