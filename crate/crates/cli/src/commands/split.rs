use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use gecforge::corpus_io::{PairWriter, SentenceSplitter, DEFAULT_ABBREVIATIONS};
use gecforge::{Paragraph, SentencePair};
use serde_json::json;

use crate::common::{open_output, Records, Summary};
use crate::{IoArgs, RunArgs};

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Non-breaking abbreviations, one per line (replaces the built-in list).
    #[arg(long, value_name = "PATH")]
    pub abbreviations: Option<PathBuf>,
}

pub fn load_splitter(path: Option<&PathBuf>) -> Result<(SentenceSplitter, Vec<String>)> {
    let list: Vec<String> = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("cannot read abbreviations {}", p.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect(),
        None => DEFAULT_ABBREVIATIONS.iter().map(|s| (*s).to_owned()).collect(),
    };
    Ok((SentenceSplitter::with_abbreviations(&list), list))
}

pub fn run(args: &SplitArgs, run: &RunArgs) -> Result<Summary> {
    let (splitter, abbreviations) = load_splitter(args.abbreviations.as_ref())?;
    let mut records = Records::open(&args.io.input, run.strict)?;
    let mut out = PairWriter::new(open_output(&args.io.output)?);
    let mut id = 0;
    for record in records.by_ref() {
        let Ok(paragraph) = Paragraph::new(record.lang, record.source) else {
            continue;
        };
        for sentence in splitter.split(&paragraph) {
            out.write(&SentencePair::new(id, paragraph.lang(), sentence, None))?;
            id += 1;
        }
    }
    let report = records.finish()?;
    out.flush()?;
    let config = json!({ "abbreviations": abbreviations });
    Ok(Summary::from_read(config, report, out.written(), 0))
}
