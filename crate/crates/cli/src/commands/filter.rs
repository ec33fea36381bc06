use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use gecforge::cleaning::{score_pairs, select_ids, BatchScorer, CharNgramLm, FilterConfig, HttpEndpoint, NegWer};
use gecforge::corpus_io::PairWriter;
use serde_json::json;
use tempfile::NamedTempFile;

use super::relabel::EndpointArgs;
use crate::common::{open_input, open_output, Records, Rejects, Summary, STDIO};
use crate::{IoArgs, RunArgs};

#[derive(Args, Debug)]
pub struct FilterArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
    /// Built-in scorer: `builtin:neg_wer` or `builtin:char_lm`.
    #[arg(long, value_name = "NAME", conflicts_with = "endpoint")]
    pub scorer: Option<String>,
    /// Fraction of records to keep, in (0, 1].
    #[arg(long, conflicts_with = "preset")]
    pub keep: Option<f64>,
    /// Named keep fraction: drop20, drop50, drop70 or drop90.
    #[arg(long)]
    pub preset: Option<String>,
    /// The endpoint returns losses; negate them so higher is better.
    #[arg(long, requires = "endpoint")]
    pub negate_scores: bool,
    /// Records that could not be scored go here (standard error by default).
    #[arg(long, value_name = "PATH")]
    pub rejects: Option<PathBuf>,
}

fn filter_config(args: &FilterArgs) -> Result<FilterConfig> {
    match (&args.preset, args.keep) {
        (Some(name), _) => FilterConfig::preset(name).with_context(|| format!("unknown preset {name}")),
        (None, Some(keep)) => Ok(FilterConfig::new(keep)?),
        (None, None) => Ok(FilterConfig::default()),
    }
}

pub fn run(args: &FilterArgs, run: &RunArgs) -> Result<Summary> {
    let config = filter_config(args)?;

    // records are read twice, so standard input is spooled to disk first
    let spool;
    let input: String = if args.io.input == STDIO {
        let mut file = NamedTempFile::new().context("cannot create spool file")?;
        io::copy(&mut open_input(STDIO)?, &mut file).context("cannot spool standard input")?;
        spool = file.into_temp_path();
        spool.to_string_lossy().into_owned()
    } else {
        args.io.input.clone()
    };

    let scorer: Box<dyn BatchScorer> = match (&args.endpoint.endpoint, args.scorer.as_deref()) {
        (Some(url), _) => {
            let mut endpoint = args.endpoint.endpoint_config(url, run);
            endpoint.negate_scores = args.negate_scores;
            Box::new(HttpEndpoint::new(endpoint))
        }
        (None, Some("builtin:neg_wer")) => Box::new(NegWer),
        (None, Some("builtin:char_lm")) => {
            let mut records = Records::open(&input, run.strict)?;
            let lm = CharNgramLm::train(records.by_ref().filter_map(|p| p.target));
            records.finish()?;
            Box::new(lm)
        }
        (None, Some(other)) => bail!("unknown scorer {other} (expected builtin:neg_wer or builtin:char_lm)"),
        (None, None) => bail!("filter needs --endpoint or --scorer"),
    };

    let mut records = Records::open(&input, run.strict)?;
    let mut rejects = Rejects::open(args.rejects.as_deref())?;
    let mut scores: Vec<(u64, f64)> = Vec::new();
    score_pairs(records.by_ref(), scorer.as_ref(), args.endpoint.lanes(run), |outcome| -> Result<()> {
        match outcome {
            Ok(scored) => scores.push((scored.pair().id, scored.score())),
            Err((pair, reason)) => rejects.write(&pair, &reason)?,
        }
        Ok(())
    })?;
    let report = records.finish()?;
    let kept = select_ids(scores, &config);

    let mut out = PairWriter::new(open_output(&args.io.output)?);
    let mut wanted = kept.iter().copied().peekable();
    let mut again = Records::open(&input, run.strict)?;
    for pair in again.by_ref() {
        if wanted.peek().is_none() {
            break;
        }
        if wanted.peek() == Some(&pair.id) {
            wanted.next();
            out.write(&pair)?;
        }
    }
    again.finish()?;
    out.flush()?;
    let rejected = rejects.finish()?;

    let mut described = args.endpoint.describe(run);
    described["scorer"] = json!(args.scorer);
    described["keep_fraction"] = json!(config.keep_fraction());
    described["negate_scores"] = json!(args.negate_scores);
    Ok(Summary::from_read(described, report, out.written(), rejected))
}
