use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gecforge::evaluation::{evaluate_corpus, parse_m2, AnnotatorPolicy, EvalOptions, MaxMatchConfig, Retokenizer};
use serde_json::json;

use crate::common::{open_output, Counts, Summary};
use crate::RunArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// Maximise the running corpus F0.5.
    Greedy,
    /// Maximise each sentence's own F0.5.
    PerSentence,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Gold annotations in M2 format.
    #[arg(long, value_name = "PATH")]
    pub gold: PathBuf,
    /// System output, one sentence per line.
    #[arg(long, value_name = "PATH")]
    pub hyp: String,
    /// Output path, `-` for standard output.
    #[arg(long, short, default_value = "-")]
    pub output: String,
    /// Retokenize hypotheses before scoring.
    #[arg(long)]
    pub retokenize: bool,
    /// Print the full report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Append the per-type breakdown.
    #[arg(long)]
    pub per_type: bool,
    #[arg(long, value_enum, default_value = "greedy")]
    pub annotator_policy: Policy,
    /// Cap on non-equal alignment steps merged into one system edit.
    #[arg(long, value_name = "N")]
    pub max_merge: Option<usize>,
    /// Unchanged tokens one system edit may absorb.
    #[arg(long, value_name = "N", default_value_t = 2)]
    pub max_unchanged: usize,
}

pub fn run(args: &EvaluateArgs, _run: &RunArgs) -> Result<Summary> {
    let gold_file = File::open(&args.gold).with_context(|| format!("cannot open gold {}", args.gold.display()))?;
    let gold = parse_m2(BufReader::new(gold_file)).with_context(|| format!("invalid M2 file {}", args.gold.display()))?;

    let hyp_file = File::open(&args.hyp).with_context(|| format!("cannot open hypotheses {}", args.hyp))?;
    let retokenizer = args.retokenize.then(Retokenizer::default);
    let mut hypotheses = Vec::with_capacity(gold.len());
    for line in BufReader::new(hyp_file).lines() {
        let line = line.with_context(|| format!("cannot read {}", args.hyp))?;
        hypotheses.push(match &retokenizer {
            Some(r) => r.retokenize(&line),
            None => line.split_whitespace().map(str::to_owned).collect(),
        });
    }
    if hypotheses.len() != gold.len() {
        bail!("{} has {} lines but the gold file has {} sentences", args.hyp, hypotheses.len(), gold.len());
    }

    let options = EvalOptions {
        policy: match args.annotator_policy {
            Policy::Greedy => AnnotatorPolicy::GreedyCumulative,
            Policy::PerSentence => AnnotatorPolicy::PerSentence,
        },
        maxmatch: MaxMatchConfig { max_unchanged_words: args.max_unchanged, max_merge: args.max_merge },
    };
    let triples = gold.iter().zip(&hypotheses).map(|(g, h)| (&g.source_tokens[..], &h[..], g));
    let report = evaluate_corpus(triples, &options)?;

    let mut out = open_output(&args.output)?;
    if args.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.summary_lines())?;
    }
    if args.per_type {
        write!(out, "{}", report.per_type_table())?;
    }
    out.flush()?;

    let n = gold.len() as u64;
    Ok(Summary {
        config: json!({
            "gold": args.gold,
            "retokenize": args.retokenize,
            "annotator_policy": args.annotator_policy.to_possible_value().map(|v| v.get_name().to_owned()),
            "max_merge": args.max_merge,
            "max_unchanged": args.max_unchanged,
            "beta": report.beta,
        }),
        counts: Counts { read: n, written: n, ..Counts::default() },
        ..Summary::default()
    })
}
