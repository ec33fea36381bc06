use std::io::{BufRead, Write};

use anyhow::{Context, Result};
use clap::Args;
use gecforge::evaluation::Retokenizer;
use serde_json::json;

use crate::common::{open_input, open_output, Counts, Summary};
use crate::{IoArgs, RunArgs};

#[derive(Args, Debug)]
pub struct RetokenizeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Leave contractions such as "don't" whole.
    #[arg(long)]
    pub keep_contractions: bool,
}

pub fn run(args: &RetokenizeArgs, _run: &RunArgs) -> Result<Summary> {
    let retokenizer = Retokenizer::default().split_contractions(!args.keep_contractions);
    let input = open_input(&args.io.input)?;
    let mut out = open_output(&args.io.output)?;
    let mut n = 0;
    for line in input.lines() {
        let line = line.context("cannot read input")?;
        writeln!(out, "{}", retokenizer.retokenize(&line).join(" "))?;
        n += 1;
    }
    out.flush()?;
    Ok(Summary {
        config: json!({ "split_contractions": !args.keep_contractions }),
        counts: Counts { read: n, written: n, ..Counts::default() },
        ..Summary::default()
    })
}
