//! `gecforge`: corpus tooling for grammatical error correction.

mod commands;
mod common;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use common::{now_ms, write_json_line, RunManifest, Summary};

#[derive(Parser, Debug)]
#[command(name = "gecforge", version, about = "Corpus tooling for grammatical error correction")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Write the run manifest here instead of standard error.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Do not emit a run manifest.
    #[arg(long, global = true, conflicts_with = "manifest")]
    pub no_manifest: bool,
    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Stop at the first malformed input record instead of skipping it.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Write the input read report (JSON) here.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct IoArgs {
    /// Input path, `-` for standard input.
    #[arg(long, short, default_value = "-")]
    pub input: String,
    /// Output path, `-` for standard output.
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split `lang<TAB>paragraph` lines into `lang<TAB>sentence` lines.
    Split(commands::split::SplitArgs),
    /// Corrupt clean sentences into `lang<TAB>corrupted<TAB>original` pairs.
    Corrupt(commands::corrupt::CorruptArgs),
    /// Length ratio and WER (Sub/Del/Ins) of a parallel corpus.
    Stats(commands::stats::StatsArgs),
    /// Replace targets with a rewriter's output.
    Relabel(commands::relabel::RelabelArgs),
    /// Keep the best-scoring fraction of pairs.
    Filter(commands::filter::FilterArgs),
    /// Score system output against M2 gold annotations.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Retokenize detokenized text, one sentence per line.
    Retokenize(commands::retokenize::RetokenizeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Split(_) => "split",
            Command::Corrupt(_) => "corrupt",
            Command::Stats(_) => "stats",
            Command::Relabel(_) => "relabel",
            Command::Filter(_) => "filter",
            Command::Evaluate(_) => "evaluate",
            Command::Retokenize(_) => "retokenize",
        }
    }

    fn paths(&self) -> (&str, &str) {
        let io = match self {
            Command::Split(a) => &a.io,
            Command::Corrupt(a) => &a.io,
            Command::Stats(a) => &a.io,
            Command::Relabel(a) => &a.io,
            Command::Filter(a) => &a.io,
            Command::Evaluate(a) => return (&a.hyp, &a.output),
            Command::Retokenize(a) => &a.io,
        };
        (&io.input, &io.output)
    }

    fn run(&self, run: &RunArgs) -> Result<Summary> {
        match self {
            Command::Split(a) => commands::split::run(a, run),
            Command::Corrupt(a) => commands::corrupt::run(a, run),
            Command::Stats(a) => commands::stats::run(a, run),
            Command::Relabel(a) => commands::relabel::run(a, run),
            Command::Filter(a) => commands::filter::run(a, run),
            Command::Evaluate(a) => commands::evaluate::run(a, run),
            Command::Retokenize(a) => commands::retokenize::run(a, run),
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.run.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    let started = now_ms();
    let summary = cli.command.run(&cli.run)?;
    let finished = now_ms();

    if let Some(report) = &summary.read_report {
        if let Some(path) = &cli.run.report {
            write_json_line(Some(path), &report.to_json())?;
        } else if report.skipped > 0 {
            write_json_line(None, &report.to_json())?;
        }
    }
    if !cli.run.no_manifest {
        let (input, output) = cli.command.paths();
        let manifest = RunManifest {
            subcommand: cli.command.name(),
            version: gecforge::VERSION,
            config: &summary.config,
            input,
            output,
            seed: summary.seed,
            started_at_ms: started,
            finished_at_ms: finished,
            counts: &summary.counts,
        };
        write_json_line(cli.run.manifest.as_ref(), &serde_json::to_string(&manifest)?)?;
    }
    Ok(if summary.counts.rejected > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("gecforge: {}", line.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gecforge: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
