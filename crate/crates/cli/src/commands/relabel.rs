use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use clap::Args;
use gecforge::cleaning::{relabel, EndpointConfig, HttpEndpoint, IdentityRewriter, Lanes, Rewriter};
use gecforge::corpus_io::PairWriter;
use serde_json::{json, Value};

use crate::common::{open_output, Records, Rejects, Summary};
use crate::{IoArgs, RunArgs};

/// Connection settings shared by `relabel` and `filter`.
#[derive(Args, Debug, Clone)]
pub struct EndpointArgs {
    /// Base URL of an HTTP rewriter or scorer.
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    /// Batches processed concurrently.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub in_flight: u64,
    /// Per-batch timeout.
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    /// Delay before the first retry; later retries double it.
    #[arg(long, default_value_t = 1000)]
    pub backoff_ms: u64,
}

impl EndpointArgs {
    pub fn lanes(&self, run: &RunArgs) -> Lanes {
        let in_flight = self.in_flight as usize;
        Lanes { batch_size: self.batch_size as usize, in_flight: run.threads.map_or(in_flight, |t| in_flight.min(t.max(1))) }
    }

    pub fn endpoint_config(&self, url: &str, run: &RunArgs) -> EndpointConfig {
        let lanes = self.lanes(run);
        let mut config = EndpointConfig::new(url).with_env_auth();
        config.batch_size = lanes.batch_size;
        config.in_flight = lanes.in_flight;
        config.timeout = Duration::from_secs(self.timeout_secs);
        config.max_retries = self.max_retries;
        config.backoff = Duration::from_millis(self.backoff_ms);
        config
    }

    pub fn describe(&self, run: &RunArgs) -> Value {
        let lanes = self.lanes(run);
        json!({
            "endpoint": self.endpoint,
            "batch_size": lanes.batch_size,
            "in_flight": lanes.in_flight,
            "timeout_secs": self.timeout_secs,
            "max_retries": self.max_retries,
            "backoff_ms": self.backoff_ms,
        })
    }
}

#[derive(Args, Debug)]
pub struct RelabelArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
    /// Built-in rewriter instead of an endpoint (`builtin:identity`).
    #[arg(long, value_name = "NAME", conflicts_with = "endpoint")]
    pub rewriter: Option<String>,
    /// Records whose batch failed go here (standard error by default).
    #[arg(long, value_name = "PATH")]
    pub rejects: Option<PathBuf>,
}

pub fn run(args: &RelabelArgs, run: &RunArgs) -> Result<Summary> {
    let rewriter: Box<dyn Rewriter> = match (&args.endpoint.endpoint, args.rewriter.as_deref()) {
        (Some(url), _) => Box::new(HttpEndpoint::new(args.endpoint.endpoint_config(url, run))),
        (None, Some("builtin:identity")) => Box::new(IdentityRewriter),
        (None, Some(other)) => bail!("unknown rewriter {other} (expected builtin:identity)"),
        (None, None) => bail!("relabel needs --endpoint or --rewriter"),
    };

    let mut records = Records::open(&args.io.input, run.strict)?;
    let mut out = PairWriter::new(open_output(&args.io.output)?);
    let mut rejects = Rejects::open(args.rejects.as_deref())?;
    relabel(records.by_ref(), rewriter.as_ref(), args.endpoint.lanes(run), |outcome| -> Result<()> {
        match outcome {
            Ok(pair) => out.write(&pair)?,
            Err((pair, reason)) => rejects.write(&pair, &reason)?,
        }
        Ok(())
    })?;
    let report = records.finish()?;
    out.flush()?;
    let rejected = rejects.finish()?;
    let mut config = args.endpoint.describe(run);
    config["rewriter"] = json!(args.rewriter);
    Ok(Summary::from_read(config, report, out.written(), rejected))
}
