use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use tce_renorm::io::{
    orbit_rows, partition_document, renorm_report, return_rows, RunConfig, ORBIT_HEADER, RETURN_HEADER,
};
use tce_renorm::verify::run_suite;

/// Translated cone exchanges: orbits, return-map partitions, closed-form
/// return maps and renormalization.
#[derive(Parser)]
#[command(name = "tce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit samples as CSV `point_id,t,re,im`.
    Orbit,
    /// Atoms of the return partition and their preimages as JSON.
    Partition,
    /// Closed-form against iterated first returns as CSV.
    Return,
    /// Renormalization tower with a conjugacy check per step, as JSON.
    Renorm,
    /// Invariant suite as JUnit-style JSON; exits nonzero on failure.
    Verify,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the golden example when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    max_w: Option<u64>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Sample count for orbit, return and renorm.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    strict_boundaries: bool,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DEPTH: u8 = 3;

fn load_config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::golden(),
    };
    if let Some(p) = common.precision {
        cfg.precision_bits = p;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    if let Some(w) = common.max_w {
        cfg.partition.max_w = w;
    }
    if let Some(d) = common.depth {
        cfg.renorm.depth = d;
    }
    if let Some(n) = common.samples {
        cfg.orbit.count = n;
        cfg.ret.samples = n;
        cfg.renorm.samples = n;
    }
    cfg.strict_boundaries |= common.strict_boundaries;
    cfg.validate()?;
    // parameters are checked here so that bad angles or η are config errors
    cfg.params()?;
    Ok(cfg)
}

fn output(cfg: &RunConfig) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(cfg: &RunConfig, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = output(cfg)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(command: &Command, cfg: &RunConfig) -> anyhow::Result<u8> {
    match command {
        Command::Orbit => {
            let mut w = csv::Writer::from_writer(output(cfg)?);
            w.write_record(ORBIT_HEADER)?;
            let skipped = orbit_rows(cfg, |row| {
                w.write_record([row.point_id.to_string(), row.t.to_string(), row.re, row.im])
                    .map_err(|e| tce_renorm::Error::Parse(e.to_string()))
            })?;
            w.flush()?;
            for s in &skipped {
                warn!("start {} skipped: {}", s.point_id, s.reason);
            }
            info!("{} starts skipped", skipped.len());
            Ok(0)
        }
        Command::Partition => {
            write_json(
                cfg,
                &serde_json::to_value(partition_document(cfg, cfg.partition.max_w)?)?,
            )?;
            Ok(0)
        }
        Command::Return => {
            let rows = return_rows(cfg)?;
            let mut w = csv::Writer::from_writer(output(cfg)?);
            w.write_record(RETURN_HEADER)?;
            for row in &rows {
                if row.agree != "true" {
                    warn!("return at ({}, {}): {}", row.re, row.im, row.agree);
                }
                w.write_record(row.fields())?;
            }
            w.flush()?;
            Ok(0)
        }
        Command::Renorm => {
            let report = renorm_report(cfg, cfg.renorm.depth)?;
            write_json(cfg, &serde_json::to_value(&report)?)?;
            Ok(match (&report.stopped, report.pass) {
                (Some(reason), _) => {
                    warn!("tower stopped after {} steps: {reason}", report.certified_depth);
                    EXIT_DEPTH
                }
                (None, true) => 0,
                (None, false) => EXIT_FAILURE,
            })
        }
        Command::Verify => {
            let report = run_suite(cfg);
            write_json(cfg, &serde_json::to_value(&report)?)?;
            Ok(if report.passed() { 0 } else { EXIT_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load_config(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cli.command, &cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
