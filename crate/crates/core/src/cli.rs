//! Command-line front end. Exit codes: 0 success, 1 some view could not be
//! synchronized (or fuzzing found a disagreement), 2 usage or load error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::esql::print_view;
use crate::fuzz;
use crate::kbfile::{self, LoadedKb};
use crate::model::ChangeEvent;
use crate::oracle::InstanceSpec;
use crate::report;
use crate::sync::synchronize;

#[derive(Debug, Parser)]
#[command(
    name = "wssync",
    version,
    about = "Keep web-service views valid across source schema deletions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    pub output: Output,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a knowledge base and print what it contains.
    Load { kb: PathBuf },
    /// Apply a deletion and print how each affected view was rewritten.
    Sync {
        kb: PathBuf,
        /// `delete-attribute S.R.A` or `delete-relation S.R`.
        #[arg(num_args = 1..=2, required = true)]
        event: Vec<String>,
    },
    /// Print stored views in canonical form.
    Show { kb: PathBuf, view_id: Option<String> },
    /// Load a knowledge base and report consistency warnings.
    Validate { kb: PathBuf },
    /// Compare the engine with the brute-force oracle on random instances.
    Fuzz {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs a parsed command, writing results to `out` and diagnostics to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn load(path: &PathBuf, err: &mut dyn Write) -> anyhow::Result<LoadedKb> {
    let kb = kbfile::load_path(path)?;
    for w in &kb.warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(kb)
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> anyhow::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let json = cli.output == Output::Json;
    match &cli.command {
        Command::Load { kb } => {
            let kb = load(kb, err)?;
            if json {
                emit_json(out, &json!({ "loaded": kb.stats, "warnings": kb.warnings }))?;
            } else {
                writeln!(out, "loaded {}", kb.stats)?;
            }
            Ok(EXIT_OK)
        }
        Command::Validate { kb } => {
            let kb = load(kb, err)?;
            if json {
                emit_json(out, &json!({ "valid": true, "warnings": kb.warnings }))?;
            } else if kb.warnings.is_empty() {
                writeln!(out, "valid")?;
            } else {
                writeln!(out, "valid with {} warning(s)", kb.warnings.len())?;
            }
            Ok(EXIT_OK)
        }
        Command::Show { kb, view_id } => {
            let kb = load(kb, err)?;
            let records: Vec<_> = match view_id {
                Some(id) => vec![kb.wsvkb.view(id).ok_or_else(|| anyhow::anyhow!("unknown view {id}"))?],
                None => kb.wsvkb.views().collect(),
            };
            if json {
                let views: Vec<_> = records
                    .iter()
                    .map(|r| {
                        json!({
                            "id": r.view_id,
                            "definition": print_view(&r.definition),
                            "web_services": kb.wsvkb.web_services_of_view(&r.view_id).unwrap_or_default(),
                        })
                    })
                    .collect();
                emit_json(out, &json!({ "views": views }))?;
            } else {
                for (i, r) in records.iter().enumerate() {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    write!(out, "{}", print_view(&r.definition))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sync { kb, event } => {
            let event: ChangeEvent = event.join(" ").parse()?;
            let mut kb = load(kb, err)?;
            let report = synchronize(&mut kb.wsmkb, &mut kb.wsvkb, &event)?;
            if json {
                emit_json(out, &report::render_json(&report))?;
            } else {
                write!(out, "{}", report::render_text(&report))?;
            }
            Ok(if report.any_failed() { EXIT_FAILED } else { EXIT_OK })
        }
        Command::Fuzz { trials, seed } => {
            let summary = fuzz::run(*trials as usize, *seed, &InstanceSpec::default());
            if json {
                emit_json(
                    out,
                    &json!({
                        "trials": summary.trials,
                        "agreed": summary.agreed,
                        "rewritten": summary.rewritten,
                        "first_failure": summary.first_failure.as_ref().map(|(s, why)| json!({ "seed": s, "reason": why })),
                    }),
                )?;
            } else {
                writeln!(out, "{summary}")?;
            }
            Ok(if summary.first_failure.is_none() {
                EXIT_OK
            } else {
                EXIT_FAILED
            })
        }
    }
}
