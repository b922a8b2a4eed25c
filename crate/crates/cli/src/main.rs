//! `stressbench`: hashing, signing, evaluation, model cards, the registry
//! server and the simulation lab from the command line.
//!
//! JSON results go to stdout. Exit codes: 0 success, 1 domain error (a
//! `{code, message}` object on stderr) or failed verification, 2 usage error.

mod card;
mod commands;
mod config;
mod files;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stressbench::{PrivacyLevel, Result};

#[derive(Parser, Debug)]
#[command(
    name = "stressbench",
    version,
    about = "Fairness stress tests with signed predictions"
)]
struct Cli {
    /// Config file (default: $STRESSBENCH_HOME/config.toml when present).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Content hashes of examples, datasets, scores or model weights.
    #[command(subcommand)]
    Hash(HashCmd),
    /// Create a signing key. The seed goes to a 0600 file, never stdout.
    Keygen(KeygenArgs),
    /// Sign predictions (manifest JSONL on stdout) or, with --curator, a stress test.
    Sign(SignArgs),
    /// Check a signature manifest or a curator signature. Exit 0 iff all verify.
    Verify(VerifyArgs),
    /// Score predictions against a stress test and print the filtered report.
    Eval(EvalArgs),
    /// Print a model card from the registry store.
    Card(CardArgs),
    /// Count stress examples that also appear in a training set.
    AuditOverlap(AuditArgs),
    /// Run the registry HTTP API.
    Serve(ServeArgs),
    /// Write a two-county fixture set (training data, two stress tests, predictions).
    GenFixtures(FixtureArgs),
    /// Run simulation experiments.
    #[command(subcommand)]
    Simulate(simulate::SimCmd),
}

#[derive(Subcommand, Debug)]
enum HashCmd {
    /// One line per example: {"id", "hash"}.
    Examples {
        #[arg(long, value_name = "JSONL")]
        data: PathBuf,
    },
    /// Salted order-independent digest of a whole dataset.
    Dataset {
        #[arg(long, value_name = "JSONL")]
        data: PathBuf,
        /// 32 hex characters.
        #[arg(long)]
        salt: String,
    },
    /// Digest of a score's decimal rendering.
    Score { score: f64 },
    /// Salted digest of a weights file.
    Model {
        #[arg(long, value_name = "FILE")]
        weights: PathBuf,
        #[arg(long)]
        salt: String,
    },
}

#[derive(Args, Debug)]
struct KeygenArgs {
    /// Where to write the hex seed (mode 0600).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Replace an existing seed file.
    #[arg(long)]
    force: bool,
    /// Derive the key from a model snapshot of these weights instead of at random.
    #[arg(long, value_name = "FILE", requires_all = ["training", "model_id"])]
    weights: Option<PathBuf>,
    /// Training data hashed into the snapshot.
    #[arg(long, value_name = "JSONL", requires = "weights")]
    training: Option<PathBuf>,
    #[arg(long, requires = "weights")]
    model_id: Option<String>,
    #[arg(long, requires = "weights")]
    lineage: Option<String>,
    /// Where to keep the salted snapshot (mode 0600); default <out>.snapshot.json.
    #[arg(long, value_name = "FILE", requires = "weights")]
    snapshot_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TestFiles {
    /// Stress test manifest (`<name>.stress.json`).
    #[arg(long = "test", value_name = "FILE")]
    manifest: PathBuf,
    /// Stress test examples (JSON Lines).
    #[arg(long, value_name = "JSONL")]
    data: PathBuf,
}

#[derive(Args, Debug)]
struct SignArgs {
    #[command(flatten)]
    test: TestFiles,
    /// Hex seed file written by keygen.
    #[arg(long, value_name = "FILE")]
    key: PathBuf,
    /// Prediction entries (JSON Lines).
    #[arg(
        long,
        value_name = "JSONL",
        required_unless_present = "curator",
        conflicts_with = "curator"
    )]
    preds: Option<PathBuf>,
    #[arg(long, default_value = "local")]
    model_id: String,
    /// Sign the stress test itself and print the signed manifest.
    #[arg(long)]
    curator: bool,
}

#[derive(Args, Debug)]
#[group(id = "target", required = true, args = ["manifest", "test"])]
struct VerifyArgs {
    /// Signature manifest (JSON Lines).
    #[arg(long, value_name = "JSONL", requires = "pubkey")]
    manifest: Option<PathBuf>,
    /// Expected signer (64 hex characters).
    #[arg(long)]
    pubkey: Option<String>,
    /// Stress test manifest whose curator signature to check.
    #[arg(long = "test", value_name = "FILE", requires = "data")]
    test: Option<PathBuf>,
    #[arg(long, value_name = "JSONL")]
    data: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    test: TestFiles,
    #[arg(long, value_name = "JSONL")]
    preds: PathBuf,
    /// full, metric-only, pass-fail, ladder or ladder:<step>; default the test's own level.
    #[arg(long)]
    privacy: Option<PrivacyLevel>,
    #[arg(long, default_value = "local")]
    model_id: String,
    /// Ladder state carried between runs; created when missing.
    #[arg(long, value_name = "FILE")]
    ladder_state: Option<PathBuf>,
    /// Require every entry to carry a signature by this key (64 hex characters).
    #[arg(long)]
    pubkey: Option<String>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CardFormat {
    Json,
    Markdown,
}

#[derive(Args, Debug)]
struct CardArgs {
    #[arg(long)]
    model_id: String,
    /// View as this stakeholder (curators see full results of their tests).
    #[arg(long)]
    stakeholder: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: CardFormat,
    /// Registry journal (default: config `store`, else $STRESSBENCH_HOME/registry.jsonl).
    #[arg(long, value_name = "FILE")]
    store: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "training_source", required = true, args = ["training", "hashes"])]
struct AuditArgs {
    #[command(flatten)]
    test: TestFiles,
    /// Training examples (JSON Lines).
    #[arg(long, value_name = "JSONL")]
    training: Option<PathBuf>,
    /// Training example digests, one hex string per line.
    #[arg(long, value_name = "FILE")]
    hashes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Listen address (default: config `addr`, else 127.0.0.1:8080).
    #[arg(long)]
    addr: Option<String>,
    #[arg(long, value_name = "FILE")]
    store: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Examples per domain.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
}

/// Prints one compact JSON line.
pub(crate) fn emit<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = config::Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Hash(cmd) => commands::hash(cmd),
        Command::Keygen(a) => commands::keygen(a),
        Command::Sign(a) => commands::sign(a),
        Command::Verify(a) => commands::verify(a),
        Command::Eval(a) => commands::eval(a),
        Command::Card(a) => card::card(a, &cfg),
        Command::AuditOverlap(a) => commands::audit_overlap(a),
        Command::Serve(a) => commands::serve(a, &cfg),
        Command::GenFixtures(a) => commands::gen_fixtures(a),
        Command::Simulate(cmd) => simulate::simulate(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
