use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use serde::Serialize;
use stressbench::simlab::{
    run_adaptive_attack, run_two_county_experiment, AttackConfig, TwoCountyConfig,
};
use stressbench::{Error, PrivacyLevel, Result};

use crate::emit;

#[derive(Subcommand, Debug)]
pub enum SimCmd {
    /// Train on one county, stress-test in and out of domain.
    TwoCounty(TwoCountyArgs),
    /// Hill-climb a stress test under the chosen feedback.
    Attack(AttackArgs),
}

#[derive(Args, Debug)]
pub struct Seeds {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds to run, one JSON report per line.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Also write one CSV row per seed.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TwoCountyArgs {
    #[command(flatten)]
    seeds: Seeds,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    flip: bool,
    #[arg(long, default_value_t = 0.0)]
    group_skew: f64,
    #[arg(long, default_value_t = 0.75)]
    threshold: f64,
}

#[derive(Args, Debug)]
pub struct AttackArgs {
    #[command(flatten)]
    seeds: Seeds,
    #[arg(long, default_value_t = 200)]
    rounds: usize,
    /// full, metric-only, pass-fail, ladder or ladder:<step>.
    #[arg(long, default_value = "full")]
    feedback: PrivacyLevel,
    #[arg(long, default_value_t = 500)]
    holdout_n: usize,
}

#[derive(Serialize)]
struct TwoCountyRow {
    seed: u64,
    acc_in: f64,
    acc_out: f64,
    pass_in: bool,
    pass_out: bool,
    final_train_loss: f64,
}

#[derive(Serialize)]
struct AttackRow {
    seed: u64,
    feedback: String,
    reported_metric: f64,
    fresh_metric: f64,
    overfit_gap: f64,
    accepted: usize,
}

fn write_csv<R: Serialize>(path: &PathBuf, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(cmd: SimCmd) -> Result<ExitCode> {
    match cmd {
        SimCmd::TwoCounty(a) => {
            let mut rows = Vec::new();
            for seed in a.seeds.seed..a.seeds.seed + a.seeds.seeds {
                let cfg = TwoCountyConfig {
                    n_per_domain: a.n,
                    rho: a.rho,
                    flip: a.flip,
                    group_skew: a.group_skew,
                    threshold: a.threshold,
                    seed,
                    ..Default::default()
                };
                let r = run_two_county_experiment(&cfg)?;
                emit(&r)?;
                rows.push(TwoCountyRow {
                    seed,
                    acc_in: r.acc_in,
                    acc_out: r.acc_out,
                    pass_in: r.pass_in,
                    pass_out: r.pass_out,
                    final_train_loss: r.final_train_loss,
                });
            }
            if let Some(path) = &a.seeds.csv {
                write_csv(path, &rows)?;
            }
        }
        SimCmd::Attack(a) => {
            let mut rows = Vec::new();
            for seed in a.seeds.seed..a.seeds.seed + a.seeds.seeds {
                let cfg = AttackConfig {
                    rounds: a.rounds,
                    feedback: a.feedback,
                    holdout_n: a.holdout_n,
                    seed,
                    ..Default::default()
                };
                let r = run_adaptive_attack(&cfg)?;
                emit(&r)?;
                rows.push(AttackRow {
                    seed,
                    feedback: a.feedback.to_string(),
                    reported_metric: r.reported_metric,
                    fresh_metric: r.fresh_metric,
                    overfit_gap: r.overfit_gap,
                    accepted: r.accepted,
                });
            }
            if let Some(path) = &a.seeds.csv {
                write_csv(path, &rows)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
