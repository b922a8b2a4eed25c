use std::fmt::Write;
use std::process::ExitCode;

use stressbench::{FilteredReport, ModelCard, Reader, Result};

use crate::config::Config;
use crate::{commands, emit, CardArgs, CardFormat};

pub fn card(a: CardArgs, cfg: &Config) -> Result<ExitCode> {
    let registry = commands::open_registry(a.store.as_deref(), cfg)?;
    let reader = a.stakeholder.map_or(Reader::Public, Reader::Stakeholder);
    let card = registry.get_model_card(&a.model_id, &reader)?;
    match a.format {
        CardFormat::Json => emit(&card)?,
        CardFormat::Markdown => print!("{}", markdown(&card)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "withheld".to_owned(), |x| format!("{x:.4}"))
}

fn result_cells(r: &FilteredReport) -> [String; 3] {
    [
        if r.passed { "pass" } else { "fail" }.to_owned(),
        cell(r.metric_value),
        cell(r.released_value),
    ]
}

/// One row per stress test. No summary row: results are not comparable
/// across tests.
pub fn markdown(card: &ModelCard) -> String {
    let mut out = String::new();
    let s = &card.snapshot;
    let _ = writeln!(out, "# Model card: {}\n", card.model_id);
    let _ = writeln!(out, "- lineage: `{}`", s.lineage);
    let _ = writeln!(out, "- model hash: `{}`", s.model_hash);
    let _ = writeln!(out, "- training data hash: `{}`", s.training_data_hash);
    let _ = writeln!(out, "- public key: `{}`\n", s.public_key);
    let _ = writeln!(out, "## Stress tests\n");
    if card.entries.is_empty() {
        let _ = writeln!(out, "No evaluations recorded.");
    } else {
        let _ = writeln!(
            out,
            "| stress test | curator | result | metric | released | evaluated | manifest |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|");
        for e in &card.entries {
            let [result, metric, released] = result_cells(&e.report);
            let _ = writeln!(
                out,
                "| {} | {} | {result} | {metric} | {released} | {} | `{}` |",
                e.stress_test_id,
                e.curator,
                e.evaluated_at.to_rfc3339(),
                e.manifest_digest
            );
        }
    }
    if !card.overlap_audits.is_empty() {
        let _ = writeln!(out, "\n## Overlap audits\n");
        for a in &card.overlap_audits {
            let hits: Vec<String> = a
                .reports
                .iter()
                .filter(|r| r.count > 0)
                .map(|r| format!("{} ({})", r.stress_test_id, r.count))
                .collect();
            let summary = if hits.is_empty() {
                "no overlap".to_owned()
            } else {
                hits.join(", ")
            };
            let _ = writeln!(out, "- {}: {summary}", a.audited_at.to_rfc3339());
        }
    }
    out
}
