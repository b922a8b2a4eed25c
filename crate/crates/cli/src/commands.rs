use std::collections::HashSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use chrono::Utc;
use serde_json::json;
use stressbench::crypto::{
    hash_dataset, hash_example, hash_model, hash_score, manifest_to_jsonl, parse_manifest,
    sign_and_attach, sign_stress_results, signature_records, verify_stress_test, Digest, KeyPair,
    ModelSnapshot, PublicKey, Salt,
};
use stressbench::registry::{http, Store};
use stressbench::simlab::{gen_two_county, train_linear_scorer, TwoCountyConfig};
use stressbench::{
    evaluate_stress_test, filter_report, Error, LadderState, PredictionEntry, PredictionSet,
    PrivacyLevel, ProvenanceKind, Registry, Result, StressTest,
};

use crate::config::{Config, DEFAULT_ADDR};
use crate::files;
use crate::{
    emit, AuditArgs, EvalArgs, FixtureArgs, HashCmd, KeygenArgs, ServeArgs, SignArgs, VerifyArgs,
};

fn parse_hex<T: std::str::FromStr<Err = Error>>(what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|e: Error| Error::Decode(format!("{what}: {e}")))
}

pub fn hash(cmd: HashCmd) -> Result<ExitCode> {
    match cmd {
        HashCmd::Examples { data } => {
            for ex in files::read_dataset(&data, ProvenanceKind::StressData)?.examples() {
                emit(&json!({ "id": ex.id, "hash": hash_example(ex)? }))?;
            }
        }
        HashCmd::Dataset { data, salt } => {
            let ds = files::read_dataset(&data, ProvenanceKind::StressData)?;
            let salt: Salt = parse_hex("salt", &salt)?;
            emit(
                &json!({ "dataset_hash": hash_dataset(ds.examples(), &salt)?, "examples": ds.len() }),
            )?;
        }
        HashCmd::Score { score } => {
            emit(&json!({ "score": score, "score_hash": hash_score(score)? }))?
        }
        HashCmd::Model { weights, salt } => {
            let salt: Salt = parse_hex("salt", &salt)?;
            emit(&json!({ "model_hash": hash_model(&files::read_bytes(&weights)?, &salt)? }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn keygen(a: KeygenArgs) -> Result<ExitCode> {
    let Some(weights) = a.weights else {
        let keys = KeyPair::generate();
        files::write_secret(
            &a.out,
            &format!("{}\n", hex::encode(keys.expose_seed())),
            a.force,
        )?;
        emit(&json!({ "public_key": keys.public_key() }))?;
        return Ok(ExitCode::SUCCESS);
    };
    let training = files::read_dataset(
        a.training.as_deref().expect("clap requires"),
        ProvenanceKind::Training,
    )?;
    let model_id = a.model_id.expect("clap requires");
    let (mut snapshot, keys) =
        ModelSnapshot::create(model_id, &files::read_bytes(&weights)?, training.examples())?;
    snapshot.lineage = a.lineage;
    let snapshot_out = a.snapshot_out.unwrap_or_else(|| {
        let mut name = a.out.clone().into_os_string();
        name.push(".snapshot.json");
        name.into()
    });
    files::write_secret(
        &a.out,
        &format!("{}\n", hex::encode(keys.expose_seed())),
        a.force,
    )?;
    files::write_secret(
        &snapshot_out,
        &format!("{}\n", serde_json::to_string(&snapshot)?),
        a.force,
    )?;
    // the redacted snapshot is what gets registered
    emit(&snapshot.redacted())?;
    Ok(ExitCode::SUCCESS)
}

fn prediction_set(
    test: &StressTest,
    model_id: &str,
    entries: Vec<PredictionEntry>,
) -> Result<PredictionSet> {
    PredictionSet::new(model_id, test.id(), entries, Utc::now())
}

pub fn sign(a: SignArgs) -> Result<ExitCode> {
    let test = files::read_stress_test(&a.test.manifest, &a.test.data)?;
    let keys = files::read_seed(&a.key)?;
    match a.preds {
        None => {
            let signed = sign_and_attach(test, &keys)?;
            emit(signed.manifest())?;
        }
        Some(preds) => {
            let preds = prediction_set(&test, &a.model_id, files::read_predictions(&preds)?)?;
            let sigs = sign_stress_results(&test, &preds, &keys)?;
            print!(
                "{}",
                manifest_to_jsonl(&signature_records(&test, &preds, &sigs)?)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: VerifyArgs) -> Result<ExitCode> {
    if let (Some(manifest), Some(pubkey)) = (&a.manifest, &a.pubkey) {
        let expected: PublicKey = parse_hex("pubkey", pubkey)?;
        let mut failures = Vec::new();
        let records = parse_manifest(&files::read_text(manifest)?);
        for (i, rec) in records.iter().enumerate() {
            match rec {
                Ok(r) if r.verify_with(&expected) => {}
                Ok(_) => {
                    failures.push(json!({ "line": i + 1, "reason": "signature does not verify" }))
                }
                Err(e) => failures.push(json!({ "line": i + 1, "reason": e.to_string() })),
            }
        }
        let ok = failures.is_empty() && !records.is_empty();
        emit(&json!({ "valid": ok, "checked": records.len(), "failures": failures }))?;
        return Ok(if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }
    let test = files::read_stress_test(
        a.test.as_deref().expect("group"),
        a.data.as_deref().expect("requires"),
    )?;
    let ok = verify_stress_test(&test);
    emit(&json!({
        "valid": ok,
        "stress_test_id": test.id(),
        "signer": test.curator_signature().map(|s| s.signer),
    }))?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn load_ladder(path: Option<&Path>, test: &StressTest, step: f64) -> Result<LadderState> {
    match path {
        Some(p) if p.exists() => {
            let state: LadderState = serde_json::from_str(&files::read_text(p)?)?;
            if state.stress_test_id != test.id() {
                return Err(Error::SchemaViolation(format!(
                    "ladder state is for {:?}, not {:?}",
                    state.stress_test_id,
                    test.id()
                )));
            }
            Ok(state)
        }
        _ => LadderState::new(test.id(), "local", step, test.metric().direction),
    }
}

pub fn eval(a: EvalArgs) -> Result<ExitCode> {
    let mut test = files::read_stress_test(&a.test.manifest, &a.test.data)?;
    if let Some(level) = a.privacy {
        let mut manifest = test.manifest().clone();
        manifest.privacy = level;
        test = test.with_manifest(manifest)?;
    }
    let preds = prediction_set(&test, &a.model_id, files::read_predictions(&a.preds)?)?;
    if let Some(pk) = &a.pubkey {
        let pk: PublicKey = parse_hex("pubkey", pk)?;
        let sigs = preds
            .entries()
            .iter()
            .map(|e| {
                e.signature
                    .ok_or_else(|| Error::InvalidSignature(Some(e.example_id.clone())))
            })
            .collect::<Result<Vec<_>>>()?;
        let records = signature_records(&test, &preds, &sigs)?;
        if let Some((e, _)) = preds
            .entries()
            .iter()
            .zip(&records)
            .find(|(_, r)| !r.verify_with(&pk))
        {
            return Err(Error::InvalidSignature(Some(e.example_id.clone())));
        }
    }
    let now = Utc::now();
    let outcome = evaluate_stress_test(&test, &preds, now)?;
    let ladder = match test.privacy() {
        PrivacyLevel::Ladder { step } => Some(load_ladder(a.ladder_state.as_deref(), &test, step)?),
        _ => None,
    };
    let (report, next) = filter_report(&outcome, test.privacy(), ladder.as_ref(), now)?;
    if let (Some(path), Some(next)) = (&a.ladder_state, next) {
        files::write_text(path, &format!("{}\n", serde_json::to_string(&next)?))?;
    }
    emit(&report)?;
    Ok(ExitCode::SUCCESS)
}

pub fn audit_overlap(a: AuditArgs) -> Result<ExitCode> {
    let test = files::read_stress_test(&a.test.manifest, &a.test.data)?;
    let hashes: HashSet<Digest> = match (a.training, a.hashes) {
        (Some(training), _) => files::read_dataset(&training, ProvenanceKind::Training)?
            .examples()
            .iter()
            .map(hash_example)
            .collect::<Result<_>>()?,
        (None, Some(path)) => files::read_text(&path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_hex("training hash", l.trim()))
            .collect::<Result<_>>()?,
        (None, None) => unreachable!("clap group requires one source"),
    };
    emit(&stressbench::audit_overlap(&hashes, &test))?;
    Ok(ExitCode::SUCCESS)
}

pub fn open_registry(store: Option<&Path>, cfg: &Config) -> Result<Registry> {
    let path = store
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.store_path());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut reg = Registry::new(Store::open(&path)?);
    for (token, stakeholder) in &cfg.tokens {
        reg = reg.with_token(token, stakeholder);
    }
    Ok(reg)
}

pub fn serve(a: ServeArgs, cfg: &Config) -> Result<ExitCode> {
    let addr_text = a
        .addr
        .or_else(|| cfg.addr.clone())
        .unwrap_or_else(|| DEFAULT_ADDR.to_owned());
    let addr = addr_text
        .parse()
        .map_err(|e| Error::InvalidConfig(format!("listen address {addr_text:?}: {e}")))?;
    let registry = Arc::new(open_registry(a.store.as_deref(), cfg)?);
    eprintln!(
        "listening on {addr}, store {}",
        registry
            .store()
            .path()
            .map_or("(memory)".into(), |p| p.display().to_string())
    );
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(http::serve(registry, addr))?;
    Ok(ExitCode::SUCCESS)
}

pub fn gen_fixtures(a: FixtureArgs) -> Result<ExitCode> {
    let cfg = TwoCountyConfig {
        n_per_domain: a.n,
        rho: a.rho,
        seed: a.seed,
        ..Default::default()
    };
    let tc = gen_two_county(&cfg)?;
    let scorer = train_linear_scorer(&tc.train, cfg.lr, cfg.epochs)?;
    let mut written = vec![];
    let mut write = |name: &str, text: String| -> Result<()> {
        let path = a.out.join(name);
        files::write_text(&path, &text)?;
        written.push(path.display().to_string());
        Ok(())
    };
    write("train.jsonl", tc.train.to_jsonl()?)?;
    for (stem, test) in [("in", &tc.stress_in), ("out", &tc.stress_out)] {
        write(&format!("{stem}.jsonl"), test.examples().to_jsonl()?)?;
        write(
            &format!("{stem}.stress.json"),
            format!("{}\n", serde_json::to_string_pretty(test.manifest())?),
        )?;
        let mut preds = String::new();
        for ex in test.examples().examples() {
            let entry = PredictionEntry::new(ex.id.clone(), scorer.score(ex)?);
            preds.push_str(&serde_json::to_string(&entry)?);
            preds.push('\n');
        }
        write(&format!("{stem}.preds.jsonl"), preds)?;
    }
    emit(&json!({ "files": written, "weights": scorer.weights, "bias": scorer.bias }))?;
    Ok(ExitCode::SUCCESS)
}
