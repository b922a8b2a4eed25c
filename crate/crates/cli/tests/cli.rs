use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use stressbench::crypto::{sha256, sign_stress_results, KeyPair, ModelSnapshot};
use stressbench::registry::Store;
use stressbench::{
    Example, Label, MetricKind, MetricSpec, PredictionEntry, PredictionSet, PrivacyLevel, Registry,
    StressManifest, StressTest,
};

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn new() -> Self {
        Env {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_stressbench"))
            .args(args)
            .env("STRESSBENCH_HOME", self.path("home"))
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn fixtures(&self) -> PathBuf {
        let dir = self.path("fx");
        self.ok(&[
            "gen-fixtures",
            "--out",
            s(&dir),
            "--n",
            "120",
            "--seed",
            "3",
        ]);
        dir
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text.trim()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn eval_prints_filtered_report_deterministically() {
    let env = Env::new();
    let fx = env.fixtures();
    let args = |privacy: &'static str| {
        vec![
            "eval".to_owned(),
            "--test".into(),
            s(&fx.join("in.stress.json")).into(),
            "--data".into(),
            s(&fx.join("in.jsonl")).into(),
            "--preds".into(),
            s(&fx.join("in.preds.jsonl")).into(),
            "--privacy".into(),
            privacy.into(),
        ]
    };
    let run = |privacy| {
        let a = args(privacy);
        env.ok(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let full = run("full");
    assert_eq!(full, run("full"));
    let report = json(&full);
    assert!(report["metric_value"].as_f64().unwrap() > 0.75);
    assert_eq!(report["per_example"].as_array().unwrap().len(), 120);

    let keys = |v: Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(json(&run("metric-only"))), ["metric_value", "passed"]);
    assert_eq!(keys(json(&run("pass-fail"))), ["passed"]);
    assert_eq!(
        keys(json(&run("ladder:0.05"))),
        ["passed", "released_value"]
    );
}

#[test]
fn ladder_state_persists_between_runs() {
    let env = Env::new();
    let fx = env.fixtures();
    let state = env.path("ladder.json");
    let test = fx.join("out.stress.json");
    let data = fx.join("out.jsonl");
    let preds = fx.join("out.preds.jsonl");
    let args = [
        "eval",
        "--test",
        s(&test),
        "--data",
        s(&data),
        "--preds",
        s(&preds),
        "--privacy",
        "ladder:0.1",
        "--ladder-state",
        s(&state),
    ];
    let first = json(&env.ok(&args));
    let second = json(&env.ok(&args));
    assert_eq!(first["released_value"], second["released_value"]);
    let saved = json(&std::fs::read_to_string(&state).unwrap());
    assert_eq!(saved["history"].as_array().unwrap().len(), 1);
}

#[test]
fn keygen_keeps_seed_off_stdout() {
    let env = Env::new();
    let seed = env.path("seed.hex");
    let out = env.ok(&["keygen", "--out", s(&seed)]);
    let pk = json(&out)["public_key"].as_str().unwrap().to_owned();
    assert_eq!(pk.len(), 64);
    let stored = std::fs::read_to_string(&seed).unwrap();
    assert!(!out.contains(stored.trim()));
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        assert_eq!(
            std::fs::metadata(&seed).unwrap().permissions().mode() & 0o777,
            0o600
        );
    }
    // refuses to clobber an existing key
    let again = env.run(&["keygen", "--out", s(&seed)]);
    assert_eq!(code(&again), 1);
    assert_eq!(
        json(&String::from_utf8_lossy(&again.stderr))["code"],
        "io_error"
    );
}

#[test]
fn snapshot_keygen_derives_from_weights() {
    let env = Env::new();
    let fx = env.fixtures();
    let weights = env.path("weights.bin");
    std::fs::write(&weights, b"model weights v1").unwrap();
    let seed = env.path("model.seed");
    let out = env.ok(&[
        "keygen",
        "--out",
        s(&seed),
        "--weights",
        s(&weights),
        "--training",
        s(&fx.join("train.jsonl")),
        "--model-id",
        "m-1",
    ]);
    let public = json(&out);
    assert!(public.get("key_salt").is_none());
    let full: ModelSnapshot = serde_json::from_str(
        &std::fs::read_to_string(env.path("model.seed.snapshot.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(full.verify_derivation(), Some(true));
    assert_eq!(public["public_key"], full.public_key.to_string());
}

#[test]
fn sign_then_verify_and_detect_tampering() {
    let env = Env::new();
    let fx = env.fixtures();
    let seed = env.path("seed.hex");
    let pk = json(&env.ok(&["keygen", "--out", s(&seed)]))["public_key"]
        .as_str()
        .unwrap()
        .to_owned();
    let (test, data, preds) = (
        fx.join("in.stress.json"),
        fx.join("in.jsonl"),
        fx.join("in.preds.jsonl"),
    );
    let sign_args = [
        "sign",
        "--test",
        s(&test),
        "--data",
        s(&data),
        "--preds",
        s(&preds),
        "--key",
        s(&seed),
    ];
    let manifest = env.ok(&sign_args);
    assert_eq!(manifest, env.ok(&sign_args));
    assert_eq!(manifest.lines().count(), 120);
    let sigs = env.path("sigs.jsonl");
    std::fs::write(&sigs, &manifest).unwrap();
    let report = json(&env.ok(&["verify", "--manifest", s(&sigs), "--pubkey", &pk]));
    assert_eq!(report["checked"], 120);

    let mut lines: Vec<String> = manifest.lines().map(String::from).collect();
    let mut rec = json(&lines[7]);
    let score_hash = rec["score_hash"].as_str().unwrap().to_owned();
    let flipped = if score_hash.starts_with('0') {
        "1"
    } else {
        "0"
    };
    rec["score_hash"] = Value::String(format!("{flipped}{}", &score_hash[1..]));
    lines[7] = rec.to_string();
    std::fs::write(&sigs, lines.join("\n")).unwrap();
    let out = env.run(&["verify", "--manifest", s(&sigs), "--pubkey", &pk]);
    assert_eq!(code(&out), 1);
    let report = json(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(report["failures"][0]["line"], 8);
}

#[test]
fn curator_signature_round_trip() {
    let env = Env::new();
    let fx = env.fixtures();
    let seed = env.path("curator.hex");
    env.ok(&["keygen", "--out", s(&seed)]);
    let data = fx.join("in.jsonl");
    let signed = env.ok(&[
        "sign",
        "--curator",
        "--test",
        s(&fx.join("in.stress.json")),
        "--data",
        s(&data),
        "--key",
        s(&seed),
    ]);
    let signed_path = env.path("signed.stress.json");
    std::fs::write(&signed_path, &signed).unwrap();
    assert!(
        json(&env.ok(&["verify", "--test", s(&signed_path), "--data", s(&data)]))["valid"]
            .as_bool()
            .unwrap()
    );
    let unsigned = env.run(&[
        "verify",
        "--test",
        s(&fx.join("in.stress.json")),
        "--data",
        s(&data),
    ]);
    assert_eq!(code(&unsigned), 1);
    // signed manifest against other data
    let other = env.run(&[
        "verify",
        "--test",
        s(&signed_path),
        "--data",
        s(&fx.join("out.jsonl")),
    ]);
    assert_eq!(code(&other), 1);
}

#[test]
fn usage_and_domain_errors_have_distinct_exit_codes() {
    let env = Env::new();
    let out = env.run(&["eval", "--bogus"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
    assert_eq!(code(&env.run(&["frobnicate"])), 2);
    assert_eq!(code(&env.run(&["verify"])), 2);

    let fx = env.fixtures();
    let out = env.run(&[
        "eval",
        "--test",
        s(&fx.join("in.stress.json")),
        "--data",
        s(&fx.join("in.jsonl")),
        "--preds",
        s(&fx.join("out.preds.jsonl")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
    assert_eq!(
        json(&String::from_utf8_lossy(&out.stderr))["code"],
        "coverage_mismatch"
    );

    let out = env.run(&[
        "hash",
        "dataset",
        "--data",
        s(&fx.join("in.jsonl")),
        "--salt",
        "xyz",
    ]);
    assert_eq!(
        json(&String::from_utf8_lossy(&out.stderr))["code"],
        "decode_error"
    );
}

#[test]
fn hash_outputs_match_library() {
    let env = Env::new();
    let out = json(&env.ok(&["hash", "score", "0.5"]));
    assert_eq!(
        out["score_hash"],
        "d2cbad71ff333de67d07ec676e352ab7f38248eb69c942950157220607c55e84"
    );
    let data = env.path("ab.jsonl");
    std::fs::write(
        &data,
        "{\"id\":\"a\",\"label\":1}\n{\"id\":\"b\",\"label\":-1}\n",
    )
    .unwrap();
    let salt = "000102030405060708090a0b0c0d0e0f";
    let out = json(&env.ok(&["hash", "dataset", "--data", s(&data), "--salt", salt]));
    assert_eq!(
        out["dataset_hash"],
        "c34a4b28aeb995446d4fd9a418ea8aa611fa8ca3213d9111ac3b87d4cb4940d1"
    );
    let lines = env.ok(&["hash", "examples", "--data", s(&data)]);
    assert_eq!(
        json(lines.lines().next().unwrap())["hash"],
        "e383797d913c48031d483964140a2e7c05a8a3ea40d46b37d8e9f6d0ca26d3e9"
    );
}

#[test]
fn audit_overlap_finds_reused_examples() {
    let env = Env::new();
    let fx = env.fixtures();
    let test = fx.join("in.stress.json");
    let data = fx.join("in.jsonl");
    let leaked = json(&env.ok(&[
        "audit-overlap",
        "--test",
        s(&test),
        "--data",
        s(&data),
        "--training",
        s(&data),
    ]));
    assert_eq!(leaked["count"], 120);
    let clean = json(&env.ok(&[
        "audit-overlap",
        "--test",
        s(&test),
        "--data",
        s(&data),
        "--training",
        s(&fx.join("train.jsonl")),
    ]));
    assert_eq!(clean["count"], 0);
}

fn seed_registry(store: &Path) {
    let reg = Registry::new(Store::open(store).unwrap());
    let keys = KeyPair::from_seed([4; 32]);
    let snapshot = ModelSnapshot {
        model_id: "m".into(),
        lineage: None,
        model_hash: sha256(b"m"),
        model_salt: None,
        training_data_hash: sha256(b"t"),
        training_salt: None,
        key_salt: None,
        public_key: keys.public_key(),
    };
    reg.register_model(&snapshot).unwrap();
    for (id, privacy) in [
        ("open-test", PrivacyLevel::Full),
        ("quiet-test", PrivacyLevel::PassFail),
    ] {
        let examples = (0..3)
            .map(|i| Example::new(format!("{id}-{i}")).with_label(Label::Positive))
            .collect();
        let m = StressManifest::new(
            id,
            "desk",
            MetricSpec::new(MetricKind::Accuracy, 0.5).unwrap(),
            privacy,
        );
        let test = StressTest::new(m, examples).unwrap();
        reg.submit_stress_test(&test).unwrap();
        let entries = test
            .examples()
            .examples()
            .iter()
            .map(|e| PredictionEntry::new(e.id.clone(), 0.9))
            .collect();
        let preds = PredictionSet::new("m", id, entries, reg.now()).unwrap();
        let sigs = sign_stress_results(&test, &preds, &keys).unwrap();
        reg.submit_evaluation("m", id, &preds, &sigs).unwrap();
    }
}

#[test]
fn card_reads_the_store_under_home() {
    let env = Env::new();
    std::fs::create_dir_all(env.path("home")).unwrap();
    seed_registry(&env.path("home/registry.jsonl"));

    let card = json(&env.ok(&["card", "--model-id", "m"]));
    let entries = card["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries[1]["report"].get("metric_value").is_none());
    let curated = json(&env.ok(&["card", "--model-id", "m", "--stakeholder", "desk"]));
    assert!(curated["entries"][1]["report"]
        .get("metric_value")
        .is_some());

    let md = env.ok(&["card", "--model-id", "m", "--format", "markdown"]);
    assert!(md.contains("| open-test | desk | pass | 1.0000 |"));
    assert!(md.contains("| quiet-test | desk | pass | withheld |"));

    let out = env.run(&["card", "--model-id", "nobody"]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        json(&String::from_utf8_lossy(&out.stderr))["code"],
        "unknown_model"
    );
}

#[test]
fn config_file_is_validated() {
    let env = Env::new();
    let cfg = env.path("bad.toml");
    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let out = env.run(&["--config", s(&cfg), "hash", "score", "0.1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        json(&String::from_utf8_lossy(&out.stderr))["code"],
        "invalid_config"
    );

    std::fs::create_dir_all(env.path("elsewhere")).unwrap();
    seed_registry(&env.path("elsewhere/r.jsonl"));
    let good = env.path("good.toml");
    std::fs::write(
        &good,
        format!(
            "store = \"{}\"\n\n[tokens]\nabc = \"desk\"\n",
            s(&env.path("elsewhere/r.jsonl"))
        ),
    )
    .unwrap();
    let card = json(&env.ok(&["--config", s(&good), "card", "--model-id", "m"]));
    assert_eq!(card["model_id"], "m");
}

#[test]
fn simulate_writes_reports_and_csv() {
    let env = Env::new();
    let csv = env.path("runs.csv");
    let out = env.ok(&[
        "simulate",
        "two-county",
        "--n",
        "200",
        "--seeds",
        "3",
        "--csv",
        s(&csv),
    ]);
    let reports: Vec<Value> = out.lines().map(json).collect();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[2]["config"]["seed"], 2);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("seed,acc_in,acc_out,pass_in,pass_out,final_train_loss"));

    let a = env.ok(&[
        "simulate",
        "attack",
        "--rounds",
        "5",
        "--feedback",
        "ladder:0.01",
        "--seed",
        "1",
    ]);
    assert_eq!(
        a,
        env.ok(&[
            "simulate",
            "attack",
            "--rounds",
            "5",
            "--feedback",
            "ladder:0.01",
            "--seed",
            "1"
        ])
    );
    assert_eq!(json(&a)["feedback_history"].as_array().unwrap().len(), 6);
}
