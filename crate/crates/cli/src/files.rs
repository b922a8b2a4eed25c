//! File formats read and written by the CLI.

use std::fs;
use std::io;
use std::path::Path;

use stressbench::crypto::KeyPair;
use stressbench::{
    Dataset, Error, PredictionEntry, Provenance, ProvenanceKind, Result, StressManifest, StressTest,
};

fn with_path(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| with_path(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| with_path(dir, e))?;
    }
    fs::write(path, text).map_err(|e| with_path(path, e))
}

/// Writes a file only the owner can read. Refuses to replace an existing
/// file unless `force` is set.
pub fn write_secret(path: &Path, text: &str, force: bool) -> Result<()> {
    use std::io::Write;
    let mut opts = fs::OpenOptions::new();
    opts.write(true);
    if force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut file = opts.open(path).map_err(|e| with_path(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        file.set_permissions(fs::Permissions::from_mode(0o600))
            .map_err(|e| with_path(path, e))?;
    }
    file.write_all(text.as_bytes())
        .map_err(|e| with_path(path, e))
}

pub fn read_dataset(path: &Path, kind: ProvenanceKind) -> Result<Dataset> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    Dataset::from_jsonl(
        name,
        Provenance::new(kind, path.display().to_string()),
        &read_text(path)?,
    )
}

pub fn read_manifest(path: &Path) -> Result<StressManifest> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Decode(format!("{}: {e}", path.display())))
}

/// A stress test from its `.stress.json` manifest and JSON Lines data.
pub fn read_stress_test(manifest: &Path, data: &Path) -> Result<StressTest> {
    let examples = read_dataset(data, ProvenanceKind::StressData)?;
    StressTest::new(read_manifest(manifest)?, examples.examples().to_vec())
}

/// Prediction entries, one JSON object per line.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionEntry>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Decode(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// A 32-byte Ed25519 seed stored as 64 hex characters.
pub fn read_seed(path: &Path) -> Result<KeyPair> {
    let text = read_text(path)?;
    let bytes =
        hex::decode(text.trim()).map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
    let seed: [u8; 32] = bytes
        .try_into()
        .map_err(|_| Error::Decode(format!("{}: seed must be 32 bytes", path.display())))?;
    Ok(KeyPair::from_seed(seed))
}
