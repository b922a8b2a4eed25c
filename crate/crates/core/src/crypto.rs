//! Content hashes, password-derived signing keys, and signed predictions.
//!
//! Hashes are SHA-256. A model's signing key is derived by running scrypt
//! over the hex of its (salted) weight hash and feeding the 32-byte output
//! to Ed25519 as the secret seed, so anyone holding the weights and the
//! salts can re-derive the exact key pair.
//!
//! A prediction signature covers the 64-byte message
//! `hash_example(x) ‖ hash_score(r)`; a curator signature covers
//! `hash_dataset(examples, dataset_salt) ‖ SHA-256(unsigned manifest)`.

use std::fmt;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::canonical::{self, render_number};
use crate::error::{Error, Result};
use crate::hexser::hex_newtype;
use crate::types::{check_score, Example, PredictionSet, StressTest};

/// scrypt cost parameters used for key derivation.
pub const SCRYPT_LOG_N: u8 = 15;
pub const SCRYPT_R: u32 = 8;
pub const SCRYPT_P: u32 = 1;

/// A SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);
hex_newtype!(Digest, 32);

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({self})")
    }
}

/// 16 random bytes mixed into a hash preimage.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Salt(pub [u8; 16]);
hex_newtype!(Salt, 16);

impl fmt::Debug for Salt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Salt({self})")
    }
}

impl Salt {
    /// Fresh salt from the thread-local CSPRNG (OS-seeded ChaCha).
    pub fn generate() -> Self {
        let mut bytes = [0u8; 16];
        rand::rng().fill_bytes(&mut bytes);
        Salt(bytes)
    }
}

/// An Ed25519 public key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey(pub [u8; 32]);
hex_newtype!(PublicKey, 32);

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({self})")
    }
}

/// Raw 64-byte Ed25519 signature.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureBytes(pub [u8; 64]);
hex_newtype!(SignatureBytes, 64);

impl fmt::Debug for SignatureBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignatureBytes({self})")
    }
}

/// A signature together with the key that produced it.
///
/// Serialised as 192 hex characters: the 64 signature bytes followed by the
/// 32 signer key bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub bytes: SignatureBytes,
    pub signer: PublicKey,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.bytes, self.signer)
    }
}

impl std::str::FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let raw = crate::hexser::decode_fixed::<96>(s.trim()).map_err(Error::Decode)?;
        let mut bytes = [0u8; 64];
        let mut signer = [0u8; 32];
        bytes.copy_from_slice(&raw[..64]);
        signer.copy_from_slice(&raw[64..]);
        Ok(Signature {
            bytes: SignatureBytes(bytes),
            signer: PublicKey(signer),
        })
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A deterministic Ed25519 key pair. Deliberately not serialisable.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
    public: PublicKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .field("private_seed", &"<redacted>")
            .finish()
    }
}

impl KeyPair {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        let signing = SigningKey::from_bytes(&seed);
        let public = PublicKey(signing.verifying_key().to_bytes());
        KeyPair { signing, public }
    }

    pub fn generate() -> Self {
        let mut seed = [0u8; 32];
        rand::rng().fill_bytes(&mut seed);
        KeyPair::from_seed(seed)
    }

    pub fn public_key(&self) -> PublicKey {
        self.public
    }

    /// The 32-byte secret seed. Only `keygen` writes this, to a
    /// mode-restricted file.
    pub fn expose_seed(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        Signature {
            bytes: SignatureBytes(self.signing.sign(message).to_bytes()),
            signer: self.public,
        }
    }
}

/// Checks `sig` over `message` under `public_key`. Malformed keys or
/// signatures yield `false`, never an error.
pub fn verify_message(sig: &SignatureBytes, message: &[u8], public_key: &PublicKey) -> bool {
    let Ok(key) = VerifyingKey::from_bytes(&public_key.0) else {
        return false;
    };
    let sig = ed25519_dalek::Signature::from_bytes(&sig.0);
    key.verify_strict(message, &sig).is_ok()
}

pub fn sha256(bytes: &[u8]) -> Digest {
    Digest(Sha256::digest(bytes).into())
}

/// SHA-256 of the example's canonical encoding (unsalted).
pub fn hash_example(example: &Example) -> Result<Digest> {
    Ok(sha256(&canonical::canonical_encode(example)?))
}

/// SHA-256 of the score's shortest round-trip decimal rendering.
pub fn hash_score(score: f64) -> Result<Digest> {
    check_score(score)?;
    Ok(sha256(render_number(score)?.as_bytes()))
}

/// `SHA-256(salt ‖ d₁ ‖ … ‖ dₙ)` over the per-example digests sorted
/// bytewise, so the result does not depend on example order.
pub fn hash_dataset(examples: &[Example], salt: &Salt) -> Result<Digest> {
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut digests = examples
        .iter()
        .map(hash_example)
        .collect::<Result<Vec<_>>>()?;
    digests.sort_unstable();
    let mut h = Sha256::new();
    h.update(salt.0);
    for d in &digests {
        h.update(d.0);
    }
    Ok(Digest(h.finalize().into()))
}

/// `SHA-256(salt ‖ weights)`; the weight file is opaque bytes.
pub fn hash_model(weights: &[u8], salt: &Salt) -> Result<Digest> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut h = Sha256::new();
    h.update(salt.0);
    h.update(weights);
    Ok(Digest(h.finalize().into()))
}

/// Raw scrypt (RFC 7914) with explicit cost parameters.
pub fn scrypt_kdf(
    password: &[u8],
    salt: &[u8],
    log_n: u8,
    r: u32,
    p: u32,
    out_len: usize,
) -> Result<Vec<u8>> {
    let params = scrypt::Params::new(log_n, r, p, out_len)
        .map_err(|e| Error::InvalidConfig(format!("scrypt parameters: {e}")))?;
    let mut out = vec![0u8; out_len];
    scrypt::scrypt(password, salt, &params, &mut out)
        .map_err(|e| Error::InvalidConfig(format!("scrypt output length: {e}")))?;
    Ok(out)
}

/// Derives the model key pair: the Ed25519 seed is
/// `scrypt(hex(model_hash), key_salt, N = 2^15, r = 8, p = 1, 32 bytes)`.
pub fn derive_keys(model_hash: &Digest, key_salt: &Salt) -> KeyPair {
    let seed = scrypt_kdf(
        model_hash.to_string().as_bytes(),
        &key_salt.0,
        SCRYPT_LOG_N,
        SCRYPT_R,
        SCRYPT_P,
        32,
    )
    .expect("fixed scrypt parameters are valid");
    KeyPair::from_seed(seed.try_into().expect("32-byte output"))
}

pub fn prediction_message(example_hash: &Digest, score_hash: &Digest) -> [u8; 64] {
    let mut msg = [0u8; 64];
    msg[..32].copy_from_slice(&example_hash.0);
    msg[32..].copy_from_slice(&score_hash.0);
    msg
}

pub fn sign_prediction(example_hash: &Digest, score_hash: &Digest, keys: &KeyPair) -> Signature {
    keys.sign(&prediction_message(example_hash, score_hash))
}

pub fn verify_prediction(
    sig: &Signature,
    example_hash: &Digest,
    score_hash: &Digest,
    public_key: &PublicKey,
) -> bool {
    verify_message(
        &sig.bytes,
        &prediction_message(example_hash, score_hash),
        public_key,
    )
}

/// One signature per prediction entry, in entry order.
pub fn sign_stress_results(
    test: &StressTest,
    preds: &PredictionSet,
    keys: &KeyPair,
) -> Result<Vec<Signature>> {
    preds.check_coverage(test)?;
    preds
        .entries()
        .iter()
        .map(|entry| {
            let example = test.example(&entry.example_id).expect("coverage checked");
            Ok(sign_prediction(
                &hash_example(example)?,
                &hash_score(entry.score)?,
                keys,
            ))
        })
        .collect()
}

/// Signature manifest records for a signed prediction set, in entry order.
pub fn signature_records(
    test: &StressTest,
    preds: &PredictionSet,
    sigs: &[Signature],
) -> Result<Vec<SignatureRecord>> {
    preds.check_coverage(test)?;
    if sigs.len() != preds.entries().len() {
        return Err(Error::InvalidSignature(None));
    }
    preds
        .entries()
        .iter()
        .zip(sigs)
        .map(|(entry, sig)| {
            let example = test.example(&entry.example_id).expect("coverage checked");
            Ok(SignatureRecord {
                example_hash: hash_example(example)?,
                score_hash: hash_score(entry.score)?,
                signature: sig.bytes,
                public_key: sig.signer,
            })
        })
        .collect()
}

/// The 64-byte message a curator signs for a stress test.
pub fn stress_test_message(test: &StressTest) -> Result<[u8; 64]> {
    let salt = test.manifest().dataset_salt.ok_or_else(|| {
        Error::SchemaViolation(format!("stress test {:?} has no dataset_salt", test.id()))
    })?;
    let data = hash_dataset(test.examples().examples(), &salt)?;
    let manifest = sha256(&test.manifest().signing_bytes()?);
    Ok(prediction_message(&data, &manifest))
}

pub fn sign_stress_test(test: &StressTest, curator_keys: &KeyPair) -> Result<Signature> {
    Ok(curator_keys.sign(&stress_test_message(test)?))
}

/// Salts the test (fresh salt unless one is set) and attaches the
/// curator signature.
pub fn sign_and_attach(test: StressTest, curator_keys: &KeyPair) -> Result<StressTest> {
    let test = if test.manifest().dataset_salt.is_some() {
        test
    } else {
        test.with_dataset_salt(Salt::generate())
    };
    let sig = sign_stress_test(&test, curator_keys)?;
    Ok(test.with_curator_signature(sig))
}

/// Checks the embedded curator signature against its embedded signer key.
/// Unsigned tests do not verify.
pub fn verify_stress_test(test: &StressTest) -> bool {
    let Some(sig) = test.curator_signature() else {
        return false;
    };
    match stress_test_message(test) {
        Ok(msg) => verify_message(&sig.bytes, &msg, &sig.signer),
        Err(_) => false,
    }
}

/// One line of a signature manifest file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureRecord {
    pub example_hash: Digest,
    pub score_hash: Digest,
    pub signature: SignatureBytes,
    pub public_key: PublicKey,
}

impl SignatureRecord {
    pub fn verify(&self) -> bool {
        verify_message(
            &self.signature,
            &prediction_message(&self.example_hash, &self.score_hash),
            &self.public_key,
        )
    }

    pub fn verify_with(&self, public_key: &PublicKey) -> bool {
        self.public_key == *public_key && self.verify()
    }
}

/// JSON Lines manifest: one canonical record per line, `\n` terminated.
pub fn manifest_to_jsonl(records: &[SignatureRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&canonical::to_canonical_string(r).expect("records are plain hex strings"));
        out.push('\n');
    }
    out
}

/// Parses a manifest line by line; a malformed line yields an error in its
/// slot rather than aborting the whole file.
pub fn parse_manifest(text: &str) -> Vec<Result<SignatureRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Decode(e.to_string())))
        .collect()
}

/// Content address of a manifest: SHA-256 of its JSON Lines bytes.
pub fn manifest_digest(records: &[SignatureRecord]) -> Digest {
    sha256(manifest_to_jsonl(records).as_bytes())
}

/// The accountability anchor of one model version.
///
/// The salts are the provider's secrets: `model_hash` together with
/// `key_salt` determines the private key, so published snapshots carry the
/// hashes and public key only (see [`ModelSnapshot::redacted`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSnapshot {
    pub model_id: String,
    /// Ladder feedback is tracked per lineage; defaults to `model_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lineage: Option<String>,
    pub model_hash: Digest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_salt: Option<Salt>,
    pub training_data_hash: Digest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_salt: Option<Salt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_salt: Option<Salt>,
    pub public_key: PublicKey,
}

impl ModelSnapshot {
    /// Hashes weights and training data under fresh salts and derives the
    /// model key pair.
    pub fn create(
        model_id: impl Into<String>,
        weights: &[u8],
        training: &[Example],
    ) -> Result<(Self, KeyPair)> {
        let (model_salt, training_salt, key_salt) =
            (Salt::generate(), Salt::generate(), Salt::generate());
        let model_hash = hash_model(weights, &model_salt)?;
        let training_data_hash = hash_dataset(training, &training_salt)?;
        let keys = derive_keys(&model_hash, &key_salt);
        let snapshot = ModelSnapshot {
            model_id: model_id.into(),
            lineage: None,
            model_hash,
            model_salt: Some(model_salt),
            training_data_hash,
            training_salt: Some(training_salt),
            key_salt: Some(key_salt),
            public_key: keys.public_key(),
        };
        Ok((snapshot, keys))
    }

    pub fn lineage(&self) -> &str {
        self.lineage.as_deref().unwrap_or(&self.model_id)
    }

    /// Copy without any salt.
    pub fn redacted(&self) -> Self {
        ModelSnapshot {
            model_salt: None,
            training_salt: None,
            key_salt: None,
            ..self.clone()
        }
    }

    /// Auditor check: re-derives the key pair from `model_hash` and the key
    /// salt. `None` when the salt is withheld.
    pub fn verify_derivation(&self) -> Option<bool> {
        self.key_salt
            .map(|salt| derive_keys(&self.model_hash, &salt).public_key() == self.public_key)
    }
}
