//! Domain types shared by every module: examples, datasets, metric specs,
//! stress tests, prediction sets, and outcomes.
//!
//! All of these are immutable value objects once constructed; the
//! validating constructors are the only way to build the ones carrying
//! invariants (`Dataset`, `MetricSpec`, `StressTest`, `PredictionSet`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::canonical;
use crate::crypto::{Salt, Signature};
use crate::error::{Error, Result};

/// A feature value: a number, a free-text string, or a categorical level.
///
/// Serialised as a JSON number, a JSON string, or `{"category": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FeatureRepr", into = "FeatureRepr")]
pub enum FeatureValue {
    Number(f64),
    Text(String),
    Category(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FeatureRepr {
    Number(f64),
    Text(String),
    Category { category: String },
}

impl From<FeatureRepr> for FeatureValue {
    fn from(r: FeatureRepr) -> Self {
        match r {
            FeatureRepr::Number(n) => FeatureValue::Number(n),
            FeatureRepr::Text(s) => FeatureValue::Text(s),
            FeatureRepr::Category { category } => FeatureValue::Category(category),
        }
    }
}

impl From<FeatureValue> for FeatureRepr {
    fn from(v: FeatureValue) -> Self {
        match v {
            FeatureValue::Number(n) => FeatureRepr::Number(n),
            FeatureValue::Text(s) => FeatureRepr::Text(s),
            FeatureValue::Category(category) => FeatureRepr::Category { category },
        }
    }
}

impl FeatureValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            FeatureValue::Number(n) => Some(*n),
            _ => None,
        }
    }
}

/// Binary label, serialised as `-1` / `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_i64(self) -> i64 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_i64() as f64
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_decision(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(format!("label must be -1 or 1, got {other}")),
        }
    }
}

impl From<Label> for i64 {
    fn from(l: Label) -> i64 {
        l.as_i64()
    }
}

pub type FeatureMap = BTreeMap<String, FeatureValue>;

/// One record `(x, a, y)`, plus optional privileged fields and the RNG
/// state of a stochastic prediction pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: String,
    #[serde(default, deserialize_with = "unique_feature_map")]
    pub features: FeatureMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitive_attr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "opt_unique_feature_map"
    )]
    pub privileged: Option<FeatureMap>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::hexser::opt_bytes"
    )]
    pub rng_state: Option<Vec<u8>>,
}

impl Example {
    pub fn new(id: impl Into<String>) -> Self {
        Example {
            id: id.into(),
            features: BTreeMap::new(),
            sensitive_attr: None,
            label: None,
            privileged: None,
            rng_state: None,
        }
    }

    pub fn with_feature(mut self, name: impl Into<String>, value: FeatureValue) -> Self {
        self.features.insert(name.into(), value);
        self
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_sensitive_attr(mut self, group: impl Into<String>) -> Self {
        self.sensitive_attr = Some(group.into());
        self
    }

    pub fn with_privileged(mut self, name: impl Into<String>, value: FeatureValue) -> Self {
        self.privileged
            .get_or_insert_with(BTreeMap::new)
            .insert(name.into(), value);
        self
    }

    pub fn with_rng_state(mut self, state: Vec<u8>) -> Self {
        self.rng_state = Some(state);
        self
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let maps = std::iter::once(("features", &self.features))
            .chain(self.privileged.as_ref().map(|p| ("privileged", p)));
        for (section, map) in maps {
            for (name, value) in map {
                if let FeatureValue::Number(n) = value {
                    if !n.is_finite() {
                        return Err(Error::NonFiniteValue(format!(
                            "example {:?} {section}.{name}",
                            self.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks the example invariants: non-empty id and feature names,
    /// finite numbers.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidExample("empty id".into()));
        }
        let names = self
            .features
            .keys()
            .chain(self.privileged.iter().flat_map(|p| p.keys()));
        for name in names {
            if name.is_empty() {
                return Err(Error::InvalidExample(format!(
                    "example {:?} has an empty feature name",
                    self.id
                )));
            }
        }
        self.check_finite()
    }
}

fn unique_feature_map<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<FeatureMap, D::Error> {
    struct UniqueMap;

    impl<'de> Visitor<'de> for UniqueMap {
        type Value = FeatureMap;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map of feature names to values")
        }

        fn visit_map<A: MapAccess<'de>>(
            self,
            mut access: A,
        ) -> std::result::Result<FeatureMap, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((key, value)) = access.next_entry::<String, FeatureValue>()? {
                if out.contains_key(&key) {
                    return Err(serde::de::Error::custom(format!(
                        "duplicate feature name {key:?}"
                    )));
                }
                out.insert(key, value);
            }
            Ok(out)
        }
    }

    d.deserialize_map(UniqueMap)
}

fn opt_unique_feature_map<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<FeatureMap>, D::Error> {
    unique_feature_map(d).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceKind {
    Training,
    InDomainTest,
    OutDomainTest,
    StressData,
}

/// Where a dataset's examples were drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProvenanceKind,
    #[serde(default)]
    pub description: String,
}

impl Provenance {
    pub fn new(kind: ProvenanceKind, description: impl Into<String>) -> Self {
        Provenance {
            kind,
            description: description.into(),
        }
    }
}

/// A named collection of examples with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    name: String,
    provenance: Provenance,
    examples: Vec<Example>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        provenance: Provenance,
        examples: Vec<Example>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(examples.len());
        for (i, ex) in examples.iter().enumerate() {
            ex.validate()?;
            if index.insert(ex.id.clone(), i).is_some() {
                return Err(Error::InvalidExample(format!(
                    "duplicate example id {:?}",
                    ex.id
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            provenance,
            examples,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Example> {
        self.index.get(id).map(|&i| &self.examples[i])
    }

    /// JSON Lines rendering: one canonical example per line, `\n` terminated.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for ex in &self.examples {
            out.push_str(std::str::from_utf8(&canonical::canonical_encode(ex)?).expect("utf-8"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(name: impl Into<String>, provenance: Provenance, text: &str) -> Result<Self> {
        let examples = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<Example>(l)
                    .map_err(|e| Error::Decode(format!("line {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(name, provenance, examples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    IndependenceGap,
    SeparationGap,
    SufficiencyGap,
}

impl MetricKind {
    pub fn default_direction(self) -> Direction {
        match self {
            MetricKind::Accuracy => Direction::AtLeast,
            _ => Direction::AtMost,
        }
    }

    pub fn needs_groups(self) -> bool {
        self != MetricKind::Accuracy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtLeast,
    AtMost,
}

impl Direction {
    pub fn passes(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::AtLeast => value >= threshold,
            Direction::AtMost => value <= threshold,
        }
    }
}

pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.5;
pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_MIN_BIN_SUPPORT: usize = 5;

/// What a stress test measures and the value it must reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricSpecRaw")]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub threshold: f64,
    pub direction: Direction,
    pub decision_threshold: f64,
    pub bins: usize,
    pub min_bin_support: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricSpecRaw {
    kind: MetricKind,
    threshold: f64,
    direction: Option<Direction>,
    decision_threshold: Option<f64>,
    bins: Option<usize>,
    min_bin_support: Option<usize>,
}

impl TryFrom<MetricSpecRaw> for MetricSpec {
    type Error = Error;

    fn try_from(raw: MetricSpecRaw) -> Result<Self> {
        let spec = MetricSpec {
            kind: raw.kind,
            threshold: raw.threshold,
            direction: raw.direction.unwrap_or(raw.kind.default_direction()),
            decision_threshold: raw.decision_threshold.unwrap_or(DEFAULT_DECISION_THRESHOLD),
            bins: raw.bins.unwrap_or(DEFAULT_BINS),
            min_bin_support: raw.min_bin_support.unwrap_or(DEFAULT_MIN_BIN_SUPPORT),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl MetricSpec {
    /// Spec with the kind's default direction and default thresholds.
    pub fn new(kind: MetricKind, threshold: f64) -> Result<Self> {
        let spec = MetricSpec {
            kind,
            threshold,
            direction: kind.default_direction(),
            decision_threshold: DEFAULT_DECISION_THRESHOLD,
            bins: DEFAULT_BINS,
            min_bin_support: DEFAULT_MIN_BIN_SUPPORT,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_decision_threshold(mut self, t: f64) -> Result<Self> {
        self.decision_threshold = t;
        self.validate()?;
        Ok(self)
    }

    pub fn with_bins(mut self, bins: usize, min_bin_support: usize) -> Result<Self> {
        self.bins = bins;
        self.min_bin_support = min_bin_support;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !unit(self.threshold) {
            return Err(Error::InvalidMetricSpec(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if !unit(self.decision_threshold) {
            return Err(Error::InvalidMetricSpec(format!(
                "decision_threshold {} outside [0, 1]",
                self.decision_threshold
            )));
        }
        if self.bins == 0 || (self.kind == MetricKind::SufficiencyGap && self.bins < 2) {
            return Err(Error::InvalidMetricSpec(format!(
                "bins must be >= 2, got {}",
                self.bins
            )));
        }
        if self.min_bin_support == 0 {
            return Err(Error::InvalidMetricSpec(
                "min_bin_support must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn passes(&self, value: f64) -> bool {
        self.direction.passes(value, self.threshold)
    }
}

pub const DEFAULT_LADDER_STEP: f64 = 0.01;

/// How much of an outcome is released to non-curators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyLevel {
    Full,
    MetricOnly,
    PassFail,
    Ladder { step: f64 },
}

impl fmt::Display for PrivacyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyLevel::Full => f.write_str("full"),
            PrivacyLevel::MetricOnly => f.write_str("metric-only"),
            PrivacyLevel::PassFail => f.write_str("pass-fail"),
            PrivacyLevel::Ladder { step } => write!(f, "ladder:{step}"),
        }
    }
}

impl FromStr for PrivacyLevel {
    type Err = Error;

    /// Accepts `full`, `metric-only`, `pass-fail`, `ladder` and `ladder:<step>`
    /// (underscores work in place of dashes).
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "full" => Ok(PrivacyLevel::Full),
            "metric-only" => Ok(PrivacyLevel::MetricOnly),
            "pass-fail" => Ok(PrivacyLevel::PassFail),
            "ladder" => Ok(PrivacyLevel::Ladder {
                step: DEFAULT_LADDER_STEP,
            }),
            other => match other.strip_prefix("ladder:") {
                Some(step) => {
                    let step: f64 = step
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad ladder step {step:?}")))?;
                    if !(step.is_finite() && step > 0.0) {
                        return Err(Error::NonPositiveStep(step));
                    }
                    Ok(PrivacyLevel::Ladder { step })
                }
                None => Err(Error::InvalidConfig(format!("unknown privacy level {s:?}"))),
            },
        }
    }
}

/// Stress test metadata: the `<name>.stress.json` sidecar of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressManifest {
    pub id: String,
    pub curator: String,
    pub metric: MetricSpec,
    pub privacy: PrivacyLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_until: Option<DateTime<Utc>>,
    #[serde(default)]
    pub datasheet: String,
    /// Salt of the dataset hash covered by the curator signature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_salt: Option<Salt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curator_signature: Option<Signature>,
}

impl StressManifest {
    pub fn new(
        id: impl Into<String>,
        curator: impl Into<String>,
        metric: MetricSpec,
        privacy: PrivacyLevel,
    ) -> Self {
        StressManifest {
            id: id.into(),
            curator: curator.into(),
            metric,
            privacy,
            valid_until: None,
            datasheet: String::new(),
            dataset_salt: None,
            curator_signature: None,
        }
    }

    /// Canonical bytes of the manifest with the signature field removed;
    /// this is what the curator signature commits to.
    pub fn signing_bytes(&self) -> Result<Vec<u8>> {
        let mut unsigned = self.clone();
        unsigned.curator_signature = None;
        Ok(canonical::to_canonical_string(&unsigned)?.into_bytes())
    }
}

/// A curated set of examples with a metric, threshold and privacy level.
#[derive(Debug, Clone, PartialEq)]
pub struct StressTest {
    manifest: StressManifest,
    examples: Dataset,
}

impl StressTest {
    pub fn new(manifest: StressManifest, examples: Vec<Example>) -> Result<Self> {
        if manifest.id.is_empty() {
            return Err(Error::SchemaViolation("stress test id is empty".into()));
        }
        manifest.metric.validate()?;
        if let PrivacyLevel::Ladder { step } = manifest.privacy {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::NonPositiveStep(step));
            }
        }
        if examples.is_empty() {
            return Err(Error::SchemaViolation(format!(
                "stress test {:?} has no examples",
                manifest.id
            )));
        }
        if manifest.metric.kind.needs_groups() {
            if let Some(ex) = examples.iter().find(|e| e.sensitive_attr.is_none()) {
                return Err(Error::SchemaViolation(format!(
                    "gap metric test {:?}: example {:?} has no sensitive_attr",
                    manifest.id, ex.id
                )));
            }
        }
        let examples = Dataset::new(
            manifest.id.clone(),
            Provenance::new(
                ProvenanceKind::StressData,
                format!("stress test curated by {}", manifest.curator),
            ),
            examples,
        )?;
        Ok(StressTest { manifest, examples })
    }

    pub fn id(&self) -> &str {
        &self.manifest.id
    }

    pub fn curator(&self) -> &str {
        &self.manifest.curator
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.manifest.metric
    }

    pub fn privacy(&self) -> PrivacyLevel {
        self.manifest.privacy
    }

    pub fn valid_until(&self) -> Option<DateTime<Utc>> {
        self.manifest.valid_until
    }

    pub fn datasheet(&self) -> &str {
        &self.manifest.datasheet
    }

    pub fn curator_signature(&self) -> Option<&Signature> {
        self.manifest.curator_signature.as_ref()
    }

    pub fn manifest(&self) -> &StressManifest {
        &self.manifest
    }

    pub fn examples(&self) -> &Dataset {
        &self.examples
    }

    pub fn example(&self, id: &str) -> Option<&Example> {
        self.examples.get(id)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn is_expired(&self, now: DateTime<Utc>) -> bool {
        self.manifest.valid_until.is_some_and(|until| now > until)
    }

    pub fn with_curator_signature(mut self, sig: Signature) -> Self {
        self.manifest.curator_signature = Some(sig);
        self
    }

    pub fn with_dataset_salt(mut self, salt: Salt) -> Self {
        self.manifest.dataset_salt = Some(salt);
        self
    }

    pub fn with_valid_until(mut self, until: DateTime<Utc>) -> Self {
        self.manifest.valid_until = Some(until);
        self
    }

    /// Rebuilds the test with a different manifest, re-checking invariants.
    pub fn with_manifest(self, manifest: StressManifest) -> Result<Self> {
        StressTest::new(manifest, self.examples.examples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub example_id: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
}

impl PredictionEntry {
    pub fn new(example_id: impl Into<String>, score: f64) -> Self {
        PredictionEntry {
            example_id: example_id.into(),
            score,
            signature: None,
        }
    }
}

/// A provider's scores over one stress test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionSet {
    model_id: String,
    stress_test_id: String,
    entries: Vec<PredictionEntry>,
    submitted_at: DateTime<Utc>,
}

impl PredictionSet {
    pub fn new(
        model_id: impl Into<String>,
        stress_test_id: impl Into<String>,
        entries: Vec<PredictionEntry>,
        submitted_at: DateTime<Utc>,
    ) -> Result<Self> {
        for e in &entries {
            check_score(e.score)?;
        }
        Ok(PredictionSet {
            model_id: model_id.into(),
            stress_test_id: stress_test_id.into(),
            entries,
            submitted_at,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn stress_test_id(&self) -> &str {
        &self.stress_test_id
    }

    pub fn entries(&self) -> &[PredictionEntry] {
        &self.entries
    }

    pub fn submitted_at(&self) -> DateTime<Utc> {
        self.submitted_at
    }

    /// Requires the entry ids to be exactly the test's example ids, each once.
    pub fn check_coverage(&self, test: &StressTest) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut extra = Vec::new();
        for e in &self.entries {
            if test.example(&e.example_id).is_none() || !seen.insert(e.example_id.as_str()) {
                extra.push(e.example_id.clone());
            }
        }
        let missing: Vec<String> = test
            .examples()
            .examples()
            .iter()
            .filter(|ex| !seen.contains(ex.id.as_str()))
            .map(|ex| ex.id.clone())
            .collect();
        if missing.is_empty() && extra.is_empty() {
            Ok(())
        } else {
            Err(Error::CoverageMismatch { missing, extra })
        }
    }
}

pub(crate) fn check_score(score: f64) -> Result<()> {
    if !score.is_finite() {
        return Err(Error::NonFiniteValue(format!("score {score}")));
    }
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::OutOfRange(format!("score {score} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleResult {
    pub example_id: String,
    pub score: f64,
    pub correct: bool,
}

/// Result of evaluating one prediction set against one stress test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressOutcome {
    pub model_id: String,
    pub stress_test_id: String,
    pub metric_value: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_example: Option<Vec<ExampleResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub released_value: Option<f64>,
}

/// A model is fair with respect to a collection of stress tests iff it
/// passes every one of them. The empty collection is vacuously passed.
pub fn fair_wrt(outcomes: &[StressOutcome]) -> Result<bool> {
    let models: BTreeSet<&str> = outcomes.iter().map(|o| o.model_id.as_str()).collect();
    if models.len() > 1 {
        return Err(Error::MixedModels(
            models.into_iter().map(str::to_owned).collect(),
        ));
    }
    Ok(outcomes.iter().all(|o| o.passed))
}
