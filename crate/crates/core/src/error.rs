use thiserror::Error;

use crate::types::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit reports. `code()` gives the stable snake_case
/// identifier used in JSON error bodies (CLI stderr and HTTP responses).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid example: {0}")]
    InvalidExample(String),
    #[error("non-finite numeric value in {0}")]
    NonFiniteValue(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid metric spec: {0}")]
    InvalidMetricSpec(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("outcomes span several models: {0:?}")]
    MixedModels(Vec<String>),

    #[error("sample is empty")]
    EmptySample,
    #[error("sample columns have different lengths ({0})")]
    LengthMismatch(String),
    #[error("labels required but missing for: {0:?}")]
    MissingLabels(Vec<String>),
    #[error("gap metric needs at least two groups, found {0}")]
    SingleGroup(usize),
    #[error("insufficient support: {0}")]
    InsufficientSupport(Support),

    #[error("stress test {test_id} expired at {valid_until}")]
    Expired {
        test_id: String,
        valid_until: String,
    },
    #[error("predictions do not cover the stress test (missing {missing:?}, extra {extra:?})")]
    CoverageMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("ladder privacy requires a ladder state")]
    MissingLadderState,
    #[error("ladder step must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error("dataset is empty")]
    EmptyDataset,
    #[error("input is empty")]
    EmptyInput,
    #[error("malformed encoding: {0}")]
    Decode(String),
    #[error("invalid signature{}", .0.as_ref().map(|e| format!(" for entry {e}")).unwrap_or_default())]
    InvalidSignature(Option<String>),

    #[error("model id {0} already registered with different content")]
    DuplicateModelId(String),
    #[error("stress test id {0} already registered with different content")]
    DuplicateStressTestId(String),
    #[error("unknown model {0}")]
    UnknownModel(String),
    #[error("unknown stress test {0}")]
    UnknownTest(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training set has no labelled examples")]
    NoLabels,
    #[error("invalid number of rounds: {0}")]
    InvalidRounds(String),

    #[error("store error: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which group/label/bin lacked enough examples.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    GroupLabel { group: String, label: Label },
    NoQualifyingBin { min_bin_support: usize },
}

impl std::fmt::Display for Support {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Support::GroupLabel { group, label } => {
                write!(
                    f,
                    "group {group:?} has no examples with label {}",
                    label.as_i64()
                )
            }
            Support::NoQualifyingBin { min_bin_support } => write!(
                f,
                "no score bin holds two groups with at least {min_bin_support} examples each"
            ),
        }
    }
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidExample(_) => "invalid_example",
            Error::NonFiniteValue(_) => "non_finite_value",
            Error::OutOfRange(_) => "out_of_range",
            Error::InvalidMetricSpec(_) => "invalid_metric_spec",
            Error::SchemaViolation(_) => "schema_violation",
            Error::MixedModels(_) => "mixed_models",
            Error::EmptySample => "empty_sample",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::MissingLabels(_) => "missing_labels",
            Error::SingleGroup(_) => "single_group",
            Error::InsufficientSupport(_) => "insufficient_support",
            Error::Expired { .. } => "expired",
            Error::CoverageMismatch { .. } => "coverage_mismatch",
            Error::MissingLadderState => "missing_ladder_state",
            Error::NonPositiveStep(_) => "non_positive_step",
            Error::EmptyDataset => "empty_dataset",
            Error::EmptyInput => "empty_input",
            Error::Decode(_) => "decode_error",
            Error::InvalidSignature(_) => "invalid_signature",
            Error::DuplicateModelId(_) => "duplicate_model_id",
            Error::DuplicateStressTestId(_) => "duplicate_stress_test_id",
            Error::UnknownModel(_) => "unknown_model",
            Error::UnknownTest(_) => "unknown_test",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NoLabels => "no_labels",
            Error::InvalidRounds(_) => "invalid_rounds",
            Error::Store(_) => "store_error",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }

    /// `{code, message}` body shared by the CLI and the HTTP API.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "code": self.code(), "message": self.to_string() })
    }
}
