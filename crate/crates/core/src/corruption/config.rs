use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::OpKind;

/// Sampling parameters for sentence corruption.
///
/// Serialized as JSON with exactly these field names; unknown keys are
/// rejected and missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptionConfig {
    /// Probability of leaving a sentence untouched.
    pub p_uncorrupted: f64,
    pub op_weights: OpWeights,
    pub ops_per_sentence: OpsPerSentence,
    /// Upper bound on tokens removed by one `drop_token_span`.
    pub max_token_span: usize,
    /// Upper bound on characters removed or inserted by one character step.
    pub max_char_span: usize,
    pub seed: u64,
    /// Sentences longer than this many bytes are rejected.
    pub max_sentence_bytes: usize,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            p_uncorrupted: 0.02,
            op_weights: OpWeights::default(),
            ops_per_sentence: OpsPerSentence::default(),
            max_token_span: 3,
            max_char_span: 4,
            seed: 0,
            max_sentence_bytes: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpWeights {
    pub drop_token_span: f64,
    pub swap_tokens: f64,
    pub drop_char_span: f64,
    pub swap_chars: f64,
    pub insert_chars: f64,
    pub lowercase_word: f64,
    pub uppercase_first: f64,
}

impl Default for OpWeights {
    fn default() -> Self {
        Self {
            drop_token_span: 1.0,
            swap_tokens: 1.0,
            drop_char_span: 1.0,
            swap_chars: 1.0,
            insert_chars: 1.0,
            lowercase_word: 1.0,
            uppercase_first: 1.0,
        }
    }
}

impl OpWeights {
    pub fn get(&self, kind: OpKind) -> f64 {
        match kind {
            OpKind::DropTokenSpan => self.drop_token_span,
            OpKind::SwapTokens => self.swap_tokens,
            OpKind::DropCharSpan => self.drop_char_span,
            OpKind::SwapChars => self.swap_chars,
            OpKind::InsertChars => self.insert_chars,
            OpKind::LowercaseWord => self.lowercase_word,
            OpKind::UppercaseFirst => self.uppercase_first,
        }
    }
}

/// Number of steps per corrupted sentence: geometric on `{1, 2, ...}` with
/// the given mean, truncated at `cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpsPerSentence {
    pub mean: f64,
    pub cap: usize,
}

impl Default for OpsPerSentence {
    fn default() -> Self {
        Self { mean: 2.0, cap: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("p_uncorrupted must be in [0, 1], got {0}")]
    PUncorrupted(f64),
    #[error("op weight {name} must be finite and >= 0, got {value}")]
    NegativeWeight { name: &'static str, value: f64 },
    #[error("at least one op weight must be > 0")]
    AllWeightsZero,
    #[error("ops_per_sentence.mean must be finite and >= 1, got {0}")]
    Mean(f64),
    #[error("{0} must be >= 1")]
    Cap(&'static str),
    #[error("invalid corruption config: {0}")]
    Json(String),
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_uncorrupted) {
            return Err(ConfigError::PUncorrupted(self.p_uncorrupted));
        }
        let mut any_positive = false;
        for kind in OpKind::ALL {
            let value = self.op_weights.get(kind);
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::NegativeWeight { name: kind.name(), value });
            }
            any_positive |= value > 0.0;
        }
        if !any_positive {
            return Err(ConfigError::AllWeightsZero);
        }
        let mean = self.ops_per_sentence.mean;
        if !mean.is_finite() || mean < 1.0 {
            return Err(ConfigError::Mean(mean));
        }
        for (name, value) in [
            ("ops_per_sentence.cap", self.ops_per_sentence.cap),
            ("max_token_span", self.max_token_span),
            ("max_char_span", self.max_char_span),
            ("max_sentence_bytes", self.max_sentence_bytes),
        ] {
            if value < 1 {
                return Err(ConfigError::Cap(name));
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON config document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
