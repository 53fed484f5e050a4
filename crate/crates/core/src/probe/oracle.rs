//! Answer sources: the live HTTP endpoint and the seeded mock.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::binary::BinaryFeatureMatrix;
use crate::dataset::{ConceptId, Domain, FeatureId};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle unreachable after {attempts} attempts: {message}")]
    Unreachable { attempts: u32, message: String },
    #[error("oracle rejected the request with status {status}: {message}")]
    Rejected { status: u16, message: String },
    #[error("oracle response is malformed: {message}")]
    BadResponse { message: String },
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("mock truth matrix has no entry for concept '{concept}', feature '{feature}'")]
    UnknownTruthCell { concept: String, feature: String },
}

/// Everything an answer source needs to answer one probe.
#[derive(Debug)]
pub struct ProbeRequest<'a> {
    pub concept: &'a str,
    pub feature: &'a str,
    pub feature_domain: Domain,
    pub prompt: &'a str,
}

/// A yes/no completion source. Implementations must be callable from
/// multiple driver threads at once.
pub trait AnswerSource: Sync {
    /// Returns the raw generation for a probe. Transient transport
    /// problems are retried internally; an error here is final.
    fn complete(&self, request: &ProbeRequest<'_>) -> Result<String, OracleError>;
}

/// Bounded exponential backoff for transport failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_backoff: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        self.base_backoff * 2u32.saturating_pow(attempt)
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_new_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Client for a text-completion endpoint speaking the single-call JSON
/// protocol: request `{"prompt": ..., "max_new_tokens": ...}`, response
/// `{"text": ...}`. Optional bearer authentication.
pub struct HttpOracle {
    endpoint: String,
    token: Option<String>,
    max_new_tokens: u32,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpOracle {
    pub fn new(endpoint: String, token: Option<String>) -> Self {
        HttpOracle {
            endpoint,
            token,
            max_new_tokens: 5,
            retry: RetryPolicy::default(),
            client: reqwest::blocking::Client::new(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_new_tokens(mut self, max_new_tokens: u32) -> Self {
        self.max_new_tokens = max_new_tokens;
        self
    }

    fn try_once(&self, prompt: &str) -> Result<Result<String, OracleError>, String> {
        // outer Err = transient (retry), inner Err = final
        let body = CompletionRequest {
            prompt,
            max_new_tokens: self.max_new_tokens,
        };
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(format!("server error {status}"));
        }
        if !status.is_success() {
            return Ok(Err(OracleError::Rejected {
                status: status.as_u16(),
                message: resp.text().unwrap_or_default(),
            }));
        }
        match resp.json::<CompletionResponse>() {
            Ok(parsed) => Ok(Ok(parsed.text)),
            Err(e) => Ok(Err(OracleError::BadResponse {
                message: e.to_string(),
            })),
        }
    }
}

impl AnswerSource for HttpOracle {
    fn complete(&self, request: &ProbeRequest<'_>) -> Result<String, OracleError> {
        let mut last_transport = String::new();
        for attempt in 0..=self.retry.max_retries {
            match self.try_once(request.prompt) {
                Ok(outcome) => return outcome,
                Err(transient) => {
                    last_transport = transient;
                    if attempt < self.retry.max_retries {
                        log::debug!(
                            "oracle attempt {} failed ({last_transport}); backing off",
                            attempt + 1
                        );
                        std::thread::sleep(self.retry.backoff(attempt));
                    }
                }
            }
        }
        Err(OracleError::Unreachable {
            attempts: self.retry.max_retries + 1,
            message: last_transport,
        })
    }
}

/// Seeded test double. Answers "True" for a truth-1 cell with probability
/// 1 - p_miss and for a truth-0 cell with probability p_fa, deterministic
/// per (seed, concept, feature) so results do not depend on driver
/// scheduling.
pub struct MockOracle {
    truth: BinaryFeatureMatrix,
    concept_rows: HashMap<String, usize>,
    feature_cols: HashMap<(String, Domain), usize>,
    p_miss: f64,
    p_fa: f64,
    seed: u64,
}

impl MockOracle {
    pub fn new(
        truth: BinaryFeatureMatrix,
        p_miss: f64,
        p_fa: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        for value in [p_miss, p_fa] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(OracleError::InvalidProbability { value });
            }
        }
        let concept_rows = truth
            .concepts()
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), i))
            .collect();
        let feature_cols = truth
            .features()
            .iter()
            .enumerate()
            .map(|(i, f)| ((f.name.clone(), f.source_domain), i))
            .collect();
        Ok(MockOracle {
            truth,
            concept_rows,
            feature_cols,
            p_miss,
            p_fa,
            seed,
        })
    }

    /// Uniform draw in [0, 1) from the probe identity. FNV-1a over the
    /// names feeds a splitmix64 finisher; stable across runs and threads.
    fn unit_draw(&self, concept: &str, feature: &str, domain: Domain) -> f64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(concept.as_bytes());
        eat(&[0x1f]);
        eat(feature.as_bytes());
        eat(&[0x1f]);
        eat(domain.as_str().as_bytes());
        let mixed = splitmix64(h ^ self.seed);
        (mixed >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl AnswerSource for MockOracle {
    fn complete(&self, request: &ProbeRequest<'_>) -> Result<String, OracleError> {
        let row = self.concept_rows.get(request.concept).copied().ok_or_else(|| {
            OracleError::UnknownTruthCell {
                concept: request.concept.to_string(),
                feature: request.feature.to_string(),
            }
        })?;
        let col = self
            .feature_cols
            .get(&(request.feature.to_string(), request.feature_domain))
            .copied()
            .ok_or_else(|| OracleError::UnknownTruthCell {
                concept: request.concept.to_string(),
                feature: request.feature.to_string(),
            })?;
        let truth = self.truth.get(ConceptId(row), FeatureId(col)) == 1;
        let u = self.unit_draw(request.concept, request.feature, request.feature_domain);
        let yes = if truth {
            u < 1.0 - self.p_miss
        } else {
            u < self.p_fa
        };
        Ok(if yes { "True".to_string() } else { "False".to_string() })
    }
}
