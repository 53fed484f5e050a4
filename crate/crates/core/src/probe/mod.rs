//! Probe planning and the yes/no oracle driver.
//!
//! A probe is one (concept, feature) question. Plans enumerate probes in
//! deterministic concept-major order; the driver answers them through a
//! persistent cache and an [`AnswerSource`] (a live HTTP endpoint or the
//! seeded mock) and assembles the machine-verified matrix.

mod answer;
mod cache;
mod oracle;
mod run;
mod template;

pub use answer::{parse_answer, OracleAnswer, ParsedAnswer};
pub use cache::{cache_key, AnswerCache, CacheEntry, CacheError};
pub use oracle::{AnswerSource, HttpOracle, MockOracle, OracleError, ProbeRequest, RetryPolicy};
pub use run::{run_verification, UnparseablePolicy, VerificationRun, VerifyError, VerifyOptions};
pub use template::{render_prompt, PromptTemplate, TemplateError, DEFAULT_TEMPLATE_TEXT};

use crate::dataset::{ConceptId, FeatureId, NormDataset};

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("dataset is empty: {what}")]
    EmptyDataset { what: &'static str },
    #[error("probe references unknown {what} index {index}")]
    UnknownId { what: &'static str, index: usize },
}

/// Whether a probe pairs a concept with a feature from its own domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeTag {
    WithinDomain,
    CrossDomain,
}

/// Which probes a plan includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanScope {
    Within,
    Cross,
    #[default]
    All,
}

impl PlanScope {
    pub fn parse(s: &str) -> Option<PlanScope> {
        match s.trim().to_ascii_lowercase().as_str() {
            "within" => Some(PlanScope::Within),
            "cross" => Some(PlanScope::Cross),
            "all" => Some(PlanScope::All),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlanScope::Within => "within",
            PlanScope::Cross => "cross",
            PlanScope::All => "all",
        }
    }
}

/// One verification question: does `concept` have `feature`?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub concept: ConceptId,
    pub feature: FeatureId,
    pub scope_tag: ScopeTag,
}

/// Enumerates probes concept-major in dataset order, filtered by scope.
/// The Within and Cross plans partition the All plan exactly.
pub fn build_probe_plan(dataset: &NormDataset, scope: PlanScope) -> Result<Vec<Probe>, ProbeError> {
    if dataset.n_concepts() == 0 {
        return Err(ProbeError::EmptyDataset { what: "no concepts" });
    }
    if dataset.n_features() == 0 {
        return Err(ProbeError::EmptyDataset { what: "no features" });
    }
    let mut plan = Vec::new();
    for c in 0..dataset.n_concepts() {
        for f in 0..dataset.n_features() {
            let (c, f) = (ConceptId(c), FeatureId(f));
            let tag = if dataset.is_cross_domain(c, f) {
                ScopeTag::CrossDomain
            } else {
                ScopeTag::WithinDomain
            };
            let keep = match scope {
                PlanScope::All => true,
                PlanScope::Within => tag == ScopeTag::WithinDomain,
                PlanScope::Cross => tag == ScopeTag::CrossDomain,
            };
            if keep {
                plan.push(Probe {
                    concept: c,
                    feature: f,
                    scope_tag: tag,
                });
            }
        }
    }
    Ok(plan)
}
