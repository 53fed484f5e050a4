//! The verification driver: answers a probe plan through the cache and an
//! answer source, then assembles the machine matrix.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::binary::{BinaryFeatureMatrix, Provenance};
use crate::dataset::{Domain, NormDataset};
use crate::probe::answer::{parse_answer, ParsedAnswer};
use crate::probe::cache::{cache_key, AnswerCache, CacheEntry, CacheError};
use crate::probe::oracle::{AnswerSource, OracleError, ProbeRequest};
use crate::probe::template::PromptTemplate;
use crate::probe::{Probe, ProbeError};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(
        "unparseable answer for concept '{concept}', feature '{feature}' \
         under fail-fast policy: {raw:?}"
    )]
    PolicyViolation {
        concept: String,
        feature: String,
        raw: String,
    },
    #[error("cache entry for key {key} vanished during assembly")]
    MissingAnswer { key: String },
}

/// What to do with generations that parse to neither yes nor no.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnparseablePolicy {
    /// Count and log the answer, leave the cell 0.
    #[default]
    ZeroAndLog,
    /// Abort the run on the first unparseable answer.
    FailFast,
}

impl UnparseablePolicy {
    pub fn parse(s: &str) -> Option<UnparseablePolicy> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zero-and-log" => Some(UnparseablePolicy::ZeroAndLog),
            "fail" | "fail-fast" => Some(UnparseablePolicy::FailFast),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Maximum in-flight oracle requests.
    pub concurrency: usize,
    pub policy: UnparseablePolicy,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            concurrency: 8,
            policy: UnparseablePolicy::ZeroAndLog,
        }
    }
}

/// Outcome of answering one plan: the machine matrix plus bookkeeping.
#[derive(Debug)]
pub struct VerificationRun {
    pub matrix: BinaryFeatureMatrix,
    pub plan_size: usize,
    pub yes: usize,
    pub no: usize,
    pub unparseable: usize,
    /// Probes actually sent to the oracle this run (deduplicated by key).
    pub oracle_calls: usize,
    /// Plan probes answered from the pre-existing cache.
    pub cache_hits: usize,
}

struct MissJob {
    key: String,
    concept: String,
    feature: String,
    feature_domain: Domain,
    prompt: String,
}

fn now_unix_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Answers every probe in the plan. Cached probes are never re-asked;
/// fresh answers are committed to the cache in completion order, so an
/// interrupted run resumes without duplicate oracle calls. The machine
/// cell is 1 exactly where the parsed answer is yes; probes outside the
/// plan stay 0.
pub fn run_verification(
    dataset: &NormDataset,
    template: &PromptTemplate,
    plan: &[Probe],
    oracle: &dyn AnswerSource,
    cache: &mut AnswerCache,
    options: VerifyOptions,
) -> Result<VerificationRun, VerifyError> {
    let template_hash = template.content_hash().to_string();

    // Deterministic key per plan probe. Distinct probes can share a key
    // when two features carry the same name in different domains; their
    // prompts are then byte-identical, so one oracle answer serves both.
    let keys: Vec<String> = plan
        .iter()
        .map(|p| {
            cache_key(
                &dataset.concept(p.concept).name,
                &dataset.feature(p.feature).name,
                &template_hash,
            )
        })
        .collect();

    let mut cache_hits = 0usize;
    let mut seen_misses: HashSet<&str> = HashSet::new();
    let mut jobs: Vec<MissJob> = Vec::new();
    for (probe, key) in plan.iter().zip(&keys) {
        if cache.contains(key) {
            cache_hits += 1;
            continue;
        }
        if !seen_misses.insert(key.as_str()) {
            continue;
        }
        let concept = dataset.concept(probe.concept);
        let feature = dataset.feature(probe.feature);
        jobs.push(MissJob {
            key: key.clone(),
            concept: concept.name.clone(),
            feature: feature.name.clone(),
            feature_domain: feature.source_domain,
            prompt: template.render(&feature.name, &concept.name),
        });
    }

    let oracle_calls = jobs.len();
    if !jobs.is_empty() {
        answer_misses(&jobs, &template_hash, oracle, cache, options.concurrency)?;
    }
    cache.flush()?;

    // Assembly is order-independent: walk the plan and read the cache.
    let mut cells = vec![0u8; dataset.n_cells()];
    let mut parsed_counts: HashMap<&str, ParsedAnswer> = HashMap::new();
    let (mut yes, mut no, mut unparseable) = (0usize, 0usize, 0usize);
    for (probe, key) in plan.iter().zip(&keys) {
        let parsed = match parsed_counts.get(key.as_str()) {
            Some(&p) => p,
            None => {
                let entry = cache
                    .get(key)
                    .ok_or_else(|| VerifyError::MissingAnswer { key: key.clone() })?;
                let p = parse_answer(&entry.raw_text);
                parsed_counts.insert(key.as_str(), p);
                p
            }
        };
        match parsed {
            ParsedAnswer::Yes => {
                yes += 1;
                cells[dataset.cell_index(probe.concept, probe.feature)] = 1;
            }
            ParsedAnswer::No => no += 1,
            ParsedAnswer::Unparseable => {
                let concept = &dataset.concept(probe.concept).name;
                let feature = &dataset.feature(probe.feature).name;
                if options.policy == UnparseablePolicy::FailFast {
                    let raw = cache.get(key).map(|e| e.raw_text.clone()).unwrap_or_default();
                    return Err(VerifyError::PolicyViolation {
                        concept: concept.clone(),
                        feature: feature.clone(),
                        raw,
                    });
                }
                log::warn!("unparseable answer for ({concept}, {feature}); cell left 0");
                unparseable += 1;
            }
        }
    }

    let matrix = BinaryFeatureMatrix::new(
        dataset.concepts().to_vec(),
        dataset.features().to_vec(),
        cells,
        Provenance::Machine,
    )
    .expect("assembled matrix has dataset shape");

    Ok(VerificationRun {
        matrix,
        plan_size: plan.len(),
        yes,
        no,
        unparseable,
        oracle_calls,
        cache_hits,
    })
}

/// Fans the miss jobs out over up to `concurrency` worker threads. The
/// cache sees appends only from this thread, in completion order.
fn answer_misses(
    jobs: &[MissJob],
    template_hash: &str,
    oracle: &dyn AnswerSource,
    cache: &mut AnswerCache,
    concurrency: usize,
) -> Result<(), VerifyError> {
    let workers = concurrency.max(1).min(jobs.len());
    let next_job = AtomicUsize::new(0);
    let cancelled = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<String, OracleError>)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next_job = &next_job;
            let cancelled = &cancelled;
            scope.spawn(move || loop {
                if cancelled.load(Ordering::Relaxed) {
                    break;
                }
                let i = next_job.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let result = oracle.complete(&ProbeRequest {
                    concept: &job.concept,
                    feature: &job.feature,
                    feature_domain: job.feature_domain,
                    prompt: &job.prompt,
                });
                if result.is_err() {
                    cancelled.store(true, Ordering::Relaxed);
                }
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut first_error: Option<VerifyError> = None;
        for (i, result) in rx {
            match result {
                Ok(raw_text) => {
                    let job = &jobs[i];
                    let parsed = parse_answer(&raw_text);
                    let entry = CacheEntry {
                        key: job.key.clone(),
                        concept: job.concept.clone(),
                        feature: job.feature.clone(),
                        template_hash: template_hash.to_string(),
                        raw_text,
                        parsed: parsed.as_str().to_string(),
                        timestamp: now_unix_secs(),
                    };
                    if let Err(e) = cache.append(entry) {
                        cancelled.store(true, Ordering::Relaxed);
                        first_error.get_or_insert(e.into());
                    }
                }
                Err(e) => {
                    first_error.get_or_insert(e.into());
                }
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    })
}
