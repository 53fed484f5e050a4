//! Triplet similarity judgments: generation, condition taxonomy, choice
//! prediction, and agreement scoring.
//!
//! A triplet pairs a target concept with two options. Each option relates
//! to the target as same-category (C), different-category-same-domain
//! (D), or other-domain (OD); the unordered pair of relations names the
//! condition.

use std::collections::HashMap;
use std::fmt;
use std::io;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ConceptId, Domain, NormDataset};
use crate::space::DistanceMatrix;

#[derive(Debug, thiserror::Error)]
pub enum TripletError {
    #[error("unknown concept '{name}'")]
    UnknownId { name: String },
    #[error("triplet repeats the word '{name}'")]
    DuplicateWord { name: String },
    #[error("dataset cannot produce condition {condition}: no eligible triplet exists")]
    InfeasibleCondition { condition: Condition },
    #[error("triplet {id} has no votes")]
    MissingVotes { id: u64 },
    #[error("votes reference unknown triplet id {id}")]
    VotesForUnknownTriplet { id: u64 },
    #[error("no triplets for condition {condition}")]
    EmptyCondition { condition: Condition },
    #[error("triplet {id} labeled {labeled} but classifies as {actual}")]
    ConditionMismatch {
        id: u64,
        labeled: Condition,
        actual: Condition,
    },
    #[error("triplet {id}: votes_a + votes_b must be positive")]
    ZeroVotes { id: u64 },
    #[error("votes file lists triplet {id} more than once")]
    DuplicateVotes { id: u64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad row {row}: {message}")]
    BadRow { row: u64, message: String },
}

/// Relation of one option to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Relation {
    SameCategory,
    SameDomainOtherCategory,
    OtherDomain,
}

/// The six triplet conditions, named by the unordered pair of option
/// relations: C = same category, D = different category in the same
/// domain, OD = other domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    CC,
    CD,
    COD,
    DD,
    DOD,
    ODOD,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::CC,
        Condition::CD,
        Condition::COD,
        Condition::DD,
        Condition::DOD,
        Condition::ODOD,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::CC => "CC",
            Condition::CD => "CD",
            Condition::COD => "COD",
            Condition::DD => "DD",
            Condition::DOD => "DOD",
            Condition::ODOD => "ODOD",
        }
    }

    pub fn parse(s: &str) -> Option<Condition> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CC" => Some(Condition::CC),
            "CD" => Some(Condition::CD),
            "COD" | "CO" => Some(Condition::COD),
            "DD" => Some(Condition::DD),
            "DOD" => Some(Condition::DOD),
            "ODOD" => Some(Condition::ODOD),
            _ => None,
        }
    }

    fn from_relations(a: Relation, b: Relation) -> Condition {
        use Relation::*;
        let pair = if a <= b { (a, b) } else { (b, a) };
        match pair {
            (SameCategory, SameCategory) => Condition::CC,
            (SameCategory, SameDomainOtherCategory) => Condition::CD,
            (SameCategory, OtherDomain) => Condition::COD,
            (SameDomainOtherCategory, SameDomainOtherCategory) => Condition::DD,
            (SameDomainOtherCategory, OtherDomain) => Condition::DOD,
            (OtherDomain, OtherDomain) => Condition::ODOD,
            _ => unreachable!("pair is sorted"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One triplet judgment item. Votes stay `None` until a votes file is
/// attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletRecord {
    pub id: u64,
    pub target: ConceptId,
    pub option_a: ConceptId,
    pub option_b: ConceptId,
    pub condition: Condition,
    pub votes: Option<(u32, u32)>,
}

fn relation(dataset: &NormDataset, target: ConceptId, option: ConceptId) -> Relation {
    let t = dataset.concept(target);
    let o = dataset.concept(option);
    if t.domain != o.domain {
        Relation::OtherDomain
    } else if t.category == o.category {
        Relation::SameCategory
    } else {
        Relation::SameDomainOtherCategory
    }
}

/// Classifies a (target, a, b) triple into its condition. Symmetric in
/// the two options; the three concepts must be pairwise distinct.
pub fn classify_condition(
    dataset: &NormDataset,
    target: ConceptId,
    a: ConceptId,
    b: ConceptId,
) -> Result<Condition, TripletError> {
    for id in [target, a, b] {
        if id.0 >= dataset.n_concepts() {
            return Err(TripletError::UnknownId {
                name: format!("#{}", id.0),
            });
        }
    }
    if target == a || target == b || a == b {
        let dup = if target == a || a == b { a } else { b };
        return Err(TripletError::DuplicateWord {
            name: dataset.concept(dup).name.clone(),
        });
    }
    Ok(Condition::from_relations(
        relation(dataset, target, a),
        relation(dataset, target, b),
    ))
}

/// Index lists the sampler draws from.
struct SamplingPools {
    /// concept ids per category name
    by_category: HashMap<String, Vec<usize>>,
    /// concept ids per domain
    by_domain: HashMap<Domain, Vec<usize>>,
}

impl SamplingPools {
    fn build(dataset: &NormDataset) -> Self {
        let mut by_category: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_domain: HashMap<Domain, Vec<usize>> = HashMap::new();
        for (i, c) in dataset.concepts().iter().enumerate() {
            by_category.entry(c.category.clone()).or_default().push(i);
            by_domain.entry(c.domain).or_default().push(i);
        }
        SamplingPools {
            by_category,
            by_domain,
        }
    }

    /// Number of unordered option pairs available for `condition` with
    /// this target.
    fn pair_count(&self, dataset: &NormDataset, target: usize, condition: Condition) -> u64 {
        let c = &dataset.concepts()[target];
        let n_cat = self.by_category[&c.category].len() as u64;
        let n_dom = self.by_domain[&c.domain].len() as u64;
        let n_other = dataset.n_concepts() as u64 - n_dom;
        let same_cat = n_cat - 1; // excluding the target
        let same_dom_other_cat = n_dom - n_cat;
        match condition {
            Condition::CC => same_cat * same_cat.saturating_sub(1) / 2,
            Condition::CD => same_cat * same_dom_other_cat,
            Condition::COD => same_cat * n_other,
            Condition::DD => same_dom_other_cat * same_dom_other_cat.saturating_sub(1) / 2,
            Condition::DOD => same_dom_other_cat * n_other,
            Condition::ODOD => n_other * n_other.saturating_sub(1) / 2,
        }
    }
}

fn pick_one(rng: &mut ChaCha8Rng, pool: &[usize], exclude: &[usize]) -> usize {
    loop {
        let &candidate = pool.choose(rng).expect("pool checked non-empty");
        if !exclude.contains(&candidate) {
            return candidate;
        }
    }
}

/// Samples `n_per_condition` triplets for each of the six conditions,
/// uniform over the eligible (target, option-pair) combinations, without
/// repeats inside a triplet. Deterministic for a fixed seed.
pub fn generate_triplets(
    dataset: &NormDataset,
    n_per_condition: usize,
    seed: u64,
) -> Result<Vec<TripletRecord>, TripletError> {
    let pools = SamplingPools::build(dataset);
    let n = dataset.n_concepts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(6 * n_per_condition);
    let mut next_id = 0u64;

    for condition in Condition::ALL {
        // weight each target by how many eligible pairs it anchors; a zero
        // total means the dataset cannot express the condition at all
        let weights: Vec<u64> = (0..n)
            .map(|t| pools.pair_count(dataset, t, condition))
            .collect();
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(TripletError::InfeasibleCondition { condition });
        }
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0u64;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }

        for _ in 0..n_per_condition {
            let ticket = rng.random_range(0..total);
            let target = cumulative.partition_point(|&c| c <= ticket);
            let t_concept = &dataset.concepts()[target];
            let cat_pool = &pools.by_category[&t_concept.category];
            let dom_pool = &pools.by_domain[&t_concept.domain];
            static EMPTY: Vec<usize> = Vec::new();
            let other_pool = pools
                .by_domain
                .get(&other_domain(t_concept.domain))
                .unwrap_or(&EMPTY);

            let same_cat = |rng: &mut ChaCha8Rng, exclude: &[usize]| {
                pick_one(rng, cat_pool, exclude)
            };
            let same_dom_other_cat = |rng: &mut ChaCha8Rng, exclude: &[usize]| loop {
                let c = pick_one(rng, dom_pool, exclude);
                if dataset.concepts()[c].category != t_concept.category {
                    return c;
                }
            };
            let other_dom =
                |rng: &mut ChaCha8Rng, exclude: &[usize]| pick_one(rng, other_pool, exclude);

            let (first, second) = match condition {
                Condition::CC => {
                    let x = same_cat(&mut rng, &[target]);
                    (x, same_cat(&mut rng, &[target, x]))
                }
                Condition::CD => {
                    let x = same_cat(&mut rng, &[target]);
                    (x, same_dom_other_cat(&mut rng, &[target, x]))
                }
                Condition::COD => {
                    let x = same_cat(&mut rng, &[target]);
                    (x, other_dom(&mut rng, &[target, x]))
                }
                Condition::DD => {
                    let x = same_dom_other_cat(&mut rng, &[target]);
                    (x, same_dom_other_cat(&mut rng, &[target, x]))
                }
                Condition::DOD => {
                    let x = same_dom_other_cat(&mut rng, &[target]);
                    (x, other_dom(&mut rng, &[target, x]))
                }
                Condition::ODOD => {
                    let x = other_dom(&mut rng, &[target]);
                    (x, other_dom(&mut rng, &[target, x]))
                }
            };
            // coin flip so the a/b slots carry no relation information
            let (option_a, option_b) = if rng.random_bool(0.5) {
                (first, second)
            } else {
                (second, first)
            };
            out.push(TripletRecord {
                id: next_id,
                target: ConceptId(target),
                option_a: ConceptId(option_a),
                option_b: ConceptId(option_b),
                condition,
                votes: None,
            });
            next_id += 1;
        }
    }
    Ok(out)
}

fn other_domain(d: Domain) -> Domain {
    match d {
        Domain::Animal => Domain::Artifact,
        Domain::Artifact => Domain::Animal,
    }
}

/// Predicted choice for a triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    A,
    B,
    Tie,
}

/// Picks the option closer to the target in the distance matrix. Only the
/// ordering of the two distances matters.
pub fn predict_choice(
    triplet: &TripletRecord,
    distances: &DistanceMatrix,
) -> Result<Choice, TripletError> {
    let n = distances.len();
    for id in [triplet.target, triplet.option_a, triplet.option_b] {
        if id.0 >= n {
            return Err(TripletError::UnknownId {
                name: format!("#{}", id.0),
            });
        }
    }
    let da = distances.get(triplet.target.0, triplet.option_a.0);
    let db = distances.get(triplet.target.0, triplet.option_b.0);
    Ok(if da < db {
        Choice::A
    } else if db < da {
        Choice::B
    } else {
        Choice::Tie
    })
}

/// Per-condition agreement between model predictions and human majority
/// votes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionStats {
    pub condition: Condition,
    /// Triplets contributing to the agreement fraction.
    pub n_scored: usize,
    /// Triplets excluded for tied votes.
    pub ties_votes: usize,
    /// Triplets excluded for tied predicted distances.
    pub ties_pred: usize,
    /// Fraction of scored triplets where the prediction matched the
    /// majority side.
    pub agreement: f64,
    /// Mean of max(votes)/(total votes) over all triplets of the
    /// condition.
    pub human_consistency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub per_condition: Vec<ConditionStats>,
    pub overall_agreement: f64,
    pub overall_consistency: f64,
    pub total_triplets: usize,
    pub total_scored: usize,
}

/// Scores predictions from `distances` against majority votes. Every
/// triplet must carry votes with a positive total. Vote ties and
/// prediction ties are excluded from the agreement fraction and reported
/// separately; consistency averages over all triplets of a condition.
pub fn score_agreement(
    triplets: &[TripletRecord],
    distances: &DistanceMatrix,
) -> Result<AgreementReport, TripletError> {
    struct Bucket {
        n_scored: usize,
        agreed: usize,
        ties_votes: usize,
        ties_pred: usize,
        consistency_sum: f64,
        n_total: usize,
    }
    let mut buckets: HashMap<Condition, Bucket> = HashMap::new();

    for t in triplets {
        let (va, vb) = t.votes.ok_or(TripletError::MissingVotes { id: t.id })?;
        if va + vb == 0 {
            return Err(TripletError::ZeroVotes { id: t.id });
        }
        let bucket = buckets.entry(t.condition).or_insert(Bucket {
            n_scored: 0,
            agreed: 0,
            ties_votes: 0,
            ties_pred: 0,
            consistency_sum: 0.0,
            n_total: 0,
        });
        bucket.n_total += 1;
        bucket.consistency_sum += f64::from(va.max(vb)) / f64::from(va + vb);

        if va == vb {
            bucket.ties_votes += 1;
            continue;
        }
        let prediction = predict_choice(t, distances)?;
        if prediction == Choice::Tie {
            bucket.ties_pred += 1;
            continue;
        }
        let majority = if va > vb { Choice::A } else { Choice::B };
        bucket.n_scored += 1;
        if prediction == majority {
            bucket.agreed += 1;
        }
    }

    let mut per_condition = Vec::with_capacity(6);
    let (mut agreed, mut scored, mut consistency_sum, mut total) = (0usize, 0usize, 0.0f64, 0usize);
    for condition in Condition::ALL {
        let bucket = buckets
            .remove(&condition)
            .ok_or(TripletError::EmptyCondition { condition })?;
        agreed += bucket.agreed;
        scored += bucket.n_scored;
        consistency_sum += bucket.consistency_sum;
        total += bucket.n_total;
        per_condition.push(ConditionStats {
            condition,
            n_scored: bucket.n_scored,
            ties_votes: bucket.ties_votes,
            ties_pred: bucket.ties_pred,
            agreement: if bucket.n_scored > 0 {
                bucket.agreed as f64 / bucket.n_scored as f64
            } else {
                f64::NAN
            },
            human_consistency: bucket.consistency_sum / bucket.n_total as f64,
        });
    }
    Ok(AgreementReport {
        per_condition,
        overall_agreement: if scored > 0 {
            agreed as f64 / scored as f64
        } else {
            f64::NAN
        },
        overall_consistency: consistency_sum / total as f64,
        total_triplets: total,
        total_scored: scored,
    })
}

/// Writes triplets as CSV `triplet_id,target,option_a,option_b,condition`
/// with concept names.
pub fn write_triplets_csv<W: io::Write>(
    triplets: &[TripletRecord],
    dataset: &NormDataset,
    writer: W,
) -> Result<(), TripletError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["triplet_id", "target", "option_a", "option_b", "condition"])?;
    for t in triplets {
        w.write_record([
            t.id.to_string(),
            dataset.concept(t.target).name.clone(),
            dataset.concept(t.option_a).name.clone(),
            dataset.concept(t.option_b).name.clone(),
            t.condition.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a triplet CSV back, resolving names against the dataset and
/// re-checking that each row classifies to its labeled condition.
pub fn read_triplets_csv<R: io::Read>(
    reader: R,
    dataset: &NormDataset,
) -> Result<Vec<TripletRecord>, TripletError> {
    #[derive(serde::Deserialize)]
    struct Row {
        triplet_id: u64,
        target: String,
        option_a: String,
        option_b: String,
        condition: String,
    }
    let mut out = Vec::new();
    let mut r = csv::Reader::from_reader(reader);
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let row_no = i as u64 + 2;
        let row = row.map_err(TripletError::Csv)?;
        let resolve = |name: &str| {
            dataset
                .concept_id(name)
                .ok_or_else(|| TripletError::UnknownId {
                    name: name.to_string(),
                })
        };
        let target = resolve(&row.target)?;
        let option_a = resolve(&row.option_a)?;
        let option_b = resolve(&row.option_b)?;
        let labeled = Condition::parse(&row.condition).ok_or_else(|| TripletError::BadRow {
            row: row_no,
            message: format!("unknown condition '{}'", row.condition),
        })?;
        let actual = classify_condition(dataset, target, option_a, option_b)?;
        if actual != labeled {
            return Err(TripletError::ConditionMismatch {
                id: row.triplet_id,
                labeled,
                actual,
            });
        }
        out.push(TripletRecord {
            id: row.triplet_id,
            target,
            option_a,
            option_b,
            condition: labeled,
            votes: None,
        });
    }
    Ok(out)
}

/// Writes votes as CSV `triplet_id,votes_a,votes_b`.
pub fn write_votes_csv<W: io::Write>(
    votes: &[(u64, u32, u32)],
    writer: W,
) -> Result<(), TripletError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["triplet_id", "votes_a", "votes_b"])?;
    for (id, va, vb) in votes {
        w.write_record([id.to_string(), va.to_string(), vb.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Attaches votes from a votes CSV to the matching triplets. Every vote
/// row must reference a known triplet id.
pub fn attach_votes<R: io::Read>(
    triplets: &mut [TripletRecord],
    reader: R,
) -> Result<(), TripletError> {
    #[derive(serde::Deserialize)]
    struct Row {
        triplet_id: u64,
        votes_a: u32,
        votes_b: u32,
    }
    let by_id: HashMap<u64, usize> = triplets
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id, i))
        .collect();
    let mut r = csv::Reader::from_reader(reader);
    for row in r.deserialize::<Row>() {
        let row = row.map_err(TripletError::Csv)?;
        let &idx = by_id
            .get(&row.triplet_id)
            .ok_or(TripletError::VotesForUnknownTriplet { id: row.triplet_id })?;
        if triplets[idx].votes.is_some() {
            return Err(TripletError::DuplicateVotes { id: row.triplet_id });
        }
        triplets[idx].votes = Some((row.votes_a, row.votes_b));
    }
    Ok(())
}

/// Agreement formatted for CSV; a condition with no scored triplets (all
/// ties) has no defined agreement and emits an empty cell.
pub fn format_agreement(agreement: f64) -> String {
    if agreement.is_nan() {
        String::new()
    } else {
        format!("{agreement:.6}")
    }
}

/// Writes an agreement report as CSV
/// `condition,n,agreement,ties_votes,ties_pred,human_consistency` plus a
/// final `all` row.
pub fn write_report_csv<W: io::Write>(
    report: &AgreementReport,
    writer: W,
) -> Result<(), TripletError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "condition",
        "n",
        "agreement",
        "ties_votes",
        "ties_pred",
        "human_consistency",
    ])?;
    for s in &report.per_condition {
        w.write_record([
            s.condition.as_str().to_string(),
            s.n_scored.to_string(),
            format_agreement(s.agreement),
            s.ties_votes.to_string(),
            s.ties_pred.to_string(),
            format!("{:.6}", s.human_consistency),
        ])?;
    }
    w.write_record([
        "all".to_string(),
        report.total_scored.to_string(),
        format_agreement(report.overall_agreement),
        report
            .per_condition
            .iter()
            .map(|s| s.ties_votes)
            .sum::<usize>()
            .to_string(),
        report
            .per_condition
            .iter()
            .map(|s| s.ties_pred)
            .sum::<usize>()
            .to_string(),
        format!("{:.6}", report.overall_consistency),
    ])?;
    w.flush()?;
    Ok(())
}
