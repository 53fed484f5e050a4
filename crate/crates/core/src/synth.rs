//! Seeded synthetic datasets and votes for exercising the pipeline
//! without real norm data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Concept, Domain, Feature, NormDataset};
use crate::space::DistanceMatrix;
use crate::triplet::{Choice, TripletRecord};

/// Shape of a synthetic dataset. Concepts and features split evenly
/// between the two domains; categories split 6/7 like the 13-category
/// inventory the pipeline is built around.
#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub n_concepts: usize,
    pub n_features: usize,
    pub rater_total: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_concepts: 300,
            n_features: 2000,
            rater_total: 4,
            seed: 7,
        }
    }
}

const ANIMAL_CATEGORIES: usize = 6;
const ARTIFACT_CATEGORIES: usize = 7;

/// Builds a dataset with category structure: each category owns a block
/// of signature features its members all carry at full agreement, each
/// concept gets a few private full-agreement anchors, and the remaining
/// within-domain cells draw graded rater counts. Every concept is
/// guaranteed at least one full-agreement feature, so human matrices at
/// any threshold have no zero rows. Deterministic per seed.
pub fn synthetic_dataset(config: &SynthConfig) -> NormDataset {
    assert!(config.n_concepts >= 4, "need at least two concepts per domain");
    assert!(
        config.n_features >= 160,
        "need room for category signatures and anchors in each domain"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let n_animals = config.n_concepts / 2;
    let n_artifacts = config.n_concepts - n_animals;
    let mut concepts = Vec::with_capacity(config.n_concepts);
    for i in 0..n_animals {
        concepts.push(Concept {
            name: format!("animal_{i:04}"),
            domain: Domain::Animal,
            category: format!("acat_{}", i % ANIMAL_CATEGORIES),
        });
    }
    for i in 0..n_artifacts {
        concepts.push(Concept {
            name: format!("artifact_{i:04}"),
            domain: Domain::Artifact,
            category: format!("tcat_{}", i % ARTIFACT_CATEGORIES),
        });
    }

    let n_animal_features = config.n_features / 2;
    let n_artifact_features = config.n_features - n_animal_features;
    let mut features = Vec::with_capacity(config.n_features);
    for i in 0..n_animal_features {
        features.push(Feature {
            name: format!("feat_a_{i:05}"),
            source_domain: Domain::Animal,
        });
    }
    for i in 0..n_artifact_features {
        features.push(Feature {
            name: format!("feat_t_{i:05}"),
            source_domain: Domain::Artifact,
        });
    }

    let n_f = features.len();
    let total = config.rater_total;
    let mut rater_yes = vec![0u32; concepts.len() * n_f];
    let mut human_verified = vec![false; concepts.len() * n_f];

    // per-domain feature index ranges
    let domain_range = |d: Domain| match d {
        Domain::Animal => 0..n_animal_features,
        Domain::Artifact => n_animal_features..n_f,
    };
    let signature_width = 8usize;

    for (c, concept) in concepts.iter().enumerate() {
        let range = domain_range(concept.domain);
        let domain_width = range.len();
        let category_idx: usize = concept.category[5..].parse().expect("synthetic category");
        for f in range.clone() {
            let idx = c * n_f + f;
            human_verified[idx] = true;
            let local = f - range.start;
            // category signature block
            if local / signature_width == category_idx {
                rater_yes[idx] = total;
                continue;
            }
            // three private anchors per concept, offset past the signatures
            let anchor_base = (ANIMAL_CATEGORIES.max(ARTIFACT_CATEGORIES) + 1) * signature_width;
            let anchor_slot = (c * 3) % (domain_width - anchor_base);
            if local >= anchor_base
                && local - anchor_base >= anchor_slot
                && local - anchor_base < anchor_slot + 3
            {
                rater_yes[idx] = total;
                continue;
            }
            // graded background counts
            let u: f64 = rng.random();
            rater_yes[idx] = if u < 0.10 {
                total
            } else if u < 0.15 {
                3.min(total)
            } else if u < 0.20 {
                2.min(total)
            } else if u < 0.25 {
                1.min(total)
            } else {
                0
            };
        }
    }

    NormDataset::new(concepts, features, total, rater_yes, human_verified)
        .expect("synthetic dataset satisfies invariants")
}

/// Writes the dataset as the two ingestion CSVs (concepts and long-format
/// cells). Every within-domain cell is listed, zero counts included, so
/// the feature inventory and its order survive a reload; cross-domain
/// cells are omitted and restored by the loader's defaulting rule.
pub fn write_ingestion_csvs<W1: std::io::Write, W2: std::io::Write>(
    dataset: &NormDataset,
    concepts_writer: W1,
    cells_writer: W2,
) -> Result<(), crate::dataset::DatasetError> {
    let mut cw = csv::Writer::from_writer(concepts_writer);
    cw.write_record(["name", "domain", "category"])?;
    for c in dataset.concepts() {
        cw.write_record([c.name.as_str(), c.domain.as_str(), c.category.as_str()])?;
    }
    cw.flush()?;

    let mut xw = csv::Writer::from_writer(cells_writer);
    xw.write_record([
        "concept",
        "feature",
        "feature_domain",
        "raters_yes",
        "raters_total",
    ])?;
    let total = dataset.rater_total().to_string();
    for (ci, c) in dataset.concepts().iter().enumerate() {
        for (fi, f) in dataset.features().iter().enumerate() {
            let (cid, fid) = (
                crate::dataset::ConceptId(ci),
                crate::dataset::FeatureId(fi),
            );
            if dataset.is_cross_domain(cid, fid) {
                continue;
            }
            xw.write_record([
                c.name.as_str(),
                f.name.as_str(),
                f.source_domain.as_str(),
                &dataset.rater_yes(cid, fid).to_string(),
                &total,
            ])?;
        }
    }
    xw.flush()?;
    Ok(())
}

/// Synthesizes majority votes that follow the given distance matrix: the
/// closer option takes `participants - participants/4` votes, ties split
/// evenly. Returns `(triplet_id, votes_a, votes_b)` rows.
pub fn synthesize_votes(
    triplets: &[TripletRecord],
    distances: &DistanceMatrix,
    participants: u32,
) -> Vec<(u64, u32, u32)> {
    let minority = participants / 4;
    let majority = participants - minority;
    triplets
        .iter()
        .map(|t| {
            let choice = crate::triplet::predict_choice(t, distances)
                .expect("triplet ids resolve in the distance matrix");
            match choice {
                Choice::A => (t.id, majority, minority),
                Choice::B => (t.id, minority, majority),
                Choice::Tie => (t.id, participants / 2, participants - participants / 2),
            }
        })
        .collect()
}
