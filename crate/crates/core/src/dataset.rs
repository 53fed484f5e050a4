//! Concept/feature data model and norm ingestion.
//!
//! A [`NormDataset`] holds an ordered concept inventory, an ordered feature
//! inventory, the per-cell count of raters who affirmed the pair, and a
//! coverage mask recording which cells human raters actually evaluated.
//! Cross-domain cells (an animal concept probed with an artifact-generated
//! feature, or vice versa) are never human-verified.

use std::collections::HashMap;
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

/// The two generation domains of the norm study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Animal,
    Artifact,
}

impl Domain {
    /// Case-insensitive parse of the file representation.
    pub fn parse(s: &str) -> Option<Domain> {
        match s.trim().to_ascii_lowercase().as_str() {
            "animal" => Some(Domain::Animal),
            "artifact" => Some(Domain::Artifact),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Animal => "animal",
            Domain::Artifact => "artifact",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index of a concept in its dataset's stable ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(pub usize);

/// Index of a feature in its dataset's stable ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub domain: Domain,
    pub category: String,
}

/// A property string together with the domain whose generation phase
/// produced it. Features with the same name may exist in both domains;
/// they are kept as distinct records because human verification scope is
/// per-domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    #[serde(rename = "domain")]
    pub source_domain: Domain,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("duplicate concept '{name}' (row {row})")]
    DuplicateConcept { name: String, row: u64 },
    #[error("duplicate cell for concept '{concept}', feature '{feature}' (row {row})")]
    DuplicateCell {
        concept: String,
        feature: String,
        row: u64,
    },
    #[error("duplicate feature '{name}' in domain '{domain}' (row {row})")]
    DuplicateFeature {
        name: String,
        domain: Domain,
        row: u64,
    },
    #[error("unknown domain '{value}' (row {row}); expected 'animal' or 'artifact'")]
    UnknownDomain { value: String, row: u64 },
    #[error(
        "rater count overflow for concept '{concept}', feature '{feature}': \
         {yes} yes votes out of {total} raters (row {row})"
    )]
    RaterCountOverflow {
        concept: String,
        feature: String,
        yes: u32,
        total: u32,
        row: u64,
    },
    #[error("dataset is empty: {what}")]
    EmptyDataset { what: &'static str },
    #[error("cells row {row} references unknown concept '{name}'")]
    UnknownConcept { name: String, row: u64 },
    #[error("empty {what} name (row {row})")]
    EmptyName { what: &'static str, row: u64 },
    #[error("category '{category}' appears under both domains '{first}' and '{second}' (row {row})")]
    CategoryDomainConflict {
        category: String,
        first: Domain,
        second: Domain,
        row: u64,
    },
    #[error("inconsistent raters_total: expected {expected}, found {found} (row {row})")]
    InconsistentRaterTotal { expected: u32, found: u32, row: u64 },
    #[error(
        "cross-domain cell for concept '{concept}', feature '{feature}' carries {yes} \
         rater votes (row {row}); cross-domain pairs were never human-verified"
    )]
    CrossDomainRating {
        concept: String,
        feature: String,
        yes: u32,
        row: u64,
    },
    #[error("threshold {tau} outside (0, 1]")]
    InvalidThreshold { tau: f64 },
    #[error("invalid dataset dump: {0}")]
    InvalidDump(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Coverage rule for within-domain cells missing from the cells file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoveragePolicy {
    /// Every within-domain pair counts as human-verified (the verification
    /// phase covered all of them); absent cells get zero yes votes.
    #[default]
    AllWithinDomain,
    /// Only cells explicitly present in the cells file count as verified.
    ListedOnly,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub coverage: CoveragePolicy,
}

/// Immutable norm dataset. Construction validates every invariant; all
/// reads afterwards are safe from concurrent contexts.
#[derive(Debug, Clone)]
pub struct NormDataset {
    concepts: Vec<Concept>,
    features: Vec<Feature>,
    rater_total: u32,
    rater_yes: Vec<u32>,
    human_verified: Vec<bool>,
    concept_index: HashMap<String, ConceptId>,
    feature_index: HashMap<(String, Domain), FeatureId>,
}

impl PartialEq for NormDataset {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts
            && self.features == other.features
            && self.rater_total == other.rater_total
            && self.rater_yes == other.rater_yes
            && self.human_verified == other.human_verified
    }
}

impl NormDataset {
    /// Builds a dataset from raw parts, checking the full invariant set:
    /// non-empty inventories, unique names, category/domain consistency,
    /// rater counts within bounds, and the coverage rules for cross-domain
    /// cells.
    pub fn new(
        concepts: Vec<Concept>,
        features: Vec<Feature>,
        rater_total: u32,
        rater_yes: Vec<u32>,
        human_verified: Vec<bool>,
    ) -> Result<Self, DatasetError> {
        if concepts.is_empty() {
            return Err(DatasetError::EmptyDataset { what: "no concepts" });
        }
        if features.is_empty() {
            return Err(DatasetError::EmptyDataset { what: "no features" });
        }
        let n_cells = concepts.len() * features.len();
        if rater_yes.len() != n_cells || human_verified.len() != n_cells {
            return Err(DatasetError::InvalidDump(format!(
                "cell tables hold {} / {} entries for a {}x{} dataset",
                rater_yes.len(),
                human_verified.len(),
                concepts.len(),
                features.len()
            )));
        }

        let mut concept_index = HashMap::with_capacity(concepts.len());
        let mut category_domain: HashMap<&str, Domain> = HashMap::new();
        for (i, c) in concepts.iter().enumerate() {
            if c.name.is_empty() {
                return Err(DatasetError::EmptyName {
                    what: "concept",
                    row: i as u64 + 1,
                });
            }
            if concept_index.insert(c.name.clone(), ConceptId(i)).is_some() {
                return Err(DatasetError::DuplicateConcept {
                    name: c.name.clone(),
                    row: i as u64 + 1,
                });
            }
            match category_domain.get(c.category.as_str()) {
                Some(&d) if d != c.domain => {
                    return Err(DatasetError::CategoryDomainConflict {
                        category: c.category.clone(),
                        first: d,
                        second: c.domain,
                        row: i as u64 + 1,
                    });
                }
                Some(_) => {}
                None => {
                    category_domain.insert(c.category.as_str(), c.domain);
                }
            }
        }

        let mut feature_index = HashMap::with_capacity(features.len());
        for (j, f) in features.iter().enumerate() {
            if f.name.is_empty() {
                return Err(DatasetError::EmptyName {
                    what: "feature",
                    row: j as u64 + 1,
                });
            }
            let key = (f.name.clone(), f.source_domain);
            if feature_index.insert(key, FeatureId(j)).is_some() {
                return Err(DatasetError::DuplicateFeature {
                    name: f.name.clone(),
                    domain: f.source_domain,
                    row: j as u64 + 1,
                });
            }
        }

        let ds = NormDataset {
            concepts,
            features,
            rater_total,
            rater_yes,
            human_verified,
            concept_index,
            feature_index,
        };

        for c in 0..ds.n_concepts() {
            for f in 0..ds.n_features() {
                let idx = ds.cell_index(ConceptId(c), FeatureId(f));
                let yes = ds.rater_yes[idx];
                if yes > ds.rater_total {
                    return Err(DatasetError::RaterCountOverflow {
                        concept: ds.concepts[c].name.clone(),
                        feature: ds.features[f].name.clone(),
                        yes,
                        total: ds.rater_total,
                        row: 0,
                    });
                }
                let cross = ds.concepts[c].domain != ds.features[f].source_domain;
                if cross && ds.human_verified[idx] {
                    return Err(DatasetError::InvalidDump(format!(
                        "cross-domain cell ({}, {}) marked human-verified",
                        ds.concepts[c].name, ds.features[f].name
                    )));
                }
                if yes > 0 && !ds.human_verified[idx] {
                    return Err(DatasetError::InvalidDump(format!(
                        "cell ({}, {}) has {} yes votes but is not human-verified",
                        ds.concepts[c].name, ds.features[f].name, yes
                    )));
                }
            }
        }

        Ok(ds)
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_cells(&self) -> usize {
        self.rater_yes.len()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn concept(&self, id: ConceptId) -> &Concept {
        &self.concepts[id.0]
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id.0]
    }

    pub fn concept_id(&self, name: &str) -> Option<ConceptId> {
        self.concept_index.get(name).copied()
    }

    pub fn feature_id(&self, name: &str, source_domain: Domain) -> Option<FeatureId> {
        self.feature_index
            .get(&(name.to_string(), source_domain))
            .copied()
    }

    pub fn rater_total(&self) -> u32 {
        self.rater_total
    }

    #[inline]
    pub fn cell_index(&self, c: ConceptId, f: FeatureId) -> usize {
        c.0 * self.features.len() + f.0
    }

    #[inline]
    pub fn rater_yes(&self, c: ConceptId, f: FeatureId) -> u32 {
        self.rater_yes[self.cell_index(c, f)]
    }

    #[inline]
    pub fn human_verified(&self, c: ConceptId, f: FeatureId) -> bool {
        self.human_verified[self.cell_index(c, f)]
    }

    /// True when the feature's generation domain differs from the
    /// concept's domain.
    #[inline]
    pub fn is_cross_domain(&self, c: ConceptId, f: FeatureId) -> bool {
        self.concepts[c.0].domain != self.features[f.0].source_domain
    }

    /// Feature names that occur in both generation domains. Such features
    /// are kept as distinct records; this report exists so downstream
    /// consumers can spot the collisions.
    pub fn feature_name_collisions(&self) -> Vec<String> {
        let mut seen: HashMap<&str, Domain> = HashMap::new();
        let mut collisions = Vec::new();
        for f in &self.features {
            match seen.get(f.name.as_str()) {
                Some(&d) if d != f.source_domain => collisions.push(f.name.clone()),
                Some(_) => {}
                None => {
                    seen.insert(f.name.as_str(), f.source_domain);
                }
            }
        }
        collisions.sort();
        collisions.dedup();
        collisions
    }

    pub fn concepts_in_domain(&self, domain: Domain) -> impl Iterator<Item = ConceptId> + '_ {
        self.concepts
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.domain == domain)
            .map(|(i, _)| ConceptId(i))
    }

    pub fn features_in_domain(&self, domain: Domain) -> impl Iterator<Item = FeatureId> + '_ {
        self.features
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.source_domain == domain)
            .map(|(i, _)| FeatureId(i))
    }
}

#[derive(Debug, Deserialize)]
struct ConceptRow {
    name: String,
    domain: String,
    category: String,
}

#[derive(Debug, Deserialize)]
struct CellRow {
    concept: String,
    feature: String,
    feature_domain: String,
    raters_yes: u32,
    raters_total: u32,
}

/// Loads a dataset from the two CSV streams.
///
/// The concepts file carries `name,domain,category`; the cells file is
/// long-format `concept,feature,feature_domain,raters_yes,raters_total`.
/// The feature inventory is the ordered set of `(feature, feature_domain)`
/// pairs by first appearance. Cells absent from the file default to zero
/// yes votes; their coverage flag follows [`LoadOptions::coverage`].
pub fn load_norms<R1: io::Read, R2: io::Read>(
    concepts_source: R1,
    cells_source: R2,
    options: LoadOptions,
) -> Result<NormDataset, DatasetError> {
    let mut concept_reader = csv::Reader::from_reader(concepts_source);
    let mut concepts: Vec<Concept> = Vec::new();
    let mut concept_index: HashMap<String, usize> = HashMap::new();
    let mut category_domain: HashMap<String, Domain> = HashMap::new();
    for (i, row) in concept_reader.deserialize::<ConceptRow>().enumerate() {
        let row_no = i as u64 + 2; // header is line 1
        let row = row?;
        let domain = Domain::parse(&row.domain).ok_or_else(|| DatasetError::UnknownDomain {
            value: row.domain.clone(),
            row: row_no,
        })?;
        if row.name.trim().is_empty() {
            return Err(DatasetError::EmptyName {
                what: "concept",
                row: row_no,
            });
        }
        if concept_index.contains_key(&row.name) {
            return Err(DatasetError::DuplicateConcept {
                name: row.name,
                row: row_no,
            });
        }
        match category_domain.get(&row.category) {
            Some(&d) if d != domain => {
                return Err(DatasetError::CategoryDomainConflict {
                    category: row.category,
                    first: d,
                    second: domain,
                    row: row_no,
                });
            }
            Some(_) => {}
            None => {
                category_domain.insert(row.category.clone(), domain);
            }
        }
        concept_index.insert(row.name.clone(), concepts.len());
        concepts.push(Concept {
            name: row.name,
            domain,
            category: row.category,
        });
    }
    if concepts.is_empty() {
        return Err(DatasetError::EmptyDataset { what: "no concepts" });
    }

    // First pass over cells: build the feature inventory in file order and
    // stash (concept, feature) -> (yes, verified) entries.
    let mut features: Vec<Feature> = Vec::new();
    let mut feature_index: HashMap<(String, Domain), usize> = HashMap::new();
    let mut entries: HashMap<(usize, usize), u32> = HashMap::new();
    let mut rater_total: Option<u32> = None;

    let mut cell_reader = csv::Reader::from_reader(cells_source);
    for (i, row) in cell_reader.deserialize::<CellRow>().enumerate() {
        let row_no = i as u64 + 2;
        let row = row?;
        let feature_domain =
            Domain::parse(&row.feature_domain).ok_or_else(|| DatasetError::UnknownDomain {
                value: row.feature_domain.clone(),
                row: row_no,
            })?;
        if row.feature.trim().is_empty() {
            return Err(DatasetError::EmptyName {
                what: "feature",
                row: row_no,
            });
        }
        let &concept_pos =
            concept_index
                .get(&row.concept)
                .ok_or_else(|| DatasetError::UnknownConcept {
                    name: row.concept.clone(),
                    row: row_no,
                })?;
        match rater_total {
            None => rater_total = Some(row.raters_total),
            Some(expected) if expected != row.raters_total => {
                return Err(DatasetError::InconsistentRaterTotal {
                    expected,
                    found: row.raters_total,
                    row: row_no,
                });
            }
            Some(_) => {}
        }
        if row.raters_yes > row.raters_total {
            return Err(DatasetError::RaterCountOverflow {
                concept: row.concept,
                feature: row.feature,
                yes: row.raters_yes,
                total: row.raters_total,
                row: row_no,
            });
        }
        let cross = concepts[concept_pos].domain != feature_domain;
        if cross && row.raters_yes > 0 {
            return Err(DatasetError::CrossDomainRating {
                concept: row.concept,
                feature: row.feature,
                yes: row.raters_yes,
                row: row_no,
            });
        }
        let feature_pos = *feature_index
            .entry((row.feature.clone(), feature_domain))
            .or_insert_with(|| {
                features.push(Feature {
                    name: row.feature.clone(),
                    source_domain: feature_domain,
                });
                features.len() - 1
            });
        if entries.insert((concept_pos, feature_pos), row.raters_yes).is_some() {
            return Err(DatasetError::DuplicateCell {
                concept: concepts[concept_pos].name.clone(),
                feature: row.feature,
                row: row_no,
            });
        }
    }
    if features.is_empty() {
        return Err(DatasetError::EmptyDataset { what: "no features" });
    }
    let rater_total = rater_total.expect("cells present implies rater total");

    let n_features = features.len();
    let mut rater_yes = vec![0u32; concepts.len() * n_features];
    let mut human_verified = vec![false; concepts.len() * n_features];
    for (c, concept) in concepts.iter().enumerate() {
        for (f, feature) in features.iter().enumerate() {
            let idx = c * n_features + f;
            let cross = concept.domain != feature.source_domain;
            let listed = entries.get(&(c, f)).copied();
            if let Some(yes) = listed {
                rater_yes[idx] = yes;
            }
            human_verified[idx] = if cross {
                false
            } else {
                match options.coverage {
                    CoveragePolicy::AllWithinDomain => true,
                    CoveragePolicy::ListedOnly => listed.is_some(),
                }
            };
        }
    }

    NormDataset::new(concepts, features, rater_total, rater_yes, human_verified)
}

/// Serialized form of the canonical JSON dump.
#[derive(Debug, Serialize, Deserialize)]
struct DatasetDump {
    rater_total: u32,
    concepts: Vec<Concept>,
    features: Vec<Feature>,
    /// One row per concept, one count per feature.
    rater_yes: Vec<Vec<u32>>,
    /// One bitstring per concept; '1' marks a human-verified cell.
    human_verified: Vec<String>,
}

impl NormDataset {
    /// Writes the canonical JSON dump. Output bytes are deterministic for
    /// a given dataset.
    pub fn write_json<W: io::Write>(&self, writer: W) -> Result<(), DatasetError> {
        let n_f = self.n_features();
        let dump = DatasetDump {
            rater_total: self.rater_total,
            concepts: self.concepts.clone(),
            features: self.features.clone(),
            rater_yes: self.rater_yes.chunks(n_f).map(<[u32]>::to_vec).collect(),
            human_verified: self
                .human_verified
                .chunks(n_f)
                .map(|row| row.iter().map(|&v| if v { '1' } else { '0' }).collect())
                .collect(),
        };
        serde_json::to_writer_pretty(writer, &dump)?;
        Ok(())
    }

    /// Reads a canonical JSON dump, re-validating every invariant.
    pub fn read_json<R: io::Read>(reader: R) -> Result<Self, DatasetError> {
        let dump: DatasetDump = serde_json::from_reader(reader)?;
        let n_f = dump.features.len();
        let mut rater_yes = Vec::with_capacity(dump.concepts.len() * n_f);
        for (i, row) in dump.rater_yes.iter().enumerate() {
            if row.len() != n_f {
                return Err(DatasetError::InvalidDump(format!(
                    "rater_yes row {i} has {} entries, expected {n_f}",
                    row.len()
                )));
            }
            rater_yes.extend_from_slice(row);
        }
        let mut human_verified = Vec::with_capacity(dump.concepts.len() * n_f);
        for (i, row) in dump.human_verified.iter().enumerate() {
            if row.len() != n_f {
                return Err(DatasetError::InvalidDump(format!(
                    "human_verified row {i} has {} entries, expected {n_f}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                match ch {
                    '0' => human_verified.push(false),
                    '1' => human_verified.push(true),
                    other => {
                        return Err(DatasetError::InvalidDump(format!(
                            "human_verified row {i} holds '{other}'"
                        )));
                    }
                }
            }
        }
        NormDataset::new(
            dump.concepts,
            dump.features,
            dump.rater_total,
            rater_yes,
            human_verified,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concepts_csv() -> &'static str {
        "name,domain,category\n\
         tiger,animal,mammals\n\
         trout,animal,fish\n\
         hammer,artifact,tools\n"
    }

    fn cells_csv() -> &'static str {
        "concept,feature,feature_domain,raters_yes,raters_total\n\
         tiger,has_stripes,animal,4,4\n\
         tiger,can_swim,animal,2,4\n\
         trout,can_swim,animal,4,4\n\
         hammer,has_handle,artifact,4,4\n\
         tiger,has_handle,artifact,0,4\n"
    }

    fn load(concepts: &str, cells: &str) -> Result<NormDataset, DatasetError> {
        load_norms(concepts.as_bytes(), cells.as_bytes(), LoadOptions::default())
    }

    #[test]
    fn loads_and_defaults_missing_cells() {
        let ds = load(concepts_csv(), cells_csv()).unwrap();
        assert_eq!(ds.n_concepts(), 3);
        assert_eq!(ds.n_features(), 3);
        let tiger = ds.concept_id("tiger").unwrap();
        let swim = ds.feature_id("can_swim", Domain::Animal).unwrap();
        assert_eq!(ds.rater_yes(tiger, swim), 2);

        // within-domain cell missing from the file: zero votes, verified
        let trout = ds.concept_id("trout").unwrap();
        let stripes = ds.feature_id("has_stripes", Domain::Animal).unwrap();
        assert_eq!(ds.rater_yes(trout, stripes), 0);
        assert!(ds.human_verified(trout, stripes));

        // cross-domain cell: never verified, even when listed
        let handle = ds.feature_id("has_handle", Domain::Artifact).unwrap();
        assert!(!ds.human_verified(tiger, handle));
        assert!(ds.is_cross_domain(tiger, handle));
    }

    #[test]
    fn listed_only_coverage_leaves_unlisted_cells_unverified() {
        let ds = load_norms(
            concepts_csv().as_bytes(),
            cells_csv().as_bytes(),
            LoadOptions {
                coverage: CoveragePolicy::ListedOnly,
            },
        )
        .unwrap();
        let trout = ds.concept_id("trout").unwrap();
        let stripes = ds.feature_id("has_stripes", Domain::Animal).unwrap();
        assert!(!ds.human_verified(trout, stripes));
    }

    #[test]
    fn duplicate_cell_rejected() {
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     tiger,has_stripes,animal,4,4\n\
                     tiger,has_stripes,animal,3,4\n";
        let err = load(concepts_csv(), cells).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateCell { row: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_concept_rejected() {
        let concepts = "name,domain,category\ntiger,animal,mammals\ntiger,animal,mammals\n";
        let err = load(concepts, cells_csv()).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateConcept { .. }), "{err}");
    }

    #[test]
    fn unknown_domain_rejected() {
        let concepts = "name,domain,category\ntiger,plant,mammals\n";
        let err = load(concepts, cells_csv()).unwrap_err();
        assert!(matches!(err, DatasetError::UnknownDomain { row: 2, .. }), "{err}");
    }

    #[test]
    fn rater_overflow_rejected() {
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     tiger,has_stripes,animal,5,4\n";
        let err = load(concepts_csv(), cells).unwrap_err();
        assert!(matches!(err, DatasetError::RaterCountOverflow { .. }), "{err}");
    }

    #[test]
    fn cross_domain_votes_rejected() {
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     tiger,has_handle,artifact,1,4\n";
        let err = load(concepts_csv(), cells).unwrap_err();
        assert!(matches!(err, DatasetError::CrossDomainRating { .. }), "{err}");
    }

    #[test]
    fn empty_inputs_rejected() {
        let err = load("name,domain,category\n", cells_csv()).unwrap_err();
        assert!(matches!(err, DatasetError::EmptyDataset { .. }));
        let err = load(concepts_csv(), "concept,feature,feature_domain,raters_yes,raters_total\n")
            .unwrap_err();
        assert!(matches!(err, DatasetError::EmptyDataset { .. }));
    }

    #[test]
    fn category_must_stay_in_one_domain() {
        let concepts = "name,domain,category\n\
                        tiger,animal,mammals\n\
                        hammer,artifact,mammals\n";
        let err = load(concepts, cells_csv()).unwrap_err();
        assert!(matches!(err, DatasetError::CategoryDomainConflict { .. }), "{err}");
    }

    #[test]
    fn same_feature_name_in_both_domains_is_two_features() {
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     tiger,is_useful,animal,1,4\n\
                     hammer,is_useful,artifact,4,4\n";
        let ds = load(concepts_csv(), cells).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_name_collisions(), vec!["is_useful".to_string()]);
    }

    #[test]
    fn full_inventory_counts_add_up() {
        // 129 animal rows + 166 artifact rows make a 295-concept dataset
        let mut concepts = String::from("name,domain,category\n");
        for i in 0..129 {
            concepts.push_str(&format!("animal_{i},animal,ac{}\n", i % 5));
        }
        for i in 0..166 {
            concepts.push_str(&format!("artifact_{i},artifact,tc{}\n", i % 5));
        }
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     animal_0,has_fur,animal,4,4\n\
                     artifact_0,has_handle,artifact,4,4\n";
        let ds = load(&concepts, cells).unwrap();
        assert_eq!(ds.n_concepts(), 295);
        assert_eq!(ds.concepts_in_domain(Domain::Animal).count(), 129);
        assert_eq!(ds.concepts_in_domain(Domain::Artifact).count(), 166);
    }

    #[test]
    fn json_dump_round_trips() {
        let ds = load(concepts_csv(), cells_csv()).unwrap();
        let mut buf = Vec::new();
        ds.write_json(&mut buf).unwrap();
        let back = NormDataset::read_json(buf.as_slice()).unwrap();
        assert_eq!(ds, back);

        let mut buf2 = Vec::new();
        back.write_json(&mut buf2).unwrap();
        assert_eq!(buf, buf2, "dump must be byte-stable");
    }
}
