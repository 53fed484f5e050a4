//! Binary concept-feature matrices and cell labels.

use std::io;

use serde::{Deserialize, Serialize};

use crate::dataset::{Concept, ConceptId, DatasetError, Feature, FeatureId, NormDataset};

/// Where a binary matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    /// Thresholded human verification at agreement fraction `tau`.
    Human { tau: f64 },
    /// Assembled from oracle answers.
    Machine,
    /// Human values on verified cells, machine values elsewhere.
    Combined,
}

/// Dense 0/1 matrix over a dataset's concept and feature orderings. The
/// inventories are carried along so the matrix is self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFeatureMatrix {
    concepts: Vec<Concept>,
    features: Vec<Feature>,
    cells: Vec<u8>,
    provenance: Provenance,
}

impl BinaryFeatureMatrix {
    pub fn new(
        concepts: Vec<Concept>,
        features: Vec<Feature>,
        cells: Vec<u8>,
        provenance: Provenance,
    ) -> Result<Self, DatasetError> {
        if cells.len() != concepts.len() * features.len() {
            return Err(DatasetError::InvalidDump(format!(
                "matrix holds {} cells for a {}x{} shape",
                cells.len(),
                concepts.len(),
                features.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&v| v > 1) {
            return Err(DatasetError::InvalidDump(format!(
                "matrix cell value {bad} is not 0/1"
            )));
        }
        Ok(BinaryFeatureMatrix {
            concepts,
            features,
            cells,
            provenance,
        })
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    #[inline]
    pub fn get(&self, c: ConceptId, f: FeatureId) -> u8 {
        self.cells[c.0 * self.features.len() + f.0]
    }

    pub fn row(&self, c: ConceptId) -> &[u8] {
        let n = self.features.len();
        &self.cells[c.0 * n..(c.0 + 1) * n]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().map(|&v| v as usize).sum()
    }

    /// True when the matrix shares the dataset's exact concept and
    /// feature orderings.
    pub fn matches_dataset(&self, dataset: &NormDataset) -> bool {
        self.concepts == dataset.concepts() && self.features == dataset.features()
    }

    pub fn same_shape(&self, other: &BinaryFeatureMatrix) -> bool {
        self.concepts == other.concepts && self.features == other.features
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDump {
    provenance: Provenance,
    concepts: Vec<Concept>,
    features: Vec<Feature>,
    /// One bitstring per concept.
    rows: Vec<String>,
}

impl BinaryFeatureMatrix {
    /// Writes the matrix as JSON with one bitstring row per concept.
    /// Deterministic bytes for a given matrix.
    pub fn write_json<W: io::Write>(&self, writer: W) -> Result<(), DatasetError> {
        let n = self.features.len();
        let dump = MatrixDump {
            provenance: self.provenance,
            concepts: self.concepts.clone(),
            features: self.features.clone(),
            rows: self
                .cells
                .chunks(n)
                .map(|row| row.iter().map(|&v| if v == 1 { '1' } else { '0' }).collect())
                .collect(),
        };
        serde_json::to_writer_pretty(writer, &dump)?;
        Ok(())
    }

    pub fn read_json<R: io::Read>(reader: R) -> Result<Self, DatasetError> {
        let dump: MatrixDump = serde_json::from_reader(reader)?;
        let n = dump.features.len();
        let mut cells = Vec::with_capacity(dump.concepts.len() * n);
        for (i, row) in dump.rows.iter().enumerate() {
            if row.len() != n {
                return Err(DatasetError::InvalidDump(format!(
                    "matrix row {i} has {} cells, expected {n}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                match ch {
                    '0' => cells.push(0),
                    '1' => cells.push(1),
                    other => {
                        return Err(DatasetError::InvalidDump(format!(
                            "matrix row {i} holds '{other}'"
                        )));
                    }
                }
            }
        }
        BinaryFeatureMatrix::new(dump.concepts, dump.features, cells, dump.provenance)
    }
}

/// Target/distractor label of a cell at a given agreement threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Target,
    Distractor,
}

/// Per-cell target/distractor labels at threshold `tau`.
#[derive(Debug, Clone)]
pub struct CellLabelMatrix {
    n_concepts: usize,
    n_features: usize,
    labels: Vec<CellLabel>,
    tau: f64,
}

impl CellLabelMatrix {
    pub fn n_concepts(&self) -> usize {
        self.n_concepts
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn get(&self, c: ConceptId, f: FeatureId) -> CellLabel {
        self.labels[c.0 * self.n_features + f.0]
    }

    pub fn target_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&l| l == CellLabel::Target)
            .count()
    }
}

fn check_tau(tau: f64) -> Result<(), DatasetError> {
    if !(tau > 0.0 && tau <= 1.0) || !tau.is_finite() {
        return Err(DatasetError::InvalidThreshold { tau });
    }
    Ok(())
}

/// A cell meets threshold `tau` when the fraction of affirming raters is
/// at least `tau`.
#[inline]
fn meets_threshold(yes: u32, total: u32, tau: f64) -> bool {
    // yes/total >= tau, compared as yes >= tau*total with a small guard so
    // inexact taus (0.1 * 10 = 1.0000000000000002) don't flip the boundary.
    f64::from(yes) >= tau * f64::from(total) - 1e-12
}

/// Thresholds the human verification counts into a 0/1 matrix. A cell is
/// 1 only when human raters evaluated it and at least a `tau` fraction
/// affirmed; cross-domain (never-verified) cells are always 0.
pub fn binarize_human(
    dataset: &NormDataset,
    tau: f64,
) -> Result<BinaryFeatureMatrix, DatasetError> {
    check_tau(tau)?;
    let total = dataset.rater_total();
    let mut cells = Vec::with_capacity(dataset.n_cells());
    for c in 0..dataset.n_concepts() {
        for f in 0..dataset.n_features() {
            let (c, f) = (ConceptId(c), FeatureId(f));
            let on = dataset.human_verified(c, f)
                && meets_threshold(dataset.rater_yes(c, f), total, tau);
            cells.push(u8::from(on));
        }
    }
    BinaryFeatureMatrix::new(
        dataset.concepts().to_vec(),
        dataset.features().to_vec(),
        cells,
        Provenance::Human { tau },
    )
}

/// Labels every cell Target or Distractor at threshold `tau`. Cross-domain
/// cells carry zero yes votes by construction, so they always label
/// Distractor.
pub fn label_cells(dataset: &NormDataset, tau: f64) -> Result<CellLabelMatrix, DatasetError> {
    check_tau(tau)?;
    let total = dataset.rater_total();
    let mut labels = Vec::with_capacity(dataset.n_cells());
    for c in 0..dataset.n_concepts() {
        for f in 0..dataset.n_features() {
            let (c, f) = (ConceptId(c), FeatureId(f));
            let target = meets_threshold(dataset.rater_yes(c, f), total, tau);
            labels.push(if target {
                CellLabel::Target
            } else {
                CellLabel::Distractor
            });
        }
    }
    Ok(CellLabelMatrix {
        n_concepts: dataset.n_concepts(),
        n_features: dataset.n_features(),
        labels,
        tau,
    })
}
