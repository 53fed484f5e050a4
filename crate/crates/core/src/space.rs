//! Cosine-distance spaces over concepts and the combined human+machine
//! matrix.

use std::collections::HashMap;
use std::io;

use crate::binary::{BinaryFeatureMatrix, Provenance};
use crate::dataset::{ConceptId, FeatureId, NormDataset};

#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error("concept '{concept}' has an all-zero feature row; cosine distance is undefined")]
    ZeroVector { concept: String },
    #[error("matrices disagree on shape or inventories")]
    DimensionMismatch,
    #[error("distance matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("distance matrix violates {what} at ({i}, {j}): {value}")]
    InvalidValues {
        what: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("unknown concept '{name}'")]
    UnknownConcept { name: String },
}

/// Symmetric concept-by-concept distance matrix with a zero diagonal and
/// entries in [0, 1].
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    names: Vec<String>,
    values: Vec<f64>,
    index: HashMap<String, usize>,
}

impl DistanceMatrix {
    /// Builds a matrix from raw values, enforcing the shape, symmetry,
    /// zero-diagonal, and range invariants.
    pub fn from_values(names: Vec<String>, values: Vec<f64>) -> Result<Self, SpaceError> {
        let n = names.len();
        if values.len() != n * n {
            return Err(SpaceError::NotSquare {
                rows: n,
                cols: values.len().checked_div(n).unwrap_or(0),
            });
        }
        for i in 0..n {
            let d = values[i * n + i];
            if d != 0.0 {
                return Err(SpaceError::InvalidValues {
                    what: "zero diagonal",
                    i,
                    j: i,
                    value: d,
                });
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(SpaceError::InvalidValues {
                        what: "range [0, 1]",
                        i,
                        j,
                        value: v,
                    });
                }
                let diff = (v - values[j * n + i]).abs();
                if diff > 1e-12 {
                    return Err(SpaceError::InvalidValues {
                        what: "symmetry",
                        i,
                        j,
                        value: diff,
                    });
                }
            }
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Ok(DistanceMatrix {
            names,
            values,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.names.len() + j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn by_name(&self, a: &str, b: &str) -> Result<f64, SpaceError> {
        let i = self.index_of(a).ok_or_else(|| SpaceError::UnknownConcept {
            name: a.to_string(),
        })?;
        let j = self.index_of(b).ok_or_else(|| SpaceError::UnknownConcept {
            name: b.to_string(),
        })?;
        Ok(self.get(i, j))
    }

    /// Square CSV: header row of concept names, one row per concept.
    pub fn write_square_csv<W: io::Write>(&self, writer: W) -> Result<(), io::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["concept".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in self.names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend((0..self.names.len()).map(|j| format!("{:.12}", self.get(i, j))));
            w.write_record(&row)?;
        }
        w.flush()
    }

    /// Long-format CSV `concept_a,concept_b,distance`, upper triangle only.
    pub fn write_long_csv<W: io::Write>(&self, writer: W) -> Result<(), io::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["concept_a", "concept_b", "distance"])?;
        for i in 0..self.names.len() {
            for j in (i + 1)..self.names.len() {
                w.write_record([
                    self.names[i].clone(),
                    self.names[j].clone(),
                    format!("{:.12}", self.get(i, j)),
                ])?;
            }
        }
        w.flush()
    }
}

/// Rows packed into u64 words for popcount-based dot products.
struct PackedRows {
    words_per_row: usize,
    words: Vec<u64>,
    ones: Vec<u32>,
}

fn pack_rows(matrix: &BinaryFeatureMatrix) -> PackedRows {
    let n_f = matrix.n_features();
    let words_per_row = n_f.div_ceil(64);
    let n_c = matrix.n_concepts();
    let mut words = vec![0u64; n_c * words_per_row];
    let mut ones = vec![0u32; n_c];
    for c in 0..n_c {
        let row = matrix.row(ConceptId(c));
        for (f, &v) in row.iter().enumerate() {
            if v == 1 {
                words[c * words_per_row + f / 64] |= 1u64 << (f % 64);
                ones[c] += 1;
            }
        }
    }
    PackedRows {
        words_per_row,
        words,
        ones,
    }
}

/// Cosine distances between all concept rows: 1 - (r_i . r_j)/(|r_i||r_j|).
/// For 0/1 rows the dot product is the size of the feature intersection
/// and each norm is the square root of the row's popcount.
pub fn cosine_distance_matrix(matrix: &BinaryFeatureMatrix) -> Result<DistanceMatrix, SpaceError> {
    let packed = pack_rows(matrix);
    let n = matrix.n_concepts();
    for c in 0..n {
        if packed.ones[c] == 0 {
            return Err(SpaceError::ZeroVector {
                concept: matrix.concepts()[c].name.clone(),
            });
        }
    }
    let mut values = vec![0.0f64; n * n];
    let wpr = packed.words_per_row;
    for i in 0..n {
        let row_i = &packed.words[i * wpr..(i + 1) * wpr];
        for j in (i + 1)..n {
            let row_j = &packed.words[j * wpr..(j + 1) * wpr];
            let mut inter = 0u32;
            for (a, b) in row_i.iter().zip(row_j) {
                inter += (a & b).count_ones();
            }
            // sqrt of the integer product keeps identical rows at exactly 0
            let norm = (f64::from(packed.ones[i]) * f64::from(packed.ones[j])).sqrt();
            let d = (1.0 - f64::from(inter) / norm).clamp(0.0, 1.0);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let names = matrix
        .concepts()
        .iter()
        .map(|c| c.name.clone())
        .collect();
    DistanceMatrix::from_values(names, values)
}

/// How the combined matrix treats human-verified cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombineMode {
    /// Human values on verified cells, machine values on unverified cells.
    #[default]
    PatchUnverified,
    /// Cell = human OR machine everywhere (sensitivity variant).
    Union,
}

impl CombineMode {
    pub fn parse(s: &str) -> Option<CombineMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "patch" | "patch-unverified" => Some(CombineMode::PatchUnverified),
            "union" => Some(CombineMode::Union),
            _ => None,
        }
    }
}

/// Builds the combined matrix: human answers wherever raters actually
/// looked, machine answers on the never-verified (cross-domain) cells.
pub fn combine(
    dataset: &NormDataset,
    human: &BinaryFeatureMatrix,
    machine: &BinaryFeatureMatrix,
    mode: CombineMode,
) -> Result<BinaryFeatureMatrix, SpaceError> {
    if !human.matches_dataset(dataset) || !machine.matches_dataset(dataset) {
        return Err(SpaceError::DimensionMismatch);
    }
    let mut cells = Vec::with_capacity(dataset.n_cells());
    for c in 0..dataset.n_concepts() {
        for f in 0..dataset.n_features() {
            let (c, f) = (ConceptId(c), FeatureId(f));
            let v = match mode {
                CombineMode::PatchUnverified => {
                    if dataset.human_verified(c, f) {
                        human.get(c, f)
                    } else {
                        machine.get(c, f)
                    }
                }
                CombineMode::Union => human.get(c, f) | machine.get(c, f),
            };
            cells.push(v);
        }
    }
    BinaryFeatureMatrix::new(
        dataset.concepts().to_vec(),
        dataset.features().to_vec(),
        cells,
        Provenance::Combined,
    )
    .map_err(|_| SpaceError::DimensionMismatch)
}
