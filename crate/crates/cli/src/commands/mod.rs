//! Subcommand implementations.

pub mod ingest;
pub mod report;
pub mod score;
pub mod triplets;
pub mod verify;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use norms_core::space::{combine, cosine_distance_matrix, CombineMode, DistanceMatrix};
use norms_core::triplet::AgreementReport;
use norms_core::{binary::binarize_human, BinaryFeatureMatrix, NormDataset};

pub fn load_dataset(path: &Path) -> anyhow::Result<NormDataset> {
    crate::config::require_file(path, "dataset dump")?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    NormDataset::read_json(BufReader::new(file))
        .with_context(|| format!("reading dataset dump {}", path.display()))
}

pub fn load_matrix(path: &Path) -> anyhow::Result<BinaryFeatureMatrix> {
    crate::config::require_file(path, "matrix")?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    BinaryFeatureMatrix::read_json(BufReader::new(file))
        .with_context(|| format!("reading matrix {}", path.display()))
}

/// Creates the file and hands the caller a buffered writer.
pub fn create_out(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    let file =
        File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// The three semantic spaces the evaluation compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Human,
    Machine,
    Combined,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::Human => "human",
            SpaceKind::Machine => "machine",
            SpaceKind::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<SpaceKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" => Some(SpaceKind::Human),
            "machine" => Some(SpaceKind::Machine),
            "combined" => Some(SpaceKind::Combined),
            _ => None,
        }
    }
}

pub fn parse_spaces(raw: &str) -> anyhow::Result<Vec<SpaceKind>> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let kind = SpaceKind::parse(part)
            .ok_or_else(|| anyhow::anyhow!("unknown space `{part}`; expected human, machine, or combined"))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        anyhow::bail!("no spaces requested");
    }
    Ok(out)
}

/// Builds the distance matrix for one space. The machine matrix is only
/// required for the machine and combined spaces.
pub fn build_space(
    kind: SpaceKind,
    dataset: &NormDataset,
    tau: f64,
    machine: Option<&BinaryFeatureMatrix>,
    mode: CombineMode,
) -> anyhow::Result<DistanceMatrix> {
    let need_machine = || {
        machine.ok_or_else(|| {
            anyhow::anyhow!(
                "space `{}` needs a machine matrix (--machine)",
                kind.as_str()
            )
        })
    };
    let matrix = match kind {
        SpaceKind::Human => binarize_human(dataset, tau)?,
        SpaceKind::Machine => need_machine()?.clone(),
        SpaceKind::Combined => {
            let human = binarize_human(dataset, tau)?;
            combine(dataset, &human, need_machine()?, mode)?
        }
    };
    Ok(cosine_distance_matrix(&matrix)?)
}

/// One row of the plot-ready long-format table.
pub struct LongRow {
    pub space: SpaceKind,
    pub condition: &'static str,
    pub n: usize,
    pub agreement: f64,
    pub human_consistency: f64,
}

pub fn long_rows(space: SpaceKind, report: &AgreementReport) -> Vec<LongRow> {
    report
        .per_condition
        .iter()
        .map(|s| LongRow {
            space,
            condition: s.condition.as_str(),
            n: s.n_scored,
            agreement: s.agreement,
            human_consistency: s.human_consistency,
        })
        .collect()
}

/// Writes the long-format table
/// `space,condition,n,agreement,human_consistency`.
pub fn write_long_format<W: Write>(rows: &[LongRow], writer: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["space", "condition", "n", "agreement", "human_consistency"])?;
    for row in rows {
        w.write_record([
            row.space.as_str().to_string(),
            row.condition.to_string(),
            row.n.to_string(),
            norms_core::triplet::format_agreement(row.agreement),
            format!("{:.6}", row.human_consistency),
        ])?;
    }
    w.flush()?;
    Ok(())
}
