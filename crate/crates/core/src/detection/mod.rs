//! Signal-detection scoring of a machine matrix against human labels.
//!
//! Every machine cell is classified against the human target/distractor
//! labels as a hit, miss, false alarm, or correct rejection. Hit and
//! false-alarm rates convert to d' = z(HR) - z(FAR), where z is the
//! standard-normal quantile.

mod probit;

use std::io;

use crate::binary::{BinaryFeatureMatrix, CellLabel, CellLabelMatrix};
use crate::dataset::{ConceptId, DatasetError, Domain, Feature, FeatureId, NormDataset};

pub use probit::probit;

/// Default thresholds for the inter-rater agreement sweep: one, two,
/// three, or all four of four raters.
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.25, 0.50, 0.75, 1.00];

#[derive(Debug, thiserror::Error)]
pub enum DetectionError {
    #[error("probability {p} outside the open interval (0, 1)")]
    DomainError { p: f64 },
    #[error("no target cells in scope; hit rate is undefined")]
    NoTargets,
    #[error("no distractor cells in scope; false-alarm rate is undefined")]
    NoDistractors,
    #[error("dimension mismatch: machine is {machine_rows}x{machine_cols}, labels are {label_rows}x{label_cols}")]
    DimensionMismatch {
        machine_rows: usize,
        machine_cols: usize,
        label_rows: usize,
        label_cols: usize,
    },
    #[error("matrices disagree on concept or feature inventories")]
    InventoryMismatch,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Which block of the matrix a score covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Every cell, including cross-domain cells (all distractors).
    Whole,
    /// Animal concepts crossed with animal-generated features.
    AnimalsOnly,
    /// Artifact concepts crossed with artifact-generated features.
    ArtifactsOnly,
    /// Both within-domain blocks; cross-domain cells excluded.
    WithinDomains,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Whole => "whole",
            Scope::AnimalsOnly => "animals",
            Scope::ArtifactsOnly => "artifacts",
            Scope::WithinDomains => "within",
        }
    }

    pub fn parse(s: &str) -> Option<Scope> {
        match s.trim().to_ascii_lowercase().as_str() {
            "whole" | "all" => Some(Scope::Whole),
            "animals" => Some(Scope::AnimalsOnly),
            "artifacts" => Some(Scope::ArtifactsOnly),
            "within" => Some(Scope::WithinDomains),
            _ => None,
        }
    }

    fn includes(self, concept_domain: Domain, feature_domain: Domain) -> bool {
        match self {
            Scope::Whole => true,
            Scope::AnimalsOnly => {
                concept_domain == Domain::Animal && feature_domain == Domain::Animal
            }
            Scope::ArtifactsOnly => {
                concept_domain == Domain::Artifact && feature_domain == Domain::Artifact
            }
            Scope::WithinDomains => concept_domain == feature_domain,
        }
    }
}

/// Raw hit/miss/false-alarm/correct-rejection counts for one scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionTally {
    pub hits: usize,
    pub misses: usize,
    pub false_alarms: usize,
    pub correct_rejections: usize,
    pub scope: Scope,
}

impl DetectionTally {
    pub fn targets(&self) -> usize {
        self.hits + self.misses
    }

    pub fn distractors(&self) -> usize {
        self.false_alarms + self.correct_rejections
    }

    pub fn total(&self) -> usize {
        self.targets() + self.distractors()
    }
}

/// How to handle hit/false-alarm rates that land exactly on 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateCorrection {
    /// Replace 0 with 1/(2N) and 1 with 1 - 1/(2N), N the trial count of
    /// that class. Keeps d' finite.
    #[default]
    LogLinear,
    /// Leave rates as-is; degenerate rates make d' undefined.
    None,
}

impl RateCorrection {
    pub fn parse(s: &str) -> Option<RateCorrection> {
        match s.trim().to_ascii_lowercase().as_str() {
            "loglinear" | "log-linear" => Some(RateCorrection::LogLinear),
            "none" => Some(RateCorrection::None),
            _ => None,
        }
    }
}

/// Hit and false-alarm rates after any boundary correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedRates {
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
    pub hr_corrected: bool,
    pub far_corrected: bool,
}

/// Full score for one scope and threshold: the tally, the (possibly
/// corrected) rates that fed d', and d' itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionScore {
    pub tally: DetectionTally,
    pub tau: f64,
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
    pub d_prime: f64,
    pub hr_corrected: bool,
    pub far_corrected: bool,
}

/// Classifies every in-scope machine cell against the human labels.
pub fn tally(
    machine: &BinaryFeatureMatrix,
    labels: &CellLabelMatrix,
    scope: Scope,
) -> Result<DetectionTally, DetectionError> {
    if machine.n_concepts() != labels.n_concepts() || machine.n_features() != labels.n_features() {
        return Err(DetectionError::DimensionMismatch {
            machine_rows: machine.n_concepts(),
            machine_cols: machine.n_features(),
            label_rows: labels.n_concepts(),
            label_cols: labels.n_features(),
        });
    }
    let mut t = DetectionTally {
        hits: 0,
        misses: 0,
        false_alarms: 0,
        correct_rejections: 0,
        scope,
    };
    for (ci, concept) in machine.concepts().iter().enumerate() {
        for (fi, feature) in machine.features().iter().enumerate() {
            if !scope.includes(concept.domain, feature.source_domain) {
                continue;
            }
            let (c, f) = (ConceptId(ci), FeatureId(fi));
            let asserted = machine.get(c, f) == 1;
            match (labels.get(c, f), asserted) {
                (CellLabel::Target, true) => t.hits += 1,
                (CellLabel::Target, false) => t.misses += 1,
                (CellLabel::Distractor, true) => t.false_alarms += 1,
                (CellLabel::Distractor, false) => t.correct_rejections += 1,
            }
        }
    }
    Ok(t)
}

/// HR = hits/(hits+misses), FAR = FAs/(FAs+CRs), with boundary values
/// adjusted per the correction policy and flagged.
pub fn rates(
    tally: &DetectionTally,
    correction: RateCorrection,
) -> Result<CorrectedRates, DetectionError> {
    let n_t = tally.targets();
    let n_d = tally.distractors();
    if n_t == 0 {
        return Err(DetectionError::NoTargets);
    }
    if n_d == 0 {
        return Err(DetectionError::NoDistractors);
    }
    let correct = |count: usize, n: usize| -> (f64, bool) {
        let rate = count as f64 / n as f64;
        match correction {
            RateCorrection::LogLinear if count == 0 => (1.0 / (2.0 * n as f64), true),
            RateCorrection::LogLinear if count == n => (1.0 - 1.0 / (2.0 * n as f64), true),
            _ => (rate, false),
        }
    };
    let (hit_rate, hr_corrected) = correct(tally.hits, n_t);
    let (false_alarm_rate, far_corrected) = correct(tally.false_alarms, n_d);
    Ok(CorrectedRates {
        hit_rate,
        false_alarm_rate,
        hr_corrected,
        far_corrected,
    })
}

/// d' = z(HR) - z(FAR). Both rates must lie strictly inside (0, 1).
pub fn dprime(hit_rate: f64, false_alarm_rate: f64) -> Result<f64, DetectionError> {
    Ok(probit(hit_rate)? - probit(false_alarm_rate)?)
}

/// Labels the dataset at `tau`, tallies the machine matrix in `scope`,
/// and converts to rates and d'.
pub fn score_scope(
    dataset: &NormDataset,
    machine: &BinaryFeatureMatrix,
    tau: f64,
    scope: Scope,
    correction: RateCorrection,
) -> Result<DetectionScore, DetectionError> {
    if !machine.matches_dataset(dataset) {
        return Err(DetectionError::InventoryMismatch);
    }
    let labels = crate::binary::label_cells(dataset, tau)?;
    let t = tally(machine, &labels, scope)?;
    let r = rates(&t, correction)?;
    let d = dprime(r.hit_rate, r.false_alarm_rate)?;
    Ok(DetectionScore {
        tally: t,
        tau,
        hit_rate: r.hit_rate,
        false_alarm_rate: r.false_alarm_rate,
        d_prime: d,
        hr_corrected: r.hr_corrected,
        far_corrected: r.far_corrected,
    })
}

/// One score per agreement threshold, same machine matrix throughout.
pub fn sensitivity_sweep(
    dataset: &NormDataset,
    machine: &BinaryFeatureMatrix,
    thresholds: &[f64],
    scope: Scope,
    correction: RateCorrection,
) -> Result<Vec<DetectionScore>, DetectionError> {
    thresholds
        .iter()
        .map(|&tau| score_scope(dataset, machine, tau, scope, correction))
        .collect()
}

/// Direction of a human/machine disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisagreementDirection {
    /// Human matrix says 1, machine matrix says 0.
    HumanYesMachineNo,
    /// Machine matrix says 1, human matrix says 0.
    MachineYesHumanNo,
}

/// Per-feature disagreement counts in the stated direction, sorted by
/// count descending with ties broken by feature name (then domain) so the
/// ranking is total. Returns the first `k`.
pub fn top_disagreements(
    human: &BinaryFeatureMatrix,
    machine: &BinaryFeatureMatrix,
    k: usize,
    direction: DisagreementDirection,
) -> Result<Vec<(Feature, usize)>, DetectionError> {
    if !human.same_shape(machine) {
        if human.n_concepts() != machine.n_concepts() || human.n_features() != machine.n_features()
        {
            return Err(DetectionError::DimensionMismatch {
                machine_rows: machine.n_concepts(),
                machine_cols: machine.n_features(),
                label_rows: human.n_concepts(),
                label_cols: human.n_features(),
            });
        }
        return Err(DetectionError::InventoryMismatch);
    }
    let mut counts = vec![0usize; human.n_features()];
    for c in 0..human.n_concepts() {
        for f in 0..human.n_features() {
            let (c, f) = (ConceptId(c), FeatureId(f));
            let (h, m) = (human.get(c, f), machine.get(c, f));
            let disagrees = match direction {
                DisagreementDirection::HumanYesMachineNo => h == 1 && m == 0,
                DisagreementDirection::MachineYesHumanNo => m == 1 && h == 0,
            };
            if disagrees {
                counts[f.0] += 1;
            }
        }
    }
    let mut ranked: Vec<(Feature, usize)> = human
        .features()
        .iter()
        .cloned()
        .zip(counts)
        .collect();
    ranked.sort_by(|(fa, ca), (fb, cb)| {
        cb.cmp(ca)
            .then_with(|| fa.name.cmp(&fb.name))
            .then_with(|| fa.source_domain.as_str().cmp(fb.source_domain.as_str()))
    });
    ranked.truncate(k);
    Ok(ranked)
}

/// Writes scores as CSV with the columns
/// `scope,tau,hits,misses,fas,crs,hr,far,dprime,corrected`.
pub fn write_scores_csv<W: io::Write>(
    scores: &[DetectionScore],
    writer: W,
) -> Result<(), io::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "scope", "tau", "hits", "misses", "fas", "crs", "hr", "far", "dprime", "corrected",
    ])?;
    for s in scores {
        w.write_record([
            s.tally.scope.as_str().to_string(),
            format!("{:.2}", s.tau),
            s.tally.hits.to_string(),
            s.tally.misses.to_string(),
            s.tally.false_alarms.to_string(),
            s.tally.correct_rejections.to_string(),
            format!("{:.6}", s.hit_rate),
            format!("{:.6}", s.false_alarm_rate),
            format!("{:.6}", s.d_prime),
            corrected_tag(s).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn corrected_tag(s: &DetectionScore) -> &'static str {
    match (s.hr_corrected, s.far_corrected) {
        (false, false) => "none",
        (true, false) => "hr",
        (false, true) => "far",
        (true, true) => "hr+far",
    }
}

/// Renders a sweep as a markdown table shaped like the published
/// sensitivity tables.
pub fn sweep_markdown(scores: &[DetectionScore]) -> String {
    let mut out = String::from(
        "| Inter-rater agreement | d' | hit-rate | false-alarm rate |\n|---|---|---|---|\n",
    );
    for s in scores {
        out.push_str(&format!(
            "| {:.0}% | {:.2} | {:.2} | {:.2} |\n",
            s.tau * 100.0,
            s.d_prime,
            s.hit_rate,
            s.false_alarm_rate
        ));
    }
    out
}
