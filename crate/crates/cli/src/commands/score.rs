//! `norms score` — signal-detection scores, the sensitivity sweep, and
//! disagreement rankings.

use std::path::{Path, PathBuf};

use clap::Args;
use norms_core::detection::{
    score_scope, sweep_markdown, top_disagreements, write_scores_csv, DetectionScore,
    DisagreementDirection, RateCorrection, Scope, DEFAULT_THRESHOLDS,
};
use norms_core::binary::binarize_human;

use crate::config::{require_some, resolve_parsed, resolve_path, FileConfig, Resolved};

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Dataset dump from `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Machine matrix from `verify`.
    #[arg(long)]
    machine: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scopes to score: whole, animals, artifacts, within (repeatable).
    #[arg(long = "scope")]
    scopes: Vec<String>,
    /// Agreement thresholds to score (repeatable).
    #[arg(long = "tau")]
    taus: Vec<f64>,
    /// Run the inter-rater agreement sweep (both domains, default
    /// thresholds).
    #[arg(long)]
    sweep: bool,
    /// Rate correction: loglinear (default) or none.
    #[arg(long)]
    correction: Option<String>,
    /// Also rank the top-K disagreeing features per direction.
    #[arg(long)]
    disagreements: Option<usize>,
    /// Threshold for the human matrix used in disagreement ranking.
    #[arg(long, default_value_t = 1.0)]
    disagreement_tau: f64,
    /// Also render the sweep as a markdown table at this path.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

pub fn run(args: ScoreArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
    let dataset_path = require_some(
        resolve_path(args.dataset, config, "dataset"),
        "dataset dump",
        "dataset",
    )?;
    let machine_path = require_some(
        resolve_path(args.machine, config, "machine"),
        "machine matrix",
        "machine",
    )?;
    let out = require_some(resolve_path(args.out, config, "scores"), "output path", "out")?;
    let correction_raw = args
        .correction
        .or_else(|| config.get("correction").map(str::to_string))
        .unwrap_or_else(|| "loglinear".to_string());
    let correction = RateCorrection::parse(&correction_raw)
        .ok_or_else(|| anyhow::anyhow!("unknown correction policy `{correction_raw}`"))?;

    let scope_strings = if !args.scopes.is_empty() {
        args.scopes.clone()
    } else if let Some(raw) = config.get("scopes") {
        raw.split(',').map(str::to_string).collect()
    } else if args.sweep {
        vec!["animals".to_string(), "artifacts".to_string()]
    } else {
        vec!["whole".to_string()]
    };
    let mut scopes = Vec::new();
    for raw in &scope_strings {
        scopes.push(
            Scope::parse(raw).ok_or_else(|| anyhow::anyhow!("unknown scope `{raw}`"))?,
        );
    }
    let taus: Vec<f64> = if args.sweep {
        DEFAULT_THRESHOLDS.to_vec()
    } else if !args.taus.is_empty() {
        args.taus.clone()
    } else if let Some(raw) = config.get("thresholds") {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| anyhow::anyhow!("bad threshold `{s}` in config"))
            })
            .collect::<anyhow::Result<_>>()?
    } else {
        vec![1.0]
    };

    let mut resolved = Resolved::default();
    resolved.put("dataset", dataset_path.display());
    resolved.put("machine", machine_path.display());
    resolved.put("out", out.display());
    resolved.put("scopes", scope_strings.join(","));
    resolved.put(
        "taus",
        taus.iter()
            .map(|t| format!("{t}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    resolved.put("sweep", args.sweep);
    resolved.put("correction", &correction_raw);
    resolved.put_opt("disagreements", args.disagreements);
    resolved.put_opt("markdown", args.markdown.as_ref().map(|p| p.display()));
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    let dataset = super::load_dataset(&dataset_path)?;
    let machine = super::load_matrix(&machine_path)?;

    let mut scores: Vec<DetectionScore> = Vec::new();
    for &scope in &scopes {
        for &tau in &taus {
            scores.push(score_scope(&dataset, &machine, tau, scope, correction)?);
        }
    }

    let writer = super::create_out(&out)?;
    write_scores_csv(&scores, writer)?;
    println!("wrote {} score rows to {}", scores.len(), out.display());

    if let Some(markdown_path) = &args.markdown {
        let mut text = String::new();
        for &scope in &scopes {
            let rows: Vec<DetectionScore> = scores
                .iter()
                .filter(|s| s.tally.scope == scope)
                .cloned()
                .collect();
            text.push_str(&format!("### {}\n\n", scope.as_str()));
            text.push_str(&sweep_markdown(&rows));
            text.push('\n');
        }
        let mut w = super::create_out(markdown_path)?;
        use std::io::Write;
        w.write_all(text.as_bytes())?;
        println!("wrote {}", markdown_path.display());
    }

    if let Some(k) = args.disagreements {
        let disagreement_tau = resolve_parsed(
            Some(args.disagreement_tau),
            config,
            "disagreement_tau",
            1.0,
        )?;
        let human = binarize_human(&dataset, disagreement_tau)?;
        for (direction, suffix) in [
            (DisagreementDirection::HumanYesMachineNo, "human_yes"),
            (DisagreementDirection::MachineYesHumanNo, "machine_yes"),
        ] {
            let ranked = top_disagreements(&human, &machine, k, direction)?;
            let path = disagreement_path(&out, suffix);
            let mut w = csv::Writer::from_writer(super::create_out(&path)?);
            w.write_record(["feature", "feature_domain", "count"])?;
            for (feature, count) in &ranked {
                w.write_record([
                    feature.name.as_str(),
                    feature.source_domain.as_str(),
                    &count.to_string(),
                ])?;
            }
            w.flush()?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn disagreement_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scores".to_string());
    out.with_file_name(format!("{stem}.disagreements_{suffix}.csv"))
}
