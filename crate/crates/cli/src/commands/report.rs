//! `norms report` — the plot-ready long-format table over all three
//! spaces (6 conditions x human/machine/combined, plus the human
//! consistency column).

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use norms_core::space::CombineMode;
use norms_core::triplet::{attach_votes, read_triplets_csv, score_agreement};

use crate::commands::SpaceKind;
use crate::config::{require_file, require_some, resolve_path, FileConfig, Resolved};

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Dataset dump from `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Machine matrix from `verify`.
    #[arg(long)]
    machine: Option<PathBuf>,
    /// Triplet CSV from `triplets generate`.
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// Votes CSV.
    #[arg(long)]
    votes: Option<PathBuf>,
    /// Agreement threshold for the human matrix.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Combined-matrix rule: `patch` (default) or `union`.
    #[arg(long)]
    combine_mode: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: ReportArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
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
    let triplets_path = require_some(
        resolve_path(args.triplets, config, "triplets"),
        "triplet CSV",
        "triplets",
    )?;
    let votes_path = require_some(
        resolve_path(args.votes, config, "votes"),
        "votes CSV",
        "votes",
    )?;
    let out = require_some(resolve_path(args.out, config, "report"), "output path", "out")?;
    let mode = match args.combine_mode.as_deref().or_else(|| config.get("combine_mode")) {
        None => CombineMode::PatchUnverified,
        Some(raw) => CombineMode::parse(raw)
            .ok_or_else(|| anyhow::anyhow!("unknown combine mode `{raw}`"))?,
    };

    let mut resolved = Resolved::default();
    resolved.put("dataset", dataset_path.display());
    resolved.put("machine", machine_path.display());
    resolved.put("triplets", triplets_path.display());
    resolved.put("votes", votes_path.display());
    resolved.put("tau", args.tau);
    resolved.put("combine_mode", format!("{mode:?}"));
    resolved.put("out", out.display());
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    let dataset = super::load_dataset(&dataset_path)?;
    let machine = super::load_matrix(&machine_path)?;
    require_file(&triplets_path, "triplets")?;
    require_file(&votes_path, "votes")?;
    let mut triplets = {
        let reader = BufReader::new(
            File::open(&triplets_path)
                .with_context(|| format!("opening {}", triplets_path.display()))?,
        );
        read_triplets_csv(reader, &dataset)?
    };
    {
        let reader = BufReader::new(
            File::open(&votes_path)
                .with_context(|| format!("opening {}", votes_path.display()))?,
        );
        attach_votes(&mut triplets, reader)?;
    }

    let mut long = Vec::new();
    for space in [SpaceKind::Human, SpaceKind::Machine, SpaceKind::Combined] {
        let distances = super::build_space(space, &dataset, args.tau, Some(&machine), mode)?;
        let report = score_agreement(&triplets, &distances)?;
        long.extend(super::long_rows(space, &report));
    }
    super::write_long_format(&long, super::create_out(&out)?)?;
    println!("wrote {} rows to {}", long.len(), out.display());
    Ok(())
}
