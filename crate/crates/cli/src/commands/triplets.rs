//! `norms triplets` — generate judgment items, evaluate them against one
//! or more semantic spaces.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};
use norms_core::space::CombineMode;
use norms_core::triplet::{
    attach_votes, generate_triplets, read_triplets_csv, score_agreement, write_report_csv,
    write_triplets_csv,
};

use crate::config::{require_file, require_some, resolve_parsed, resolve_path, FileConfig, Resolved};

#[derive(Subcommand, Debug)]
pub enum TripletsCommand {
    /// Sample triplets per condition from the dataset.
    Generate(GenerateArgs),
    /// Score model predictions against human votes.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Dataset dump from `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output triplet CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Triplets per condition.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Dataset dump from `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Triplet CSV from `triplets generate`.
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// Votes CSV (`triplet_id,votes_a,votes_b`).
    #[arg(long)]
    votes: Option<PathBuf>,
    /// Machine matrix (needed for the machine and combined spaces).
    #[arg(long)]
    machine: Option<PathBuf>,
    /// Comma-separated spaces to evaluate.
    #[arg(long, default_value = "human,machine,combined")]
    spaces: String,
    /// Agreement threshold for the human matrix.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Combined-matrix rule: `patch` (default) or `union`.
    #[arg(long)]
    combine_mode: Option<String>,
    /// Directory for the per-space report CSVs and the long-format table.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(
    command: TripletsCommand,
    config: &FileConfig,
    print_config: bool,
) -> anyhow::Result<()> {
    match command {
        TripletsCommand::Generate(args) => generate(args, config, print_config),
        TripletsCommand::Evaluate(args) => evaluate(args, config, print_config),
    }
}

fn generate(args: GenerateArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
    let dataset_path = require_some(
        resolve_path(args.dataset, config, "dataset"),
        "dataset dump",
        "dataset",
    )?;
    let out = require_some(
        resolve_path(args.out, config, "triplets"),
        "output path",
        "out",
    )?;
    let seed = resolve_parsed(args.seed, config, "seed", 7u64)?;

    let mut resolved = Resolved::default();
    resolved.put("dataset", dataset_path.display());
    resolved.put("out", out.display());
    resolved.put("n", args.n);
    resolved.put("seed", seed);
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    let dataset = super::load_dataset(&dataset_path)?;
    let triplets = generate_triplets(&dataset, args.n, seed)?;
    let writer = super::create_out(&out)?;
    write_triplets_csv(&triplets, &dataset, writer)?;
    println!(
        "wrote {} triplets ({} per condition) to {}",
        triplets.len(),
        args.n,
        out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
    let dataset_path = require_some(
        resolve_path(args.dataset, config, "dataset"),
        "dataset dump",
        "dataset",
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
    let machine_path = resolve_path(args.machine, config, "machine");
    let out_dir = require_some(
        resolve_path(args.out_dir, config, "out_dir"),
        "output directory",
        "out-dir",
    )?;
    let spaces = super::parse_spaces(&args.spaces)?;
    let mode = match args.combine_mode.as_deref().or_else(|| config.get("combine_mode")) {
        None => CombineMode::PatchUnverified,
        Some(raw) => CombineMode::parse(raw)
            .ok_or_else(|| anyhow::anyhow!("unknown combine mode `{raw}`"))?,
    };

    let mut resolved = Resolved::default();
    resolved.put("dataset", dataset_path.display());
    resolved.put("triplets", triplets_path.display());
    resolved.put("votes", votes_path.display());
    resolved.put_opt("machine", machine_path.as_ref().map(|p| p.display()));
    resolved.put("spaces", &args.spaces);
    resolved.put("tau", args.tau);
    resolved.put("combine_mode", format!("{mode:?}"));
    resolved.put("out_dir", out_dir.display());
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    let dataset = super::load_dataset(&dataset_path)?;
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

    let machine = machine_path
        .as_deref()
        .map(super::load_matrix)
        .transpose()?;

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut long = Vec::new();
    for &space in &spaces {
        let distances =
            super::build_space(space, &dataset, args.tau, machine.as_ref(), mode)?;
        let report = score_agreement(&triplets, &distances)?;
        let path = out_dir.join(format!("agreement_{}.csv", space.as_str()));
        write_report_csv(&report, super::create_out(&path)?)?;
        println!("wrote {}", path.display());
        long.extend(super::long_rows(space, &report));
    }
    let long_path = out_dir.join("figure_long.csv");
    super::write_long_format(&long, super::create_out(&long_path)?)?;
    println!("wrote {}", long_path.display());
    Ok(())
}
