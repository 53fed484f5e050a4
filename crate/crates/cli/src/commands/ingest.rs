//! `norms ingest` — CSVs in, canonical JSON dump out.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use norms_core::dataset::{load_norms, CoveragePolicy, LoadOptions};

use crate::config::{require_file, require_some, resolve_path, FileConfig, Resolved};

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Concepts CSV (`name,domain,category`).
    #[arg(long)]
    concepts: Option<PathBuf>,
    /// Cells CSV (`concept,feature,feature_domain,raters_yes,raters_total`).
    #[arg(long)]
    cells: Option<PathBuf>,
    /// Output path for the dataset dump.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coverage rule for unlisted within-domain cells: `all-within`
    /// (default) or `listed-only`.
    #[arg(long)]
    coverage: Option<String>,
}

pub fn run(args: IngestArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
    let concepts = require_some(
        resolve_path(args.concepts, config, "concepts"),
        "concepts CSV",
        "concepts",
    )?;
    let cells = require_some(resolve_path(args.cells, config, "cells"), "cells CSV", "cells")?;
    let out = require_some(resolve_path(args.out, config, "dataset"), "output path", "out")?;
    let coverage = match args
        .coverage
        .as_deref()
        .or_else(|| config.get("coverage"))
        .unwrap_or("all-within")
    {
        "all-within" => CoveragePolicy::AllWithinDomain,
        "listed-only" => CoveragePolicy::ListedOnly,
        other => anyhow::bail!("unknown coverage rule `{other}`"),
    };

    let mut resolved = Resolved::default();
    resolved.put("concepts", concepts.display());
    resolved.put("cells", cells.display());
    resolved.put("out", out.display());
    resolved.put("coverage", format!("{coverage:?}"));
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    require_file(&concepts, "concepts")?;
    require_file(&cells, "cells")?;

    let concepts_reader = BufReader::new(
        File::open(&concepts).with_context(|| format!("opening {}", concepts.display()))?,
    );
    let cells_reader = BufReader::new(
        File::open(&cells).with_context(|| format!("opening {}", cells.display()))?,
    );
    let dataset = load_norms(concepts_reader, cells_reader, LoadOptions { coverage })?;

    let writer = super::create_out(&out)?;
    dataset.write_json(writer)?;

    let verified = (0..dataset.n_concepts())
        .flat_map(|c| (0..dataset.n_features()).map(move |f| (c, f)))
        .filter(|&(c, f)| {
            dataset.human_verified(
                norms_core::ConceptId(c),
                norms_core::FeatureId(f),
            )
        })
        .count();
    println!(
        "ingested {} concepts x {} features ({} cells, {} human-verified)",
        dataset.n_concepts(),
        dataset.n_features(),
        dataset.n_cells(),
        verified
    );
    let collisions = dataset.feature_name_collisions();
    if !collisions.is_empty() {
        println!(
            "note: {} feature name(s) occur in both domains: {}",
            collisions.len(),
            collisions.join(", ")
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
