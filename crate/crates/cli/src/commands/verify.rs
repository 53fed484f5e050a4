//! `norms verify` — answer the probe plan, write the machine matrix and a
//! run log.

use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::Args;
use norms_core::binary::binarize_human;
use norms_core::probe::{
    build_probe_plan, run_verification, AnswerCache, AnswerSource, HttpOracle, MockOracle,
    PlanScope, PromptTemplate, RetryPolicy, UnparseablePolicy, VerificationRun, VerifyOptions,
};

use crate::config::{
    require_file, require_some, resolve_parsed, resolve_path, resolve_string, FileConfig, Resolved,
};
use crate::OracleArgs;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Dataset dump from `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output path for the machine matrix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe scope: all (default), within, or cross.
    #[arg(long)]
    scope: Option<String>,
    /// Prompt template file; the built-in template is used when absent.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Answer cache path (default: `<out>.cache.jsonl`).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Run log path (default: `<out>.log.json`).
    #[arg(long)]
    run_log: Option<PathBuf>,
    /// Seed for mock noise.
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum in-flight oracle requests.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Unparseable answer policy: `zero` (default) or `fail`.
    #[arg(long)]
    unparseable: Option<String>,
    /// Retry budget for transport errors.
    #[arg(long)]
    retries: Option<u32>,
    /// Base backoff in milliseconds between retries.
    #[arg(long)]
    backoff_ms: Option<u64>,
    /// Token budget per generation.
    #[arg(long)]
    max_new_tokens: Option<u32>,
    #[command(flatten)]
    oracle: OracleArgs,
}

pub fn run(args: VerifyArgs, config: &FileConfig, print_config: bool) -> anyhow::Result<()> {
    let dataset_path = require_some(
        resolve_path(args.dataset, config, "dataset"),
        "dataset dump",
        "dataset",
    )?;
    let out = require_some(resolve_path(args.out, config, "machine"), "output path", "out")?;
    let scope_raw = args
        .scope
        .or_else(|| config.get("scope").map(str::to_string))
        .unwrap_or_else(|| "all".to_string());
    let scope = PlanScope::parse(&scope_raw)
        .ok_or_else(|| anyhow::anyhow!("unknown probe scope `{scope_raw}`"))?;
    let template_path = resolve_path(args.template, config, "template");
    let cache_path = resolve_path(args.cache, config, "cache")
        .unwrap_or_else(|| out.with_extension("cache.jsonl"));
    let run_log = args
        .run_log
        .unwrap_or_else(|| out.with_extension("log.json"));
    let seed = resolve_parsed(args.seed, config, "seed", 7u64)?;
    let concurrency = resolve_parsed(args.concurrency, config, "concurrency", 8usize)?;
    if concurrency == 0 {
        anyhow::bail!("concurrency must be at least 1");
    }
    let unparseable_raw = args
        .unparseable
        .or_else(|| config.get("unparseable").map(str::to_string))
        .unwrap_or_else(|| "zero".to_string());
    let policy = UnparseablePolicy::parse(&unparseable_raw)
        .ok_or_else(|| anyhow::anyhow!("unknown unparseable policy `{unparseable_raw}`"))?;
    let retries = resolve_parsed(args.retries, config, "retries", 3u32)?;
    let backoff_ms = resolve_parsed(args.backoff_ms, config, "backoff_ms", 500u64)?;
    let max_new_tokens = resolve_parsed(args.max_new_tokens, config, "max_new_tokens", 5u32)?;
    let endpoint = resolve_string(args.oracle.endpoint, config, "endpoint", Some("ORACLE_URL"));
    let token = resolve_string(args.oracle.token, config, "token", Some("ORACLE_TOKEN"));

    let mut resolved = Resolved::default();
    resolved.put("dataset", dataset_path.display());
    resolved.put("out", out.display());
    resolved.put("scope", scope.as_str());
    resolved.put_opt("template", template_path.as_ref().map(|p| p.display()));
    resolved.put("cache", cache_path.display());
    resolved.put("run_log", run_log.display());
    resolved.put("seed", seed);
    resolved.put("concurrency", concurrency);
    resolved.put("unparseable", &unparseable_raw);
    resolved.put("retries", retries);
    resolved.put("backoff_ms", backoff_ms);
    resolved.put("max_new_tokens", max_new_tokens);
    resolved.put("mock", args.oracle.mock);
    resolved.put("p_miss", args.oracle.p_miss);
    resolved.put("p_fa", args.oracle.p_fa);
    resolved.put("mock_tau", args.oracle.mock_tau);
    resolved.put_opt("endpoint", endpoint.as_deref());
    resolved.put("token", if token.is_some() { "<set>" } else { "<unset>" });
    if resolved.print_and_stop(print_config) {
        return Ok(());
    }

    let dataset = super::load_dataset(&dataset_path)?;
    let template = match &template_path {
        Some(path) => {
            require_file(path, "template")?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading template {}", path.display()))?;
            PromptTemplate::from_text(&text)?
        }
        None => PromptTemplate::stock(),
    };
    let plan = build_probe_plan(&dataset, scope)?;

    let oracle: Box<dyn AnswerSource> = if args.oracle.mock {
        let truth = binarize_human(&dataset, args.oracle.mock_tau)?;
        Box::new(MockOracle::new(
            truth,
            args.oracle.p_miss,
            args.oracle.p_fa,
            seed,
        )?)
    } else {
        let endpoint = require_some(endpoint, "oracle endpoint", "endpoint")?;
        Box::new(
            HttpOracle::new(endpoint, token)
                .with_retry(RetryPolicy {
                    max_retries: retries,
                    base_backoff: Duration::from_millis(backoff_ms),
                })
                .with_max_new_tokens(max_new_tokens),
        )
    };

    let mut cache = AnswerCache::open(&cache_path)?;
    let run = run_verification(
        &dataset,
        &template,
        &plan,
        oracle.as_ref(),
        &mut cache,
        VerifyOptions {
            concurrency,
            policy,
        },
    )?;

    let writer = super::create_out(&out)?;
    run.matrix.write_json(writer)?;
    write_run_log(&run, scope, &run_log)?;

    println!(
        "plan {} probes | yes {} | no {} | unparseable {} | oracle calls {} | cache hits {}",
        run.plan_size, run.yes, run.no, run.unparseable, run.oracle_calls, run.cache_hits
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn write_run_log(
    run: &VerificationRun,
    scope: PlanScope,
    path: &std::path::Path,
) -> anyhow::Result<()> {
    let log = serde_json::json!({
        "scope": scope.as_str(),
        "plan_size": run.plan_size,
        "yes": run.yes,
        "no": run.no,
        "unparseable": run.unparseable,
        "oracle_calls": run.oracle_calls,
        "cache_hits": run.cache_hits,
    });
    let writer = super::create_out(path)?;
    serde_json::to_writer_pretty(writer, &log)?;
    Ok(())
}
