//! Command-line entry point.
//!
//! Every command that writes an output file also writes a JSON run
//! manifest next to it (`<out>.manifest.json`) recording the resolved
//! flags, input checksums and tool version. Re-running a command with
//! the same inputs and flags reproduces the outputs byte for byte, for
//! any `--workers` setting.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{baseline_scores, BaselineConfig, BaselineMethod};
use crate::eval::{
    extract_cohort, logistic_combine, ndcg_at_k, quantile_labels, scatter_export, spearman_rho,
};
use crate::graph::{load_snapshot, read_account_list, read_meta_map, FollowGraph, MetaTable};
use crate::imitation::{cf_all, write_cf_table, write_explain, FactorSet, NonrecVariant};
use crate::scoring::{
    rank_accounts, ranking_from_scores, read_score_file, resolve_targets, write_ranking,
    Aggregation, EaVariant, ScoreConfig,
};
use crate::synth::{generate, write_edges, write_ground_truth, write_meta, SynthParams};

#[derive(Parser, Debug)]
#[command(
    name = "earlyrank",
    version,
    about = "Ranks new accounts in a follow graph by the early-adopter quality of their followers"
)]
struct Cli {
    /// Worker threads (default: all cores; env EARLYRANK_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank target accounts by estimated future popularity.
    Rank(RankArgs),
    /// Export the expected imitation count table.
    Cf(CfArgs),
    /// Score accounts with one of the comparison methods.
    Baseline(BaselineArgs),
    /// Extract a cohort of recent accounts.
    Cohort(CohortArgs),
    /// Evaluate a ranking against the ground-truth follower counts.
    Eval(EvalArgs),
    /// Generate a synthetic snapshot with planted copy events.
    Synth(SynthArgs),
    /// Combine score tables with cross-validated logistic regression.
    Combine(CombineArgs),
    /// Export score-rank vs gain-rank pairs for external plotting.
    Scatter(ScatterArgs),
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// Score variant: f1-sum, f1-sum-union, f1-g, f2-sum, f2-g.
    #[arg(long)]
    score: String,
    /// Optional factors: none or a comma-set of t,r,s.
    #[arg(long, default_value = "none")]
    factors: String,
    /// Which link of a triangle the reciprocity factor checks:
    /// original, copied, or both.
    #[arg(long, default_value = "original")]
    nonrec_variant: String,
    /// g-index parameter; defaults to the tuned value per variant.
    #[arg(long)]
    gc: Option<f64>,
    /// File with one target account id per line (default: all accounts).
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CfArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, default_value = "none")]
    factors: String,
    #[arg(long, default_value = "original")]
    nonrec_variant: String,
    #[arg(long)]
    out: PathBuf,
    /// Also dump per-edge candidate probabilities (large).
    #[arg(long)]
    explain: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// fw, fw-nr, fr, fr-nr, hits, hits-nr, pr, pr-nr, ad-sum, ad-mean.
    #[arg(long)]
    method: String,
    /// Iterations for hits/pr (defaults: 10 for hits, 100 for pr).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    damping: f64,
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CohortArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// Snapshot time in seconds (default: newest account creation time).
    #[arg(long)]
    snapshot_time: Option<i64>,
    #[arg(long)]
    weeks: u32,
    #[arg(long, default_value_t = 0)]
    min_followers: usize,
    /// Keep only accounts still active at the horizon.
    #[arg(long, default_value_t = false)]
    active_only: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Ranking TSV produced by rank/baseline/combine.
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// spearman or ndcg@K.
    #[arg(long)]
    metric: String,
    /// Method label for the report (default: taken from the ranking
    /// file header).
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value = "-")]
    cohort_label: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n_accounts: u32,
    #[arg(long)]
    n_events: u64,
    #[arg(long, default_value_t = 0.1)]
    adopter_fraction: f64,
    #[arg(long, default_value_t = 0.6)]
    copy_prob_adopter: f64,
    #[arg(long, default_value_t = 0.0)]
    copy_prob_other: f64,
    #[arg(long)]
    horizon_events: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.15)]
    recip_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_prob: f64,
    #[arg(long, default_value_t = 1)]
    copy_window: usize,
    #[arg(long, default_value_t = 0.45)]
    recent_bias: f64,
    /// Events after birth during which an account counts as recent
    /// (default: n_events / 10).
    #[arg(long)]
    recent_window: Option<u64>,
    /// Directory for edges.tsv, meta.tsv, ground_truth.tsv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CombineArgs {
    #[arg(long)]
    meta: PathBuf,
    /// Feature score tables (repeatable). All must cover the same
    /// account set as the first.
    #[arg(long, required = true)]
    features: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Gain quantile above which the training label is positive.
    #[arg(long, default_value_t = 0.5)]
    label_quantile: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScatterArgs {
    /// Ranking or score table with the predicted scores.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data(err: impl std::fmt::Display) -> Self {
        CliError::Data(err.to_string())
    }

    fn usage(err: impl std::fmt::Display) -> Self {
        CliError::Usage(err.to_string())
    }
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: BTreeMap<String, String>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

fn write_manifest(
    manifest_path: &Path,
    command: &'static str,
    args: BTreeMap<String, String>,
    input_paths: &[&Path],
    output_paths: &[&Path],
) -> Result<(), CliError> {
    let mut inputs = BTreeMap::new();
    for p in input_paths {
        inputs.insert(p.display().to_string(), sha256_hex(p)?);
    }
    let manifest = RunManifest {
        tool: "earlyrank",
        version: env!("CARGO_PKG_VERSION"),
        command,
        args,
        inputs,
        outputs: output_paths.iter().map(|p| p.display().to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail");
    std::fs::write(manifest_path, json + "\n")
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn create_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_factors(factors: &str, nonrec_variant: &str) -> Result<FactorSet, CliError> {
    let mut f: FactorSet = factors.parse().map_err(CliError::usage)?;
    f.nonrec_variant = match nonrec_variant {
        "original" => NonrecVariant::OriginalLink,
        "copied" => NonrecVariant::CopiedLink,
        "both" => NonrecVariant::Both,
        other => {
            return Err(CliError::Usage(format!(
                "unknown nonrec variant {other:?} (expected original, copied or both)"
            )))
        }
    };
    Ok(f)
}

fn parse_score(score: &str) -> Result<(EaVariant, Aggregation), CliError> {
    Ok(match score {
        "f1-sum" => (EaVariant::E1, Aggregation::Sum),
        "f1-sum-union" => (EaVariant::E1, Aggregation::SumUnion),
        "f1-g" => (EaVariant::E1, Aggregation::GIndex),
        "f2-sum" => (EaVariant::E2, Aggregation::Sum),
        "f2-g" => (EaVariant::E2, Aggregation::GIndex),
        other => {
            return Err(CliError::Usage(format!(
                "unknown score {other:?} (expected f1-sum, f1-sum-union, f1-g, f2-sum or f2-g)"
            )))
        }
    })
}

fn load(edges: &Path, meta: &Path) -> Result<(FollowGraph, MetaTable), CliError> {
    load_snapshot(edges, meta).map_err(CliError::data)
}

fn select_targets(
    g: &FollowGraph,
    targets: &Option<PathBuf>,
) -> Result<Vec<crate::graph::AccountId>, CliError> {
    match targets {
        Some(path) => {
            let externals = read_account_list(path).map_err(CliError::data)?;
            resolve_targets(g, &externals).map_err(CliError::data)
        }
        None => Ok(g.accounts().collect()),
    }
}

/// Parses the command line and runs it. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                0
            } else {
                eprint!("{e}");
                1
            };
        }
    };

    let workers = cli.workers.or_else(|| {
        std::env::var("EARLYRANK_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return 2;
        }
    };

    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rank(args) => cmd_rank(args),
        Command::Cf(args) => cmd_cf(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Cohort(args) => cmd_cohort(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Combine(args) => cmd_combine(args),
        Command::Scatter(args) => cmd_scatter(args),
    }
}

fn cmd_rank(args: RankArgs) -> Result<(), CliError> {
    let (e_variant, agg) = parse_score(&args.score)?;
    let factors = parse_factors(&args.factors, &args.nonrec_variant)?;
    let mut config = ScoreConfig::new(e_variant, agg, factors);
    if let Some(c) = args.gc {
        config.g_param_c = c;
    }
    config.validate().map_err(CliError::usage)?;

    let (g, _meta) = load(&args.edges, &args.meta)?;
    let targets = select_targets(&g, &args.targets)?;
    let cf = cf_all(&g, &factors);
    let ranking = rank_accounts(&g, &cf, &targets, &config).map_err(CliError::data)?;

    let mut out = create_out(&args.out)?;
    write_ranking(&ranking, &config.label(), &mut out).map_err(CliError::data)?;
    out.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("edges".into(), args.edges.display().to_string());
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert("score".into(), args.score.clone());
    flags.insert("factors".into(), factors.label());
    flags.insert("nonrec_variant".into(), args.nonrec_variant.clone());
    flags.insert("gc".into(), config.g_param_c.to_string());
    if let Some(t) = &args.targets {
        flags.insert("targets".into(), t.display().to_string());
    }
    flags.insert("out".into(), args.out.display().to_string());
    let mut inputs: Vec<&Path> = vec![&args.edges, &args.meta];
    if let Some(t) = &args.targets {
        inputs.push(t);
    }
    write_manifest(
        &manifest_path_for(&args.out),
        "rank",
        flags,
        &inputs,
        &[&args.out],
    )
}

fn cmd_cf(args: CfArgs) -> Result<(), CliError> {
    let factors = parse_factors(&args.factors, &args.nonrec_variant)?;
    let (g, _meta) = load(&args.edges, &args.meta)?;
    let cf = cf_all(&g, &factors);

    let mut out = create_out(&args.out)?;
    write_cf_table(&g, &cf, &factors, &mut out).map_err(CliError::data)?;
    out.flush().map_err(CliError::data)?;

    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(explain) = &args.explain {
        let mut ex = create_out(explain)?;
        write_explain(&g, &factors, &mut ex).map_err(CliError::data)?;
        ex.flush().map_err(CliError::data)?;
        outputs.push(explain);
    }

    let mut flags = BTreeMap::new();
    flags.insert("edges".into(), args.edges.display().to_string());
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert("factors".into(), factors.label());
    flags.insert("nonrec_variant".into(), args.nonrec_variant.clone());
    flags.insert("out".into(), args.out.display().to_string());
    if let Some(e) = &args.explain {
        flags.insert("explain".into(), e.display().to_string());
    }
    write_manifest(
        &manifest_path_for(&args.out),
        "cf",
        flags,
        &[&args.edges, &args.meta],
        &outputs,
    )
}

fn cmd_baseline(args: BaselineArgs) -> Result<(), CliError> {
    let method: BaselineMethod = args.method.parse().map_err(CliError::usage)?;
    let mut config = BaselineConfig::new(method);
    if let Some(iters) = args.iters {
        config.hits_iters = iters;
        config.pr_iters = iters;
    }
    config.pr_damping = args.damping;
    config.validate().map_err(CliError::usage)?;

    let (g, _meta) = load(&args.edges, &args.meta)?;
    let targets = select_targets(&g, &args.targets)?;
    let scores = baseline_scores(&g, &config, &targets).map_err(CliError::data)?;
    let pairs: Vec<(u64, f64)> = targets
        .iter()
        .zip(&scores)
        .map(|(&t, &s)| (g.external_id(t), s))
        .collect();
    let ranking = ranking_from_scores(pairs).map_err(CliError::data)?;

    let mut out = create_out(&args.out)?;
    write_ranking(&ranking, method.label(), &mut out).map_err(CliError::data)?;
    out.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("edges".into(), args.edges.display().to_string());
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert("method".into(), method.label().to_string());
    flags.insert("hits_iters".into(), config.hits_iters.to_string());
    flags.insert("pr_iters".into(), config.pr_iters.to_string());
    flags.insert("damping".into(), config.pr_damping.to_string());
    if let Some(t) = &args.targets {
        flags.insert("targets".into(), t.display().to_string());
    }
    flags.insert("out".into(), args.out.display().to_string());
    let mut inputs: Vec<&Path> = vec![&args.edges, &args.meta];
    if let Some(t) = &args.targets {
        inputs.push(t);
    }
    write_manifest(
        &manifest_path_for(&args.out),
        "baseline",
        flags,
        &inputs,
        &[&args.out],
    )
}

fn cmd_cohort(args: CohortArgs) -> Result<(), CliError> {
    let (g, meta) = load(&args.edges, &args.meta)?;
    let snapshot_time = args.snapshot_time.unwrap_or_else(|| {
        g.accounts()
            .map(|u| meta.get(u).created_at)
            .max()
            .unwrap_or(0)
    });
    let cohort = extract_cohort(
        &g,
        &meta,
        snapshot_time,
        args.weeks,
        args.min_followers,
        args.active_only,
    );
    let mut ids: Vec<u64> = cohort.accounts.iter().map(|&u| g.external_id(u)).collect();
    ids.sort_unstable();

    let mut out = create_out(&args.out)?;
    writeln!(
        out,
        "# cohort weeks={} min_followers={} active_only={} snapshot_time={}",
        args.weeks, args.min_followers, args.active_only, snapshot_time
    )
    .map_err(CliError::data)?;
    for id in &ids {
        writeln!(out, "{id}").map_err(CliError::data)?;
    }
    out.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("edges".into(), args.edges.display().to_string());
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert("snapshot_time".into(), snapshot_time.to_string());
    flags.insert("weeks".into(), args.weeks.to_string());
    flags.insert("min_followers".into(), args.min_followers.to_string());
    flags.insert("active_only".into(), args.active_only.to_string());
    flags.insert("out".into(), args.out.display().to_string());
    write_manifest(
        &manifest_path_for(&args.out),
        "cohort",
        flags,
        &[&args.edges, &args.meta],
        &[&args.out],
    )
}

enum Metric {
    Spearman,
    Ndcg(usize),
}

fn parse_metric(s: &str) -> Result<Metric, CliError> {
    if s == "spearman" {
        return Ok(Metric::Spearman);
    }
    if let Some(k) = s.strip_prefix("ndcg@") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid ndcg cutoff {k:?}")))?;
        if k == 0 {
            return Err(CliError::Usage("ndcg cutoff must be at least 1".into()));
        }
        return Ok(Metric::Ndcg(k));
    }
    Err(CliError::Usage(format!(
        "unknown metric {s:?} (expected spearman or ndcg@K)"
    )))
}

/// Looks up the ground-truth gain for every ranked account, failing
/// with the list of offenders when labels are missing.
fn gains_for(
    entries: &[(u64, f64)],
    meta: &BTreeMap<u64, crate::graph::AccountMeta>,
) -> Result<Vec<f64>, CliError> {
    let mut gains = Vec::with_capacity(entries.len());
    let mut missing = Vec::new();
    for &(id, _) in entries {
        match meta.get(&id).and_then(|m| m.fw_nr_horizon) {
            Some(v) => gains.push(v as f64),
            None => missing.push(id.to_string()),
        }
    }
    if missing.is_empty() {
        Ok(gains)
    } else {
        missing.truncate(10);
        Err(CliError::Data(format!(
            "accounts without ground-truth labels: {}",
            missing.join(", ")
        )))
    }
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let metric = parse_metric(&args.metric)?;
    let ranking = read_score_file(&args.ranking).map_err(CliError::data)?;
    let meta = read_meta_map(&args.meta).map_err(CliError::data)?;
    let gains = gains_for(&ranking.entries, &meta)?;
    let scores: Vec<f64> = ranking.entries.iter().map(|&(_, s)| s).collect();

    let (name, value) = match metric {
        Metric::Spearman => (
            "spearman".to_string(),
            spearman_rho(&scores, &gains).map_err(CliError::data)?,
        ),
        Metric::Ndcg(k) => (
            format!("ndcg@{k}"),
            ndcg_at_k(&gains, k).map_err(CliError::data)?,
        ),
    };
    let method = args
        .method
        .clone()
        .or(ranking.method)
        .unwrap_or_else(|| "-".to_string());

    let row = format!("{name}\t{method}\t{}\t{value}", args.cohort_label);
    println!("{row}");
    if let Some(out_path) = &args.out {
        let mut out = create_out(out_path)?;
        writeln!(out, "# metric\tmethod\tcohort\tvalue").map_err(CliError::data)?;
        writeln!(out, "{row}").map_err(CliError::data)?;
        out.flush().map_err(CliError::data)?;

        let mut flags = BTreeMap::new();
        flags.insert("ranking".into(), args.ranking.display().to_string());
        flags.insert("meta".into(), args.meta.display().to_string());
        flags.insert("metric".into(), args.metric.clone());
        flags.insert("method".into(), method);
        flags.insert("cohort_label".into(), args.cohort_label.clone());
        flags.insert("out".into(), out_path.display().to_string());
        write_manifest(
            &manifest_path_for(out_path),
            "eval",
            flags,
            &[&args.ranking, &args.meta],
            &[out_path],
        )?;
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let params = SynthParams {
        n_accounts: args.n_accounts,
        n_events: args.n_events,
        adopter_fraction: args.adopter_fraction,
        copy_prob_adopter: args.copy_prob_adopter,
        copy_prob_other: args.copy_prob_other,
        horizon_events: args.horizon_events,
        seed: args.seed,
        reciprocation_prob: args.recip_prob,
        noise_reciprocal_prob: args.noise_prob,
        copy_window: args.copy_window,
        recent_bias: args.recent_bias,
        recent_window: args.recent_window.unwrap_or(args.n_events / 10),
    };
    params.validate().map_err(CliError::usage)?;
    let out = generate(&params).map_err(CliError::data)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;
    let edges_path = args.out_dir.join("edges.tsv");
    let meta_path = args.out_dir.join("meta.tsv");
    let truth_path = args.out_dir.join("ground_truth.tsv");

    let mut w = create_out(&edges_path)?;
    write_edges(&out, &mut w).map_err(CliError::data)?;
    w.flush().map_err(CliError::data)?;
    let mut w = create_out(&meta_path)?;
    write_meta(&out, &mut w).map_err(CliError::data)?;
    w.flush().map_err(CliError::data)?;
    let mut w = create_out(&truth_path)?;
    write_ground_truth(&out, &mut w).map_err(CliError::data)?;
    w.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("n_accounts".into(), params.n_accounts.to_string());
    flags.insert("n_events".into(), params.n_events.to_string());
    flags.insert("adopter_fraction".into(), params.adopter_fraction.to_string());
    flags.insert("copy_prob_adopter".into(), params.copy_prob_adopter.to_string());
    flags.insert("copy_prob_other".into(), params.copy_prob_other.to_string());
    flags.insert("horizon_events".into(), params.horizon_events.to_string());
    flags.insert("seed".into(), params.seed.to_string());
    flags.insert("recip_prob".into(), params.reciprocation_prob.to_string());
    flags.insert("noise_prob".into(), params.noise_reciprocal_prob.to_string());
    flags.insert("copy_window".into(), params.copy_window.to_string());
    flags.insert("recent_bias".into(), params.recent_bias.to_string());
    flags.insert("recent_window".into(), params.recent_window.to_string());
    flags.insert("out_dir".into(), args.out_dir.display().to_string());
    write_manifest(
        &args.out_dir.join("manifest.json"),
        "synth",
        flags,
        &[],
        &[&edges_path, &meta_path, &truth_path],
    )
}

fn cmd_combine(args: CombineArgs) -> Result<(), CliError> {
    if args.folds < 2 {
        return Err(CliError::Usage("need at least 2 folds".into()));
    }
    if !(0.0..=1.0).contains(&args.label_quantile) {
        return Err(CliError::Usage(format!(
            "label quantile must lie in [0, 1], got {}",
            args.label_quantile
        )));
    }
    let meta = read_meta_map(&args.meta).map_err(CliError::data)?;

    let first = read_score_file(&args.features[0]).map_err(CliError::data)?;
    let ids: Vec<u64> = first.entries.iter().map(|&(id, _)| id).collect();
    let mut feature_names = vec![feature_name(&args.features[0], &first.method)];
    let mut features: Vec<Vec<f64>> = vec![first.entries.iter().map(|&(_, s)| s).collect()];
    for path in &args.features[1..] {
        let table = read_score_file(path).map_err(CliError::data)?;
        let lookup: BTreeMap<u64, f64> = table.entries.iter().copied().collect();
        let mut column = Vec::with_capacity(ids.len());
        let mut missing = Vec::new();
        for &id in &ids {
            match lookup.get(&id) {
                Some(&s) => column.push(s),
                None => missing.push(id.to_string()),
            }
        }
        if !missing.is_empty() {
            missing.truncate(10);
            return Err(CliError::Data(format!(
                "{}: missing accounts {}",
                path.display(),
                missing.join(", ")
            )));
        }
        feature_names.push(feature_name(path, &table.method));
        features.push(column);
    }

    let gain_entries: Vec<(u64, f64)> = ids.iter().map(|&id| (id, 0.0)).collect();
    let gains = gains_for(&gain_entries, &meta)?;
    let labels = quantile_labels(&gains, args.label_quantile);

    let result = logistic_combine(&features, &labels, args.folds, args.seed)
        .map_err(CliError::data)?;

    let pairs: Vec<(u64, f64)> = ids.iter().copied().zip(result.scores.iter().copied()).collect();
    let ranking = ranking_from_scores(pairs).map_err(CliError::data)?;

    let mut out = create_out(&args.out)?;
    writeln!(out, "# method: lr({})", feature_names.join("+")).map_err(CliError::data)?;
    writeln!(out, "# seed: {}", args.seed).map_err(CliError::data)?;
    writeln!(
        out,
        "# label-rule: gain strictly above quantile {} of the cohort gains",
        args.label_quantile
    )
    .map_err(CliError::data)?;
    writeln!(out, "# intercept: {}", result.intercept).map_err(CliError::data)?;
    for (name, coef) in feature_names.iter().zip(&result.coefficients) {
        writeln!(out, "# coefficient: {name}\t{coef}").map_err(CliError::data)?;
    }
    for &i in &result.constant_features {
        writeln!(out, "# warning: feature {} is constant", feature_names[i])
            .map_err(CliError::data)?;
    }
    if !result.full_fit_converged || result.fold_converged.iter().any(|&c| !c) {
        writeln!(out, "# warning: fit did not fully converge; scores are best-effort")
            .map_err(CliError::data)?;
    }
    for (i, e) in ranking.entries.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", i + 1, e.external_id, e.score).map_err(CliError::data)?;
    }
    out.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert(
        "features".into(),
        args.features
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    flags.insert("folds".into(), args.folds.to_string());
    flags.insert("seed".into(), args.seed.to_string());
    flags.insert("label_quantile".into(), args.label_quantile.to_string());
    flags.insert("out".into(), args.out.display().to_string());
    let mut inputs: Vec<&Path> = vec![&args.meta];
    for p in &args.features {
        inputs.push(p);
    }
    write_manifest(
        &manifest_path_for(&args.out),
        "combine",
        flags,
        &inputs,
        &[&args.out],
    )
}

fn feature_name(path: &Path, method: &Option<String>) -> String {
    method.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    })
}

fn cmd_scatter(args: ScatterArgs) -> Result<(), CliError> {
    let table = read_score_file(&args.scores).map_err(CliError::data)?;
    let meta = read_meta_map(&args.meta).map_err(CliError::data)?;
    let gains = gains_for(&table.entries, &meta)?;
    let ids: Vec<u64> = table.entries.iter().map(|&(id, _)| id).collect();
    let scores: Vec<f64> = table.entries.iter().map(|&(_, s)| s).collect();

    let mut out = create_out(&args.out)?;
    scatter_export(&ids, &scores, &gains, &mut out).map_err(CliError::data)?;
    out.flush().map_err(CliError::data)?;

    let mut flags = BTreeMap::new();
    flags.insert("scores".into(), args.scores.display().to_string());
    flags.insert("meta".into(), args.meta.display().to_string());
    flags.insert("out".into(), args.out.display().to_string());
    write_manifest(
        &manifest_path_for(&args.out),
        "scatter",
        flags,
        &[&args.scores, &args.meta],
        &[&args.out],
    )
}
