//! Imitation ratios, early-adopter scores, and future-popularity scores.
//!
//! Given the expected imitation counts from the imitation module, every
//! account gets an imitation ratio in [0, 1]. An account's future
//! popularity is then an aggregate of the early-adopter scores of its
//! current followers, either summed or squashed through a rational
//! g-index so a handful of strong early adopters outweighs a crowd of
//! weak ones.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{AccountId, FollowGraph};
use crate::imitation::FactorSet;

/// Early-adopter score variant.
///
/// `E1` weighs the imitation ratio by how many of the follower's own
/// followers do not already follow the target; `E2` is the bare
/// imitation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaVariant {
    E1,
    E2,
}

/// How the follower scores are aggregated into a popularity score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Plain sum over followers.
    Sum,
    /// Union-probability sum over followers-of-followers (E1 only).
    SumUnion,
    /// Rational g-index of the follower score list.
    GIndex,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("invalid score configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown target accounts: {}", format_ids(.0))]
    UnknownTargets(Vec<u64>),
    #[error("g-index input must be finite and non-negative, got {0}")]
    InvalidGIndexInput(f64),
    #[error("non-finite score for account {0}")]
    NonFiniteScore(u64),
}

fn format_ids(ids: &[u64]) -> String {
    let mut shown: Vec<String> = ids.iter().take(10).map(u64::to_string).collect();
    if ids.len() > 10 {
        shown.push(format!("... ({} total)", ids.len()));
    }
    shown.join(", ")
}

/// Full scoring configuration for `rank_accounts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub e_variant: EaVariant,
    pub agg: Aggregation,
    pub factors: FactorSet,
    pub g_param_c: f64,
}

impl ScoreConfig {
    /// Configuration with the hand-tuned default g-index parameter for
    /// the chosen variant and factor set.
    pub fn new(e_variant: EaVariant, agg: Aggregation, factors: FactorSet) -> Self {
        Self {
            e_variant,
            agg,
            factors,
            g_param_c: default_g_param(e_variant, &factors),
        }
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        if self.agg == Aggregation::SumUnion && self.e_variant != EaVariant::E1 {
            return Err(ScoreError::InvalidConfig(
                "sum-union aggregation is only defined for the e1 variant".into(),
            ));
        }
        if !self.g_param_c.is_finite() || self.g_param_c <= 0.0 {
            return Err(ScoreError::InvalidConfig(format!(
                "g-index parameter must be a positive real, got {}",
                self.g_param_c
            )));
        }
        Ok(())
    }

    /// Label for file headers, e.g. `f2-sum(r)`.
    pub fn label(&self) -> String {
        let variant = match self.e_variant {
            EaVariant::E1 => "f1",
            EaVariant::E2 => "f2",
        };
        let agg = match self.agg {
            Aggregation::Sum => "sum",
            Aggregation::SumUnion => "sum-union",
            Aggregation::GIndex => "g",
        };
        let factors = self.factors.label();
        if factors == "none" {
            format!("{variant}-{agg}")
        } else {
            format!("{variant}-{agg}({factors})")
        }
    }
}

/// Hand-tuned default for the g-index parameter `c`, keyed on the score
/// variant and the reciprocity/similarity toggles.
pub fn default_g_param(e_variant: EaVariant, factors: &FactorSet) -> f64 {
    match (e_variant, factors.use_nonrec, factors.use_sim) {
        (EaVariant::E1, false, false) => 50_000.0,
        (EaVariant::E1, true, false) => 100_000.0,
        (EaVariant::E1, false, true) => 50_000.0,
        (EaVariant::E1, true, true) => 50_000.0,
        (EaVariant::E2, false, false) => 1.0,
        (EaVariant::E2, true, false) => 10.0,
        (EaVariant::E2, false, true) => 1.0,
        (EaVariant::E2, true, true) => 10.0,
    }
}

/// Estimated probability that a link of `u` gets imitated by one of its
/// followers: `cf[u]` normalized by the maximum possible imitation
/// count. Zero when `u` has no followers or no friends; clamped to
/// [0, 1] against float noise.
pub fn imitation_ratio(g: &FollowGraph, cf: &[f64], u: AccountId) -> f64 {
    let denom = (g.follower_count(u) * g.friend_count(u)) as f64;
    if denom == 0.0 {
        return 0.0;
    }
    (cf[u.index()] / denom).clamp(0.0, 1.0)
}

/// Early-adopter score of `u` with respect to a target `v`.
pub fn early_adopter_score(
    g: &FollowGraph,
    cf: &[f64],
    u: AccountId,
    v: AccountId,
    variant: EaVariant,
) -> f64 {
    let ratio = imitation_ratio(g, cf, u);
    match variant {
        EaVariant::E2 => ratio,
        EaVariant::E1 => {
            if ratio == 0.0 {
                return 0.0;
            }
            // Followers of u that do not already follow v.
            let fresh = g
                .followers(u)
                .iter()
                .filter(|&&x| !g.contains_edge(x, v))
                .count();
            ratio * fresh as f64
        }
    }
}

/// Sum of the follower early-adopter scores, in follower-list order.
pub fn future_popularity_sum(
    g: &FollowGraph,
    cf: &[f64],
    v: AccountId,
    variant: EaVariant,
) -> f64 {
    g.followers(v)
        .iter()
        .map(|&u| early_adopter_score(g, cf, u, v, variant))
        .sum()
}

/// Union-probability variant: for every distinct follower-of-a-follower
/// `w`, the probability that at least one follower of `v` that `w`
/// follows gets imitated by `w`, treating imitation events as
/// independent with probability `I(u)` each.
pub fn future_popularity_sum_union(g: &FollowGraph, cf: &[f64], v: AccountId) -> f64 {
    let mut candidates: Vec<AccountId> = g
        .followers(v)
        .iter()
        .flat_map(|&u| g.followers(u).iter().copied())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let mut total = 0.0;
    for w in candidates {
        let mut miss = 1.0;
        for &u in g.followers(v) {
            if g.contains_edge(w, u) {
                miss *= 1.0 - imitation_ratio(g, cf, u);
            }
        }
        total += 1.0 - miss;
    }
    total
}

/// Rational g-index of a value list: the largest g whose top-g values
/// sum to at least g²/c, linearly interpolated between the integer
/// thresholds. The sum saturates once the list is exhausted.
pub fn rational_g_index(values: &[f64], c: f64) -> Result<f64, ScoreError> {
    if !c.is_finite() || c <= 0.0 {
        return Err(ScoreError::InvalidConfig(format!(
            "g-index parameter must be a positive real, got {c}"
        )));
    }
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(ScoreError::InvalidGIndexInput(v));
        }
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));

    let mut g = 0.0f64;
    let mut sum_g = 0.0f64;
    loop {
        let next = g + 1.0;
        let next_value = sorted.get(g as usize).copied().unwrap_or(0.0);
        let sum_next = sum_g + next_value;
        if next * next <= c * sum_next {
            g = next;
            sum_g = sum_next;
        } else {
            let numerator = c * sum_next - g * g;
            let denominator = next * next - g * g;
            let mut fraction = numerator / denominator;
            if !fraction.is_finite() {
                fraction = 0.0;
            }
            return Ok(g + fraction.clamp(0.0, 1.0));
        }
    }
}

/// Rational g-index of the follower early-adopter scores of `v`.
pub fn future_popularity_g(
    g: &FollowGraph,
    cf: &[f64],
    v: AccountId,
    variant: EaVariant,
    c: f64,
) -> f64 {
    let scores: Vec<f64> = g
        .followers(v)
        .iter()
        .map(|&u| early_adopter_score(g, cf, u, v, variant))
        .collect();
    rational_g_index(&scores, c).expect("early-adopter scores are finite and non-negative")
}

/// One ranked account.
#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub account: AccountId,
    pub external_id: u64,
    pub score: f64,
}

/// Accounts in descending score order; ties broken by ascending
/// external id so rankings are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

/// Maps external target ids to internal ids, reporting every unknown id.
pub fn resolve_targets(g: &FollowGraph, externals: &[u64]) -> Result<Vec<AccountId>, ScoreError> {
    let mut targets = Vec::with_capacity(externals.len());
    let mut unknown = Vec::new();
    for &ext in externals {
        match g.resolve(ext) {
            Some(id) => targets.push(id),
            None => unknown.push(ext),
        }
    }
    if unknown.is_empty() {
        Ok(targets)
    } else {
        Err(ScoreError::UnknownTargets(unknown))
    }
}

/// Scores every target with the configured future-popularity variant
/// and returns the ranking.
pub fn rank_accounts(
    g: &FollowGraph,
    cf: &[f64],
    targets: &[AccountId],
    config: &ScoreConfig,
) -> Result<Ranking, ScoreError> {
    config.validate()?;
    let mut entries = Vec::with_capacity(targets.len());
    for &v in targets {
        let score = match config.agg {
            Aggregation::Sum => future_popularity_sum(g, cf, v, config.e_variant),
            Aggregation::SumUnion => future_popularity_sum_union(g, cf, v),
            Aggregation::GIndex => {
                future_popularity_g(g, cf, v, config.e_variant, config.g_param_c)
            }
        };
        let external_id = g.external_id(v);
        if !score.is_finite() {
            return Err(ScoreError::NonFiniteScore(external_id));
        }
        entries.push(RankEntry {
            account: v,
            external_id,
            score,
        });
    }
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.external_id.cmp(&b.external_id))
    });
    Ok(Ranking { entries })
}

/// Builds a ranking from precomputed `(external_id, score)` pairs using
/// the same ordering rules as `rank_accounts`.
pub fn ranking_from_scores(pairs: Vec<(u64, f64)>) -> Result<Ranking, ScoreError> {
    let mut entries = Vec::with_capacity(pairs.len());
    for (external_id, score) in pairs {
        if !score.is_finite() {
            return Err(ScoreError::NonFiniteScore(external_id));
        }
        entries.push(RankEntry {
            account: AccountId(0),
            external_id,
            score,
        });
    }
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.external_id.cmp(&b.external_id))
    });
    Ok(Ranking { entries })
}

/// Writes `rank<TAB>account_id<TAB>score`, rank starting at 1, with the
/// method recorded in a header comment.
pub fn write_ranking<W: Write>(ranking: &Ranking, method: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "# method: {method}")?;
    for (i, e) in ranking.entries.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", i + 1, e.external_id, e.score)?;
    }
    Ok(())
}

/// A ranking file read back from disk, in file order.
#[derive(Debug, Clone)]
pub struct RankingFile {
    pub method: Option<String>,
    /// `(external_id, score)` pairs in rank order.
    pub entries: Vec<(u64, f64)>,
}

/// Reads a ranking (3 columns) or score-table (2 columns) TSV.
pub fn read_score_file<P: AsRef<Path>>(path: P) -> Result<RankingFile, crate::graph::LoadError> {
    use crate::graph::LoadError;
    let path = path.as_ref();
    let name = path.display().to_string();
    let mut method = None;
    let mut entries = Vec::new();
    for (lineno, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix("# method:") {
            method = Some(rest.trim().to_string());
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (id_field, score_field) = match fields.len() {
            2 => (fields[0], fields[1]),
            3 => (fields[1], fields[2]),
            n => {
                return Err(LoadError::Parse {
                    path: name,
                    line: lineno,
                    message: format!("expected 2 or 3 tab-separated fields, got {n}"),
                })
            }
        };
        let id: u64 = id_field.parse().map_err(|_| LoadError::Parse {
            path: name.clone(),
            line: lineno,
            message: format!("invalid account id: {id_field:?}"),
        })?;
        let score: f64 = score_field.parse().map_err(|_| LoadError::Parse {
            path: name.clone(),
            line: lineno,
            message: format!("invalid score: {score_field:?}"),
        })?;
        entries.push((id, score));
    }
    Ok(RankingFile { method, entries })
}
