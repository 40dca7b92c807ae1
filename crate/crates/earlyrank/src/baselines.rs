//! Comparison methods: degree counts, HITS, PageRank, and Adamic/Adar.
//!
//! Every method can optionally run on the subgraph of non-reciprocal
//! links only; the node set stays the same so score tables remain
//! aligned. All iterations use synchronized full-vector sweeps with a
//! fixed summation order, so results are reproducible bit for bit.

use std::str::FromStr;

use thiserror::Error;

use crate::graph::{AccountId, FollowGraph};

/// Degree-count selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    Followers,
    FollowersNonreciprocal,
    Friends,
    FriendsNonreciprocal,
}

/// Adamic/Adar aggregation over the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdamicAdarMode {
    Sum,
    Mean,
}

/// All ten baseline methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Followers,
    FollowersNr,
    Friends,
    FriendsNr,
    Hits,
    HitsNr,
    PageRank,
    PageRankNr,
    AdamicAdarSum,
    AdamicAdarMean,
}

impl BaselineMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BaselineMethod::Followers => "fw",
            BaselineMethod::FollowersNr => "fw-nr",
            BaselineMethod::Friends => "fr",
            BaselineMethod::FriendsNr => "fr-nr",
            BaselineMethod::Hits => "hits",
            BaselineMethod::HitsNr => "hits-nr",
            BaselineMethod::PageRank => "pr",
            BaselineMethod::PageRankNr => "pr-nr",
            BaselineMethod::AdamicAdarSum => "ad-sum",
            BaselineMethod::AdamicAdarMean => "ad-mean",
        }
    }
}

impl FromStr for BaselineMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fw" => BaselineMethod::Followers,
            "fw-nr" => BaselineMethod::FollowersNr,
            "fr" => BaselineMethod::Friends,
            "fr-nr" => BaselineMethod::FriendsNr,
            "hits" => BaselineMethod::Hits,
            "hits-nr" => BaselineMethod::HitsNr,
            "pr" => BaselineMethod::PageRank,
            "pr-nr" => BaselineMethod::PageRankNr,
            "ad-sum" => BaselineMethod::AdamicAdarSum,
            "ad-mean" => BaselineMethod::AdamicAdarMean,
            other => return Err(format!("unknown baseline method {other:?}")),
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("invalid baseline configuration: {0}")]
    InvalidConfig(String),
}

/// Baseline method plus its iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub hits_iters: usize,
    pub pr_iters: usize,
    pub pr_damping: f64,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod) -> Self {
        Self {
            method,
            hits_iters: 10,
            pr_iters: 100,
            pr_damping: 0.9,
        }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.hits_iters < 1 || self.pr_iters < 1 {
            return Err(BaselineError::InvalidConfig(
                "iteration counts must be at least 1".into(),
            ));
        }
        if !(self.pr_damping > 0.0 && self.pr_damping < 1.0) {
            return Err(BaselineError::InvalidConfig(format!(
                "damping factor must lie in (0, 1), got {}",
                self.pr_damping
            )));
        }
        Ok(())
    }
}

/// Current follower/friend count of the requested kind.
pub fn degree_score(g: &FollowGraph, v: AccountId, kind: DegreeKind) -> usize {
    match kind {
        DegreeKind::Followers => g.follower_count(v),
        DegreeKind::FollowersNonreciprocal => g.follower_count_nr(v),
        DegreeKind::Friends => g.friend_count(v),
        DegreeKind::FriendsNonreciprocal => g.friend_count_nr(v),
    }
}

fn l2_normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Mutual-reinforcement iteration from a uniform start, L2-normalizing
/// after every update. Returns `(authority, hub)`. A graph whose
/// selected subgraph has no edges yields all-zero vectors.
pub fn hits(g: &FollowGraph, nonreciprocal_only: bool, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let keep = |a: AccountId, b: AccountId| !nonreciprocal_only || !g.reciprocal(a, b);
    let init = 1.0 / (n as f64).sqrt();
    let mut auth = vec![init; n];
    let mut hub = vec![init; n];
    let zeros = || (vec![0.0; n], vec![0.0; n]);

    for _ in 0..iters {
        let mut next_auth = vec![0.0; n];
        for v in g.accounts() {
            let mut s = 0.0;
            for &w in g.followers(v) {
                if keep(w, v) {
                    s += hub[w.index()];
                }
            }
            next_auth[v.index()] = s;
        }
        if !l2_normalize(&mut next_auth) {
            return zeros();
        }
        auth = next_auth;

        let mut next_hub = vec![0.0; n];
        for w in g.accounts() {
            let mut s = 0.0;
            for &v in g.friends(w) {
                if keep(w, v) {
                    s += auth[v.index()];
                }
            }
            next_hub[w.index()] = s;
        }
        if !l2_normalize(&mut next_hub) {
            return zeros();
        }
        hub = next_hub;
    }
    (auth, hub)
}

/// Power iteration with uniform teleport; dangling mass is
/// redistributed uniformly, so the scores sum to 1 after every sweep.
pub fn pagerank(g: &FollowGraph, nonreciprocal_only: bool, damping: f64, iters: usize) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let keep = |a: AccountId, b: AccountId| !nonreciprocal_only || !g.reciprocal(a, b);
    let inv_n = 1.0 / n as f64;
    let outdeg: Vec<usize> = g
        .accounts()
        .map(|u| g.friends(u).iter().filter(|&&v| keep(u, v)).count())
        .collect();

    let mut scores = vec![inv_n; n];
    for _ in 0..iters {
        let dangling: f64 = g
            .accounts()
            .filter(|&u| outdeg[u.index()] == 0)
            .map(|u| scores[u.index()])
            .sum();
        let mut next = vec![0.0; n];
        for v in g.accounts() {
            let mut s = 0.0;
            for &w in g.followers(v) {
                if keep(w, v) {
                    s += scores[w.index()] / outdeg[w.index()] as f64;
                }
            }
            next[v.index()] = (1.0 - damping) * inv_n + damping * (s + dangling * inv_n);
        }
        scores = next;
    }
    scores
}

/// Adamic/Adar future-popularity estimate for `v`.
///
/// Candidates are the followers of v's friends (excluding v itself).
/// The index for each candidate sums `1 / ln(follower count)` over
/// shared friends; friends with fewer than two followers are skipped
/// because their weight is undefined.
pub fn adamic_adar(g: &FollowGraph, v: AccountId, mode: AdamicAdarMode) -> f64 {
    let mut candidates: Vec<AccountId> = g
        .friends(v)
        .iter()
        .flat_map(|&z| g.followers(z).iter().copied())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates.retain(|&w| w != v);
    if candidates.is_empty() {
        return 0.0;
    }

    let mut total = 0.0;
    for &w in &candidates {
        let mut index = 0.0;
        for &z in g.friends(v) {
            if g.contains_edge(w, z) {
                let popularity = g.follower_count(z);
                if popularity >= 2 {
                    index += 1.0 / (popularity as f64).ln();
                }
            }
        }
        total += index;
    }
    aggregate(total, candidates.len(), mode)
}

/// Sum or mean of the candidate index values; the mean of an empty
/// candidate set is 0.
fn aggregate(total: f64, count: usize, mode: AdamicAdarMode) -> f64 {
    match mode {
        AdamicAdarMode::Sum => total,
        AdamicAdarMode::Mean => {
            if count == 0 {
                0.0
            } else {
                total / count as f64
            }
        }
    }
}

/// Scores for the given accounts under the configured method.
pub fn baseline_scores(
    g: &FollowGraph,
    config: &BaselineConfig,
    targets: &[AccountId],
) -> Result<Vec<f64>, BaselineError> {
    config.validate()?;
    let per_target = |f: &dyn Fn(AccountId) -> f64| targets.iter().map(|&v| f(v)).collect();
    Ok(match config.method {
        BaselineMethod::Followers => {
            per_target(&|v| degree_score(g, v, DegreeKind::Followers) as f64)
        }
        BaselineMethod::FollowersNr => {
            per_target(&|v| degree_score(g, v, DegreeKind::FollowersNonreciprocal) as f64)
        }
        BaselineMethod::Friends => per_target(&|v| degree_score(g, v, DegreeKind::Friends) as f64),
        BaselineMethod::FriendsNr => {
            per_target(&|v| degree_score(g, v, DegreeKind::FriendsNonreciprocal) as f64)
        }
        BaselineMethod::Hits => {
            let (auth, _) = hits(g, false, config.hits_iters);
            targets.iter().map(|&v| auth[v.index()]).collect()
        }
        BaselineMethod::HitsNr => {
            let (auth, _) = hits(g, true, config.hits_iters);
            targets.iter().map(|&v| auth[v.index()]).collect()
        }
        BaselineMethod::PageRank => {
            let pr = pagerank(g, false, config.pr_damping, config.pr_iters);
            targets.iter().map(|&v| pr[v.index()]).collect()
        }
        BaselineMethod::PageRankNr => {
            let pr = pagerank(g, true, config.pr_damping, config.pr_iters);
            targets.iter().map(|&v| pr[v.index()]).collect()
        }
        BaselineMethod::AdamicAdarSum => per_target(&|v| adamic_adar(g, v, AdamicAdarMode::Sum)),
        BaselineMethod::AdamicAdarMean => per_target(&|v| adamic_adar(g, v, AdamicAdarMode::Mean)),
    })
}
