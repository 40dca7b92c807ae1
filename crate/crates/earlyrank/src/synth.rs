//! Synthetic follow-graph generator with planted copy events.
//!
//! The generator runs a single event loop. At every step a random alive
//! account either copies a link out of a friend's friend list (recording
//! a ground-truth copy event) or creates a fresh link by preferential
//! attachment, optionally followed back. Designated "adopter" accounts
//! are the ones whose links get copied with high probability, so a
//! detector run on the emitted snapshot can be scored against the
//! recorded events.
//!
//! The process is not a faithful social-network growth model; it exists
//! to plant verifiable copy events. Copied links and their originals are
//! kept non-reciprocal for the rest of the run so every recorded event
//! still passes the structural, temporal and reciprocity checks when
//! replayed against the snapshot.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// One simulated event advances the clock by this many seconds.
pub const SECONDS_PER_EVENT: i64 = 600;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph saturated: no eligible link could be created")]
    Saturated,
}

/// Generator parameters. `copy_prob_adopter` / `copy_prob_other` are the
/// probabilities that a drawn friend's link gets copied depending on
/// whether that friend is a designated adopter.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_accounts: u32,
    pub n_events: u64,
    pub adopter_fraction: f64,
    pub copy_prob_adopter: f64,
    pub copy_prob_other: f64,
    pub horizon_events: u64,
    pub seed: u64,
    /// Probability that a fresh background link is followed back.
    pub reciprocation_prob: f64,
    /// Probability of injecting a reciprocal fake triangle instead of a
    /// background link; stresses the reciprocity filter.
    pub noise_reciprocal_prob: f64,
    /// Copies pick the imitated link among this many of the friend's
    /// newest non-reciprocal links.
    pub copy_window: usize,
    /// Probability that a background link targets a recently created
    /// account instead of a preferential-attachment draw.
    pub recent_bias: f64,
    /// An account counts as recently created for this many events after
    /// its birth.
    pub recent_window: u64,
}

impl SynthParams {
    pub fn new(n_accounts: u32, n_events: u64) -> Self {
        Self {
            n_accounts,
            n_events,
            adopter_fraction: 0.1,
            copy_prob_adopter: 0.6,
            copy_prob_other: 0.0,
            horizon_events: n_events,
            seed: 42,
            reciprocation_prob: 0.15,
            noise_reciprocal_prob: 0.0,
            copy_window: 1,
            recent_bias: 0.45,
            recent_window: n_events / 10,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_accounts < 2 {
            return Err(SynthError::InvalidParams(
                "need at least 2 accounts".into(),
            ));
        }
        if self.n_events < u64::from(self.n_accounts) {
            return Err(SynthError::InvalidParams(format!(
                "n_events ({}) must be at least n_accounts ({})",
                self.n_events, self.n_accounts
            )));
        }
        for (name, p) in [
            ("adopter_fraction", self.adopter_fraction),
            ("copy_prob_adopter", self.copy_prob_adopter),
            ("copy_prob_other", self.copy_prob_other),
            ("reciprocation_prob", self.reciprocation_prob),
            ("noise_reciprocal_prob", self.noise_reciprocal_prob),
            ("recent_bias", self.recent_bias),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidParams(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.copy_prob_adopter < self.copy_prob_other {
            return Err(SynthError::InvalidParams(
                "copy_prob_adopter must be at least copy_prob_other".into(),
            ));
        }
        if self.copy_window == 0 {
            return Err(SynthError::InvalidParams("copy_window must be positive".into()));
        }
        Ok(())
    }
}

/// One recorded copy: at `copied_seq`, account `copier` re-created the
/// link `imitated -> target` that was originally formed at
/// `original_seq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyEvent {
    pub copied_seq: u64,
    pub original_seq: u64,
    pub imitated: u32,
    pub copier: u32,
    pub target: u32,
}

/// Ground truth emitted next to the snapshot.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Designated adopter accounts.
    pub adopters: Vec<u32>,
    /// Copy events that fall inside the snapshot, ascending by seq.
    pub copy_events: Vec<CopyEvent>,
    /// Number of snapshot copy events imitating each account.
    pub true_copy_count: Vec<u64>,
    /// Non-reciprocal follower count per account after the horizon.
    pub fw_nr_horizon: Vec<u64>,
}

/// A generated snapshot plus its ground truth.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    /// Snapshot edges `(seq, follower, followee)`, ascending by seq.
    pub edges: Vec<(u64, u32, u32)>,
    /// Creation time per account (seconds).
    pub created_at: Vec<i64>,
    pub truth: GroundTruth,
}

impl SynthOutput {
    /// Time of the last snapshot event; cohort extraction against the
    /// generated meta file should use this as the snapshot time.
    pub fn snapshot_time(&self, params: &SynthParams) -> i64 {
        params.n_events as i64 * SECONDS_PER_EVENT
    }
}

struct GenState {
    friends: Vec<Vec<u32>>,
    followers: Vec<Vec<u32>>,
    edge_seq: std::collections::HashMap<(u32, u32), u64>,
    /// Preferential-attachment pool: each account once at birth plus
    /// once per follower gained.
    ballot: Vec<u32>,
    /// Directed edges that must never be reciprocated (copied links and
    /// the originals they imitate).
    protected: HashSet<(u32, u32)>,
    /// Seq of each account's newest outgoing link (0 = none yet).
    last_link: Vec<u64>,
    edges: Vec<(u64, u32, u32)>,
    next_seq: u64,
}

impl GenState {
    fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edge_seq.contains_key(&(a, b))
    }

    fn add_edge(&mut self, follower: u32, followee: u32) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.edge_seq.insert((follower, followee), seq);
        self.friends[follower as usize].push(followee);
        self.followers[followee as usize].push(follower);
        self.ballot.push(followee);
        self.last_link[follower as usize] = seq;
        self.edges.push((seq, follower, followee));
        seq
    }

    /// Creating `a -> b` is allowed unless it would duplicate an edge,
    /// self-loop, or reciprocate a protected link.
    fn can_link(&self, a: u32, b: u32) -> bool {
        a != b && !self.has_edge(a, b) && !self.protected.contains(&(b, a))
    }
}

/// Runs the event loop and returns the snapshot plus ground truth.
/// The same seed yields byte-identical output files.
pub fn generate(params: &SynthParams) -> Result<SynthOutput, SynthError> {
    params.validate()?;
    let n = params.n_accounts as usize;
    let total_events = params.n_events + params.horizon_events;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Designated adopters: a seeded sample of all accounts.
    let n_adopters = (params.adopter_fraction * n as f64).round() as usize;
    let mut shuffled: Vec<u32> = (0..params.n_accounts).collect();
    shuffled.shuffle(&mut rng);
    let mut adopters: Vec<u32> = shuffled.into_iter().take(n_adopters).collect();
    adopters.sort_unstable();
    let is_adopter: Vec<bool> = {
        let mut flags = vec![false; n];
        for &a in &adopters {
            flags[a as usize] = true;
        }
        flags
    };

    // A seed group exists from the start so early events always have
    // eligible link targets; the rest of the accounts are born uniformly
    // over the snapshot window.
    let seed_accounts = (n as u64 / 20).clamp(2, n as u64);
    let birth_seq: Vec<u64> = (0..n as u64)
        .map(|i| {
            if i < seed_accounts {
                0
            } else {
                (i + 1 - seed_accounts) * params.n_events / (n as u64 + 1 - seed_accounts)
            }
        })
        .collect();

    let mut state = GenState {
        friends: vec![Vec::new(); n],
        followers: vec![Vec::new(); n],
        edge_seq: std::collections::HashMap::new(),
        ballot: Vec::new(),
        protected: HashSet::new(),
        last_link: vec![0; n],
        edges: Vec::new(),
        next_seq: 1,
    };
    let mut alive: u32 = 0;
    let mut copy_events: Vec<CopyEvent> = Vec::new();

    // Hidden per-account quality. Growth is fitness-weighted, so over a
    // long horizon good accounts pull ahead; adopters are the users who
    // sense quality early, which is what makes their links worth
    // copying. When the copy propensities do not distinguish adopters,
    // the designation is a pure label and must not change behavior.
    const FITNESS_LOG_RANGE: f64 = 1.6;
    let fitness: Vec<f64> = (0..n)
        .map(|_| (FITNESS_LOG_RANGE * (2.0 * rng.random::<f64>() - 1.0)).exp())
        .collect();
    let fitness_max = FITNESS_LOG_RANGE.exp();
    let adopter_behavior = params.copy_prob_adopter > params.copy_prob_other;
    // Quality sensitivity of discovery draws: adopters sense quality
    // sharply, the crowd barely.
    const ADOPTER_QUALITY_EXPONENT: f64 = 1.0;
    const CROWD_QUALITY_EXPONENT: f64 = 0.0;
    // Adopters discover newly created accounts more eagerly than the
    // average user.
    const ADOPTER_DISCOVERY_FACTOR: f64 = 2.5;
    // Everyone occasionally follows a curator outright, which gives
    // adopters an audience and lets discoveries relay between them.
    const CURATOR_BIAS: f64 = 0.12;

    while state.next_seq <= total_events {
        while (alive as usize) < n && birth_seq[alive as usize] < state.next_seq {
            state.ballot.push(alive);
            alive += 1;
        }

        let mut created = false;
        for _attempt in 0..200 {
            let actor = rng.random_range(0..alive);

            // Copy attempt: browse the list of a friend that was active
            // just now and maybe imitate one of its fresh links. The
            // short activity window bunches imitations right after the
            // original link is formed.
            let activity_cutoff = state
                .next_seq
                .saturating_sub((params.recent_window / 8).max(1))
                .max(1);
            let active_friends: Vec<u32> = state.friends[actor as usize]
                .iter()
                .copied()
                .filter(|&u| state.last_link[u as usize] >= activity_cutoff)
                .collect();
            if !active_friends.is_empty() {
                let mentor = active_friends[rng.random_range(0..active_friends.len())];
                let p = if is_adopter[mentor as usize] {
                    params.copy_prob_adopter
                } else {
                    params.copy_prob_other
                };
                if p > 0.0 && rng.random::<f64>() < p {
                    // Candidate targets: the mentor's newest non-reciprocal
                    // links, no older than a quarter of the recency window
                    // so imitation bunches right after the original link,
                    // capped at copy_window entries.
                    let copy_cutoff = state
                        .next_seq
                        .saturating_sub((params.recent_window / 2).max(1));
                    let mentor_friends = &state.friends[mentor as usize];
                    let mut eligible: Vec<u32> = Vec::new();
                    for &target in mentor_friends.iter().rev() {
                        // newest last in insertion order, so walk reversed
                        if state.edge_seq[&(mentor, target)] < copy_cutoff {
                            break;
                        }
                        if target != actor
                            && !is_adopter[target as usize]
                            && birth_seq[target as usize] >= copy_cutoff
                            && !state.has_edge(target, mentor)
                            && !state.has_edge(actor, target)
                            && !state.has_edge(target, actor)
                        {
                            eligible.push(target);
                            if eligible.len() >= params.copy_window {
                                break;
                            }
                        }
                    }
                    if !eligible.is_empty() {
                        let target = eligible[rng.random_range(0..eligible.len())];
                        let original_seq = state.edge_seq[&(mentor, target)];
                        let copied_seq = state.add_edge(actor, target);
                        state.protected.insert((actor, target));
                        state.protected.insert((mentor, target));
                        if copied_seq <= params.n_events {
                            copy_events.push(CopyEvent {
                                copied_seq,
                                original_seq,
                                imitated: mentor,
                                copier: actor,
                                target,
                            });
                        }
                        created = true;
                        break;
                    }
                }
            }

            // Reciprocal noise triangle: looks like a copy but is
            // excluded by the reciprocity filter.
            if params.noise_reciprocal_prob > 0.0
                && rng.random::<f64>() < params.noise_reciprocal_prob
                && !state.friends[actor as usize].is_empty()
            {
                let friends = &state.friends[actor as usize];
                let mentor = friends[rng.random_range(0..friends.len())];
                let mentor_friends = &state.friends[mentor as usize];
                let eligible: Vec<u32> = mentor_friends
                    .iter()
                    .copied()
                    .filter(|&t| {
                        state.can_link(actor, t)
                            && state.can_link(t, actor)
                            && !state.has_edge(t, actor)
                    })
                    .collect();
                if !eligible.is_empty() && state.next_seq < total_events {
                    let target = eligible[rng.random_range(0..eligible.len())];
                    state.add_edge(actor, target);
                    state.add_edge(target, actor);
                    created = true;
                    break;
                }
            }

            // Background link: curator affinity, recency-biased discovery,
            // or fitness-weighted preferential attachment. Recency means
            // "born within the last recent_window events", so the
            // discovery channel fades once account creation stops.
            let behaves_as_adopter = adopter_behavior && is_adopter[actor as usize];
            let discovery = if behaves_as_adopter {
                (params.recent_bias * ADOPTER_DISCOVERY_FACTOR).min(0.9)
            } else {
                params.recent_bias
            };
            let target = if adopter_behavior && rng.random::<f64>() < CURATOR_BIAS {
                let alive_adopters = adopters.partition_point(|&a| a < alive);
                if alive_adopters > 0 {
                    Some(adopters[rng.random_range(0..alive_adopters)])
                } else {
                    None
                }
            } else if rng.random::<f64>() < discovery {
                // Discovery draw. Adopters watch the newest quarter of
                // the recency window; the crowd needs social proof and
                // only browses accounts that have been around longer.
                let fresh_cut = state
                    .next_seq
                    .saturating_sub((params.recent_window / 2).max(1));
                let old_cut = state.next_seq.saturating_sub(params.recent_window);
                let births = &birth_seq[..alive as usize];
                let boundary = births.partition_point(|&b| b < fresh_cut) as u32;
                let (lo, hi) = if behaves_as_adopter {
                    (boundary, alive)
                } else {
                    (births.partition_point(|&b| b < old_cut) as u32, boundary)
                };
                if lo < hi {
                    let gamma = if behaves_as_adopter {
                        ADOPTER_QUALITY_EXPONENT
                    } else {
                        CROWD_QUALITY_EXPONENT
                    };
                    let weights: Vec<f64> = (lo..hi)
                        .map(|t| fitness[t as usize].powf(gamma))
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let mut roll = rng.random::<f64>() * total;
                    let mut pick = hi - 1;
                    for (offset, w) in weights.iter().enumerate() {
                        roll -= w;
                        if roll <= 0.0 {
                            pick = lo + offset as u32;
                            break;
                        }
                    }
                    Some(pick)
                } else {
                    None
                }
            } else {
                None
            };
            let mut chosen = None;
            // Blind recency follows and curator fanship are social;
            // fresh accounts and curators tend to reciprocate the
            // attention. Adopter discoveries and preferential follows
            // are subscriptions to an information source and follow the
            // base reciprocation rate.
            let mut social = false;
            if let Some(t) = target {
                if state.can_link(actor, t) {
                    chosen = Some(t);
                    social = !behaves_as_adopter || is_adopter[t as usize];
                }
            }
            if chosen.is_none() {
                // Half popularity-driven, half quality-driven attachment,
                // both thinned by fitness so quality shapes long-run
                // growth more than current follower counts do.
                let by_popularity = rng.random::<f64>() < 0.5;
                for _ in 0..32 {
                    let t = if by_popularity {
                        state.ballot[rng.random_range(0..state.ballot.len())]
                    } else {
                        rng.random_range(0..alive)
                    };
                    if rng.random::<f64>() * fitness_max <= fitness[t as usize]
                        && state.can_link(actor, t)
                    {
                        chosen = Some(t);
                        break;
                    }
                }
            }
            if chosen.is_none() {
                // Deterministic fallback scan.
                chosen = (0..alive).find(|&t| state.can_link(actor, t));
            }
            let Some(target) = chosen else { continue };
            state.add_edge(actor, target);
            // Organic follow-back.
            let followback = if social {
                (params.reciprocation_prob * 5.0).min(0.85)
            } else {
                params.reciprocation_prob
            };
            if rng.random::<f64>() < followback
                && state.next_seq <= total_events
                && state.can_link(target, actor)
            {
                state.add_edge(target, actor);
            }
            created = true;
            break;
        }
        if !created {
            return Err(SynthError::Saturated);
        }
    }

    // Ground truth measured on the full (snapshot + horizon) graph.
    let fw_nr_horizon: Vec<u64> = (0..params.n_accounts)
        .map(|u| {
            state.followers[u as usize]
                .iter()
                .filter(|&&w| !state.has_edge(u, w))
                .count() as u64
        })
        .collect();
    let mut true_copy_count = vec![0u64; n];
    for e in &copy_events {
        true_copy_count[e.imitated as usize] += 1;
    }

    let snapshot_edges: Vec<(u64, u32, u32)> = state
        .edges
        .iter()
        .copied()
        .take_while(|&(seq, _, _)| seq <= params.n_events)
        .collect();
    let created_at: Vec<i64> = birth_seq
        .iter()
        .map(|&b| b as i64 * SECONDS_PER_EVENT)
        .collect();

    Ok(SynthOutput {
        edges: snapshot_edges,
        created_at,
        truth: GroundTruth {
            adopters,
            copy_events,
            true_copy_count,
            fw_nr_horizon,
        },
    })
}

/// Writes the snapshot edge file.
pub fn write_edges<W: Write>(out: &SynthOutput, mut w: W) -> io::Result<()> {
    for &(seq, f, t) in &out.edges {
        writeln!(w, "{seq}\t{f}\t{t}")?;
    }
    Ok(())
}

/// Writes the meta file; every account is marked active.
pub fn write_meta<W: Write>(out: &SynthOutput, mut w: W) -> io::Result<()> {
    for (i, &created) in out.created_at.iter().enumerate() {
        writeln!(w, "{i}\t{created}\t1\t{}", out.truth.fw_nr_horizon[i])?;
    }
    Ok(())
}

/// Writes the ground-truth file:
/// `copied_seq<TAB>original_seq<TAB>imitated_account`, with the adopter
/// set recorded in header comments.
pub fn write_ground_truth<W: Write>(out: &SynthOutput, mut w: W) -> io::Result<()> {
    for a in &out.truth.adopters {
        writeln!(w, "# adopter\t{a}")?;
    }
    for e in &out.truth.copy_events {
        writeln!(w, "{}\t{}\t{}", e.copied_seq, e.original_seq, e.imitated)?;
    }
    Ok(())
}

/// `(copied_seq, original_seq, imitated_account)` rows from disk.
pub type GroundTruthRows = Vec<(u64, u64, u32)>;

/// Ground truth read back from a file written by `write_ground_truth`.
/// The copier/target fields are not stored on disk.
pub fn read_ground_truth<P: AsRef<Path>>(
    path: P,
) -> Result<(Vec<u32>, GroundTruthRows), crate::graph::LoadError> {
    use crate::graph::LoadError;
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = std::fs::File::open(path)?;
    let mut adopters = Vec::new();
    let mut events = Vec::new();
    for (lineno, line) in io::BufReader::new(file).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix("# adopter\t") {
            adopters.push(rest.parse().map_err(|_| LoadError::Parse {
                path: name.clone(),
                line: lineno,
                message: format!("invalid adopter id: {rest:?}"),
            })?);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(LoadError::Parse {
                path: name,
                line: lineno,
                message: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, s: &str| LoadError::Parse {
            path: name.clone(),
            line: lineno,
            message: format!("invalid {what}: {s:?}"),
        };
        events.push((
            fields[0].parse().map_err(|_| parse_err("sequence", fields[0]))?,
            fields[1].parse().map_err(|_| parse_err("sequence", fields[1]))?,
            fields[2].parse().map_err(|_| parse_err("account", fields[2]))?,
        ));
    }
    Ok((adopters, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FollowGraph;
    use crate::imitation::{cf_all, nonrec, structure, time_ok, FactorSet, NonrecVariant};
    use crate::graph::AccountId;

    fn small_params(seed: u64) -> SynthParams {
        let mut p = SynthParams::new(200, 1500);
        p.horizon_events = 1500;
        p.seed = seed;
        p
    }

    fn to_graph(out: &SynthOutput, n: u32) -> FollowGraph {
        let edges: Vec<(u64, u64, u64)> = out
            .edges
            .iter()
            .map(|&(s, f, t)| (s, u64::from(f), u64::from(t)))
            .collect();
        FollowGraph::from_edges(u64::from(n), &edges).unwrap()
    }

    #[test]
    fn same_seed_same_bytes() {
        let params = small_params(7);
        let a = generate(&params).unwrap();
        let b = generate(&params).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_edges(&a, &mut buf_a).unwrap();
        write_edges(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
        let mut meta_a = Vec::new();
        let mut meta_b = Vec::new();
        write_meta(&a, &mut meta_a).unwrap();
        write_meta(&b, &mut meta_b).unwrap();
        assert_eq!(meta_a, meta_b);
        let mut gt_a = Vec::new();
        let mut gt_b = Vec::new();
        write_ground_truth(&a, &mut gt_a).unwrap();
        write_ground_truth(&b, &mut gt_b).unwrap();
        assert_eq!(gt_a, gt_b);

        let mut c = small_params(8);
        c.seed = 8;
        let c = generate(&c).unwrap();
        let mut buf_c = Vec::new();
        write_edges(&c, &mut buf_c).unwrap();
        assert_ne!(buf_a, buf_c);
    }

    #[test]
    fn no_copying_no_events() {
        let mut params = small_params(3);
        params.copy_prob_adopter = 0.0;
        params.copy_prob_other = 0.0;
        let out = generate(&params).unwrap();
        assert!(out.truth.copy_events.is_empty());
        assert!(out.truth.true_copy_count.iter().all(|&c| c == 0));
    }

    #[test]
    fn adopter_only_copying_hits_only_adopters() {
        let mut params = small_params(11);
        params.copy_prob_adopter = 1.0;
        params.copy_prob_other = 0.0;
        let out = generate(&params).unwrap();
        assert!(!out.truth.copy_events.is_empty());
        let adopters: HashSet<u32> = out.truth.adopters.iter().copied().collect();
        for e in &out.truth.copy_events {
            assert!(adopters.contains(&e.imitated));
        }
    }

    #[test]
    fn replayed_events_pass_all_filters() {
        let params = small_params(5);
        let out = generate(&params).unwrap();
        let g = to_graph(&out, params.n_accounts);
        assert!(!out.truth.copy_events.is_empty());
        for e in &out.truth.copy_events {
            let u = AccountId(e.imitated);
            let v = AccountId(e.target);
            let w = AccountId(e.copier);
            assert!(structure(&g, u, v, w), "event {e:?}");
            assert!(time_ok(&g, u, v, w), "event {e:?}");
            assert!(nonrec(&g, u, v, w, NonrecVariant::CopiedLink), "event {e:?}");
            assert_eq!(g.edge_seq(w, v), Some(e.copied_seq));
            assert_eq!(g.edge_seq(u, v), Some(e.original_seq));
        }
    }

    #[test]
    fn copy_counts_bounded_by_degree_product() {
        let params = small_params(13);
        let out = generate(&params).unwrap();
        let g = to_graph(&out, params.n_accounts);
        for u in 0..params.n_accounts {
            let bound = g.follower_count(AccountId(u)) * g.friend_count(AccountId(u));
            assert!(
                out.truth.true_copy_count[u as usize] <= bound as u64,
                "account {u}: {} > {bound}",
                out.truth.true_copy_count[u as usize]
            );
        }
    }

    #[test]
    fn no_copying_means_no_adopter_signal() {
        // With copying disabled, coincidental triangles should not favor
        // the designated adopters: across seeds the mean cf difference
        // stays small.
        let mut adopter_mean = 0.0;
        let mut other_mean = 0.0;
        for seed in 0..20 {
            let mut params = SynthParams::new(120, 900);
            params.horizon_events = 0;
            params.copy_prob_adopter = 0.0;
            params.copy_prob_other = 0.0;
            params.seed = seed;
            let out = generate(&params).unwrap();
            let g = to_graph(&out, params.n_accounts);
            let cf = cf_all(&g, &FactorSet::none());
            let adopters: HashSet<u32> = out.truth.adopters.iter().copied().collect();
            let (mut sa, mut na, mut so, mut no) = (0.0, 0usize, 0.0, 0usize);
            for u in 0..params.n_accounts {
                if adopters.contains(&u) {
                    sa += cf[u as usize];
                    na += 1;
                } else {
                    so += cf[u as usize];
                    no += 1;
                }
            }
            adopter_mean += sa / na as f64;
            other_mean += so / no as f64;
        }
        adopter_mean /= 20.0;
        other_mean /= 20.0;
        let diff = (adopter_mean - other_mean).abs();
        let scale = adopter_mean.max(other_mean).max(1e-9);
        assert!(
            diff / scale < 0.5,
            "adopters {adopter_mean} vs others {other_mean}"
        );
    }

    #[test]
    fn ground_truth_file_roundtrip() {
        let params = small_params(9);
        let out = generate(&params).unwrap();
        let mut buf = Vec::new();
        write_ground_truth(&out, &mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.tsv");
        std::fs::write(&path, &buf).unwrap();
        let (adopters, events) = read_ground_truth(&path).unwrap();
        assert_eq!(adopters, out.truth.adopters);
        assert_eq!(events.len(), out.truth.copy_events.len());
        for (read, orig) in events.iter().zip(&out.truth.copy_events) {
            assert_eq!(*read, (orig.copied_seq, orig.original_seq, orig.imitated));
        }
    }

    #[test]
    fn params_validation() {
        let mut p = SynthParams::new(1, 10);
        assert!(p.validate().is_err());
        p = SynthParams::new(10, 5);
        assert!(p.validate().is_err());
        p = SynthParams::new(10, 20);
        p.copy_prob_adopter = 0.1;
        p.copy_prob_other = 0.5;
        assert!(p.validate().is_err());
        p = SynthParams::new(10, 20);
        p.adopter_fraction = 1.5;
        assert!(p.validate().is_err());
        assert!(SynthParams::new(10, 20).validate().is_ok());
    }

    #[test]
    fn snapshot_edges_within_event_budget() {
        let params = small_params(21);
        let out = generate(&params).unwrap();
        assert!(out.edges.iter().all(|&(s, _, _)| s <= params.n_events));
        assert_eq!(out.edges.len() as u64, params.n_events);
        // Seqs strictly ascending.
        for pair in out.edges.windows(2) {
            assert!(pair[0].0 < pair[1].0);
        }
    }
}
