//! Directed follow graph with creation-ordered adjacency.
//!
//! The graph is immutable after construction and safe to share across
//! threads. Adjacency lists are kept newest-first (descending creation
//! sequence), which is the order the rest of the pipeline relies on for
//! time-order checks. Accounts get dense internal ids; the original ids
//! from the input files are kept around so every export can be written
//! in terms of them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

/// Dense internal account identifier, valid for one loaded snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccountId(pub u32);

impl AccountId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single follow link. `seq` is a global creation sequence number:
/// strictly increasing over edge-creation time, unique per snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FollowEdge {
    pub follower: AccountId,
    pub followee: AccountId,
    pub seq: u64,
}

/// Neighbor list selector for [`FollowGraph::neighbors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborKind {
    Friends,
    Followers,
    FriendsNonreciprocal,
    FollowersNonreciprocal,
}

/// List selector for positional lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListKind {
    Friends,
    Followers,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("account id {0} out of range")]
    InvalidAccount(u32),
    #[error("unknown account {0}")]
    UnknownAccount(u64),
    #[error("duplicate account {0}")]
    DuplicateAccount(u64),
    #[error("self-loop on account {0}")]
    SelfLoop(u64),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(u64, u64),
    #[error("duplicate sequence number {0}")]
    DuplicateSeq(u64),
    #[error("no edge {0} -> {1}")]
    MissingEdge(u64, u64),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {source}")]
    Graph {
        path: String,
        line: usize,
        source: GraphError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-account metadata from the meta file. `fw_nr_horizon` is the
/// ground-truth non-reciprocal follower count at the future horizon;
/// accounts without a label carry `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccountMeta {
    pub created_at: i64,
    pub active: bool,
    pub fw_nr_horizon: Option<u64>,
}

/// Metadata table indexed by internal account id.
#[derive(Debug, Clone)]
pub struct MetaTable {
    records: Vec<AccountMeta>,
}

impl MetaTable {
    pub fn new(records: Vec<AccountMeta>) -> Self {
        Self { records }
    }

    pub fn get(&self, u: AccountId) -> &AccountMeta {
        &self.records[u.index()]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Incremental constructor used by the file loader, the synthetic
/// generator, and tests. Validates edges as they are added.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    external_ids: Vec<u64>,
    ext_to_internal: HashMap<u64, AccountId>,
    edges: Vec<FollowEdge>,
    edge_set: HashSet<(u32, u32)>,
    seqs: HashSet<u64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_account(&mut self, external: u64) -> Result<AccountId, GraphError> {
        if self.ext_to_internal.contains_key(&external) {
            return Err(GraphError::DuplicateAccount(external));
        }
        let id = AccountId(self.external_ids.len() as u32);
        self.external_ids.push(external);
        self.ext_to_internal.insert(external, id);
        Ok(id)
    }

    pub fn account(&self, external: u64) -> Option<AccountId> {
        self.ext_to_internal.get(&external).copied()
    }

    /// Adds one follow link, identified by external account ids.
    pub fn add_edge(&mut self, seq: u64, follower: u64, followee: u64) -> Result<(), GraphError> {
        if follower == followee {
            return Err(GraphError::SelfLoop(follower));
        }
        let f = self
            .account(follower)
            .ok_or(GraphError::UnknownAccount(follower))?;
        let t = self
            .account(followee)
            .ok_or(GraphError::UnknownAccount(followee))?;
        if !self.edge_set.insert((f.0, t.0)) {
            return Err(GraphError::DuplicateEdge(follower, followee));
        }
        if !self.seqs.insert(seq) {
            return Err(GraphError::DuplicateSeq(seq));
        }
        self.edges.push(FollowEdge {
            follower: f,
            followee: t,
            seq,
        });
        Ok(())
    }

    pub fn build(self) -> FollowGraph {
        let n = self.external_ids.len();
        let mut edges = self.edges;
        edges.sort_unstable_by_key(|e| e.seq);

        let mut friends = vec![Vec::new(); n];
        let mut followers = vec![Vec::new(); n];
        let mut friend_seq: Vec<HashMap<AccountId, u64>> = vec![HashMap::new(); n];
        // Newest-first: walk edges from the latest creation backwards.
        for e in edges.iter().rev() {
            friends[e.follower.index()].push(e.followee);
            followers[e.followee.index()].push(e.follower);
        }
        for e in &edges {
            friend_seq[e.follower.index()].insert(e.followee, e.seq);
        }

        FollowGraph {
            external_ids: self.external_ids,
            ext_to_internal: self.ext_to_internal,
            friends,
            followers,
            friend_seq,
            edges,
        }
    }
}

/// Immutable directed follow graph.
///
/// `friends(u)` lists the accounts `u` follows, `followers(u)` the
/// accounts following `u`; both are strictly ordered by descending
/// creation sequence (index 0 is the newest link).
#[derive(Debug)]
pub struct FollowGraph {
    external_ids: Vec<u64>,
    ext_to_internal: HashMap<u64, AccountId>,
    friends: Vec<Vec<AccountId>>,
    followers: Vec<Vec<AccountId>>,
    friend_seq: Vec<HashMap<AccountId, u64>>,
    edges: Vec<FollowEdge>,
}

impl FollowGraph {
    /// Builds a graph over accounts `0..n_accounts` (external ids equal
    /// to the index) from `(seq, follower, followee)` triples.
    pub fn from_edges(n_accounts: u64, edges: &[(u64, u64, u64)]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new();
        for ext in 0..n_accounts {
            b.add_account(ext)?;
        }
        for &(seq, f, t) in edges {
            b.add_edge(seq, f, t)?;
        }
        Ok(b.build())
    }

    pub fn node_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All edges, ascending by `seq`.
    pub fn edges(&self) -> &[FollowEdge] {
        &self.edges
    }

    pub fn accounts(&self) -> impl Iterator<Item = AccountId> {
        (0..self.external_ids.len() as u32).map(AccountId)
    }

    pub fn external_id(&self, u: AccountId) -> u64 {
        self.external_ids[u.index()]
    }

    pub fn resolve(&self, external: u64) -> Option<AccountId> {
        self.ext_to_internal.get(&external).copied()
    }

    pub fn check(&self, u: AccountId) -> Result<(), GraphError> {
        if u.index() < self.external_ids.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidAccount(u.0))
        }
    }

    /// Accounts followed by `u`, newest link first.
    pub fn friends(&self, u: AccountId) -> &[AccountId] {
        &self.friends[u.index()]
    }

    /// Accounts following `u`, newest link first.
    pub fn followers(&self, u: AccountId) -> &[AccountId] {
        &self.followers[u.index()]
    }

    pub fn friend_count(&self, u: AccountId) -> usize {
        self.friends[u.index()].len()
    }

    pub fn follower_count(&self, u: AccountId) -> usize {
        self.followers[u.index()].len()
    }

    #[inline]
    pub fn contains_edge(&self, follower: AccountId, followee: AccountId) -> bool {
        self.friend_seq[follower.index()].contains_key(&followee)
    }

    /// Creation sequence of the edge `follower -> followee`, if present.
    #[inline]
    pub fn edge_seq(&self, follower: AccountId, followee: AccountId) -> Option<u64> {
        self.friend_seq[follower.index()].get(&followee).copied()
    }

    /// True iff both `u -> v` and `v -> u` exist.
    pub fn reciprocal(&self, u: AccountId, v: AccountId) -> bool {
        self.contains_edge(u, v) && self.contains_edge(v, u)
    }

    /// Non-reciprocal friends: accounts `u` follows that do not follow
    /// back. Preserves the friends ordering.
    pub fn friends_nr(&self, u: AccountId) -> Vec<AccountId> {
        self.friends[u.index()]
            .iter()
            .copied()
            .filter(|&v| !self.contains_edge(v, u))
            .collect()
    }

    /// Non-reciprocal followers: accounts following `u` that `u` does
    /// not follow back. Preserves the followers ordering.
    pub fn followers_nr(&self, u: AccountId) -> Vec<AccountId> {
        self.followers[u.index()]
            .iter()
            .copied()
            .filter(|&w| !self.contains_edge(u, w))
            .collect()
    }

    pub fn friend_count_nr(&self, u: AccountId) -> usize {
        self.friends[u.index()]
            .iter()
            .filter(|&&v| !self.contains_edge(v, u))
            .count()
    }

    pub fn follower_count_nr(&self, u: AccountId) -> usize {
        self.followers[u.index()]
            .iter()
            .filter(|&&w| !self.contains_edge(u, w))
            .count()
    }

    /// Ordered neighbor list of the requested kind.
    pub fn neighbors(&self, u: AccountId, kind: NeighborKind) -> Result<Vec<AccountId>, GraphError> {
        self.check(u)?;
        Ok(match kind {
            NeighborKind::Friends => self.friends(u).to_vec(),
            NeighborKind::Followers => self.followers(u).to_vec(),
            NeighborKind::FriendsNonreciprocal => self.friends_nr(u),
            NeighborKind::FollowersNonreciprocal => self.followers_nr(u),
        })
    }

    /// Position of `member` in the selected list of `owner` (0 = newest
    /// link), or `None` when absent.
    pub fn idx(
        &self,
        owner: AccountId,
        kind: ListKind,
        member: AccountId,
    ) -> Result<Option<usize>, GraphError> {
        self.check(owner)?;
        let list = match kind {
            ListKind::Friends => self.friends(owner),
            ListKind::Followers => self.followers(owner),
        };
        Ok(list.iter().position(|&x| x == member))
    }

    /// Writes the edge file back out, ascending by `seq`, in external ids.
    pub fn write_edges<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(
                out,
                "{}\t{}\t{}",
                e.seq,
                self.external_id(e.follower),
                self.external_id(e.followee)
            )?;
        }
        Ok(())
    }

    /// Writes the meta file back out, in internal id order.
    pub fn write_meta<W: Write>(&self, meta: &MetaTable, mut out: W) -> io::Result<()> {
        for u in self.accounts() {
            let m = meta.get(u);
            let label = m
                .fw_nr_horizon
                .map(|v| v.to_string())
                .unwrap_or_default();
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.external_id(u),
                m.created_at,
                u8::from(m.active),
                label
            )?;
        }
        Ok(())
    }
}

fn parse_field<T: std::str::FromStr>(
    s: &str,
    what: &str,
    path: &str,
    line: usize,
) -> Result<T, LoadError> {
    s.parse().map_err(|_| LoadError::Parse {
        path: path.to_string(),
        line,
        message: format!("invalid {what}: {s:?}"),
    })
}

/// Parses a meta TSV into `(external_id, record, line_number)` rows.
fn parse_meta_file(path: &Path) -> Result<Vec<(u64, AccountMeta, usize)>, LoadError> {
    let name = path.display().to_string();
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(LoadError::Parse {
                path: name.clone(),
                line: lineno,
                message: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let account: u64 = parse_field(fields[0], "account id", &name, lineno)?;
        let created_at: i64 = parse_field(fields[1], "creation time", &name, lineno)?;
        let active = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(LoadError::Parse {
                    path: name.clone(),
                    line: lineno,
                    message: format!("invalid active flag: {other:?}"),
                })
            }
        };
        let fw_nr_horizon = if fields[3].is_empty() {
            None
        } else {
            Some(parse_field(fields[3], "follower count", &name, lineno)?)
        };
        rows.push((
            account,
            AccountMeta {
                created_at,
                active,
                fw_nr_horizon,
            },
            lineno,
        ));
    }
    Ok(rows)
}

/// Reads a meta file into an external-id keyed map, without requiring
/// the matching edge file.
pub fn read_meta_map<P: AsRef<Path>>(
    path: P,
) -> Result<std::collections::BTreeMap<u64, AccountMeta>, LoadError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let mut map = std::collections::BTreeMap::new();
    for (account, record, lineno) in parse_meta_file(path)? {
        if map.insert(account, record).is_some() {
            return Err(LoadError::Graph {
                path: name,
                line: lineno,
                source: GraphError::DuplicateAccount(account),
            });
        }
    }
    Ok(map)
}

/// Loads a snapshot from the edge and meta TSV files.
///
/// The meta file defines the account universe; every account referenced
/// by an edge must appear in it. Lines starting with `#` and blank
/// lines are skipped in both files.
pub fn load_snapshot<P: AsRef<Path>>(
    edge_path: P,
    meta_path: P,
) -> Result<(FollowGraph, MetaTable), LoadError> {
    let meta_path = meta_path.as_ref();
    let meta_name = meta_path.display().to_string();
    let mut builder = GraphBuilder::new();
    let mut records = Vec::new();

    for (account, record, lineno) in parse_meta_file(meta_path)? {
        builder.add_account(account).map_err(|e| LoadError::Graph {
            path: meta_name.clone(),
            line: lineno,
            source: e,
        })?;
        records.push(record);
    }

    let edge_path = edge_path.as_ref();
    let edge_name = edge_path.display().to_string();
    for (lineno, line) in BufReader::new(File::open(edge_path)?).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(LoadError::Parse {
                path: edge_name.clone(),
                line: lineno,
                message: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let seq: u64 = parse_field(fields[0], "sequence number", &edge_name, lineno)?;
        let follower: u64 = parse_field(fields[1], "follower id", &edge_name, lineno)?;
        let followee: u64 = parse_field(fields[2], "followee id", &edge_name, lineno)?;
        builder
            .add_edge(seq, follower, followee)
            .map_err(|e| LoadError::Graph {
                path: edge_name.clone(),
                line: lineno,
                source: e,
            })?;
    }

    Ok((builder.build(), MetaTable::new(records)))
}

/// Reads a targets/cohort file: one external account id per line.
pub fn read_account_list<P: AsRef<Path>>(path: P) -> Result<Vec<u64>, LoadError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let mut ids = Vec::new();
    for (lineno, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        ids.push(parse_field(line, "account id", &name, lineno + 1)?);
    }
    Ok(ids)
}
