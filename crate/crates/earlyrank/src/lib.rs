//! Prediction of future account popularity in a directed follow graph.
//!
//! The pipeline finds "early adopters" — accounts whose follow links are
//! frequently copied by their followers — and ranks new accounts by how
//! good their current followers are as early adopters. The crate also
//! ships the standard comparison methods (degree counts, HITS, PageRank,
//! Adamic/Adar), rank-correlation evaluation, a logistic-regression
//! score combiner, and a synthetic graph generator with planted copy
//! events for closed-loop verification.
//!
//! Modules follow the pipeline stages:
//!
//! - [`graph`]: snapshot loading and creation-ordered adjacency
//! - [`imitation`]: copy detection and expected imitation counts
//! - [`scoring`]: early-adopter and future-popularity scores
//! - [`baselines`]: comparison methods
//! - [`eval`]: cohorts, Spearman/nDCG, logistic combination
//! - [`synth`]: synthetic snapshots with ground truth
//! - [`cli`]: the `earlyrank` command-line tool

pub mod baselines;
pub mod cli;
pub mod eval;
pub mod graph;
pub mod imitation;
pub mod scoring;
pub mod synth;

pub use graph::{AccountId, FollowGraph, MetaTable};
pub use imitation::{cf_all, cf_local, FactorSet, NonrecVariant};
pub use scoring::{Aggregation, EaVariant, Ranking, ScoreConfig};
