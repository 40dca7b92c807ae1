//! Cohort extraction, ranking-quality metrics, and the logistic
//! regression score combiner.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{AccountId, FollowGraph, MetaTable};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("score tables must have equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {0} values, got {1}")]
    TooFew(usize, usize),
    #[error("rank correlation is undefined for constant input")]
    ConstantInput,
    #[error("values must be finite")]
    NonFinite,
    #[error("gains must be finite and non-negative")]
    InvalidGain,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("invalid fold count: {0}")]
    BadFolds(String),
    #[error("features must not be empty")]
    NoFeatures,
}

/// Accounts at most `weeks` old at the snapshot that hold at least
/// `min_followers` followers (optionally restricted to accounts still
/// active at the ground-truth horizon).
#[derive(Debug, Clone)]
pub struct Cohort {
    pub accounts: Vec<AccountId>,
    pub weeks: u32,
    pub min_followers: usize,
    pub active_only: bool,
}

pub fn extract_cohort(
    g: &FollowGraph,
    meta: &MetaTable,
    snapshot_time: i64,
    weeks: u32,
    min_followers: usize,
    active_only: bool,
) -> Cohort {
    let max_age = i64::from(weeks) * 7 * 86_400;
    let accounts = g
        .accounts()
        .filter(|&u| {
            let m = meta.get(u);
            let age = snapshot_time - m.created_at;
            (0..=max_age).contains(&age)
                && g.follower_count(u) >= min_followers
                && (!active_only || m.active)
        })
        .collect();
    Cohort {
        accounts,
        weeks,
        min_followers,
        active_only,
    }
}

/// Mid-ranks (1-based, ascending; ties get the average of their
/// positions).
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the mid-rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(EvalError::ConstantInput);
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Spearman rank correlation: Pearson correlation of mid-ranks.
/// Constant input on either side is an error, not a value.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(EvalError::TooFew(2, a.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    pearson(&mid_ranks(a), &mid_ranks(b))
}

/// nDCG@k over gains listed in predicted-rank order. The ideal DCG uses
/// the same gain multiset sorted descending; 0 when the ideal is 0.
/// `k` beyond the ranking length falls back to the full length.
pub fn ndcg_at_k(ranked_gains: &[f64], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    if ranked_gains.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(EvalError::InvalidGain);
    }
    let k = k.min(ranked_gains.len());
    let dcg: f64 = ranked_gains[..k]
        .iter()
        .enumerate()
        .map(|(i, &gain)| gain / ((i + 2) as f64).log2())
        .sum();
    let mut ideal = ranked_gains.to_vec();
    ideal.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let idcg: f64 = ideal[..k]
        .iter()
        .enumerate()
        .map(|(i, &gain)| gain / ((i + 2) as f64).log2())
        .sum();
    if idcg == 0.0 {
        Ok(0.0)
    } else {
        Ok(dcg / idcg)
    }
}

/// Rank-normalizes values into [0, 1] via mid-ranks. A constant column
/// maps to all 0.5.
pub fn rank_normalize(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return vec![0.5; n];
    }
    mid_ranks(values)
        .into_iter()
        .map(|r| (r - 1.0) / (n as f64 - 1.0))
        .collect()
}

/// Binary labels from a gain quantile: label = 1 iff the gain is
/// strictly above the value found at the quantile position of the
/// ascending-sorted gains.
pub fn quantile_labels(gains: &[f64], quantile: f64) -> Vec<bool> {
    if gains.is_empty() {
        return Vec::new();
    }
    let mut sorted = gains.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite gains"));
    let pos = ((sorted.len() - 1) as f64 * quantile.clamp(0.0, 1.0)).floor() as usize;
    let threshold = sorted[pos];
    gains.iter().map(|&v| v > threshold).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(eta: &[f64], y: &[f64]) -> f64 {
    // ln(mu) = -softplus(-eta), ln(1-mu) = -softplus(eta)
    fn softplus(x: f64) -> f64 {
        if x > 30.0 {
            x
        } else {
            (1.0 + x.exp()).ln()
        }
    }
    eta.iter()
        .zip(y)
        .map(|(&e, &t)| -t * softplus(-e) - (1.0 - t) * softplus(e))
        .sum()
}

/// Solves `a * x = b` in place via Gaussian elimination with partial
/// pivoting. Returns None when the matrix is singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite matrix")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot_row[col];
            for (k, &pv) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= factor * pv;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

const LR_MAX_ITERS: usize = 500;
const LR_GRAD_TOL: f64 = 1e-8;

/// Maximum-likelihood logistic fit via iteratively reweighted least
/// squares with step halving. `rows` holds one feature vector per
/// sample (no intercept column; one is added). Returns the coefficient
/// vector `[intercept, beta_1, ...]` and whether the gradient converged
/// below tolerance.
fn fit_logistic(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, bool) {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let dim = p + 1;
    let mut beta = vec![0.0; dim];
    let xval = |row: &[f64], j: usize| if j == 0 { 1.0 } else { row[j - 1] };

    let etas = |beta: &[f64]| -> Vec<f64> {
        rows.iter()
            .map(|row| {
                let mut e = beta[0];
                for (j, &x) in row.iter().enumerate() {
                    e += beta[j + 1] * x;
                }
                e
            })
            .collect()
    };

    let mut eta = etas(&beta);
    let mut ll = log_likelihood(&eta, y);
    for _ in 0..LR_MAX_ITERS {
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let mut grad = vec![0.0; dim];
        for (j, slot) in grad.iter_mut().enumerate() {
            for i in 0..n {
                *slot += (y[i] - mu[i]) * xval(&rows[i], j);
            }
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm < LR_GRAD_TOL {
            return (beta, true);
        }

        let mut hess = vec![vec![0.0; dim]; dim];
        for i in 0..n {
            let w = mu[i] * (1.0 - mu[i]);
            if w == 0.0 {
                continue;
            }
            for (j, row) in hess.iter_mut().enumerate() {
                let xj = xval(&rows[i], j);
                for (k, slot) in row.iter_mut().enumerate().skip(j) {
                    *slot += w * xj * xval(&rows[i], k);
                }
            }
        }
        // Mirror the upper triangle and ridge the diagonal to keep the
        // solve well-posed near separation.
        for j in 0..dim {
            let (upper_rows, rest) = hess.split_at_mut(j);
            let row = &mut rest[0];
            for (k, upper_row) in upper_rows.iter().enumerate() {
                row[k] = upper_row[j];
            }
            row[j] += 1e-12;
        }

        let Some(step) = solve(hess, grad) else {
            return (beta, false);
        };

        // Step halving: accept the first step that does not decrease
        // the log-likelihood.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect();
            let trial_eta = etas(&trial);
            let trial_ll = log_likelihood(&trial_eta, y);
            if trial_ll.is_finite() && trial_ll >= ll {
                beta = trial;
                eta = trial_eta;
                ll = trial_ll;
                accepted = true;
                break;
            }
            scale /= 2.0;
        }
        if !accepted {
            return (beta, false);
        }
    }
    (beta, false)
}

/// Result of the logistic combination.
#[derive(Debug, Clone)]
pub struct CombineResult {
    /// Out-of-fold predicted probability per account, the combined score.
    pub scores: Vec<f64>,
    pub intercept: f64,
    /// One coefficient per input feature, from the full-data fit
    /// (constant features get 0 by convention).
    pub coefficients: Vec<f64>,
    /// Indices of features that were constant after rank normalization.
    pub constant_features: Vec<usize>,
    pub full_fit_converged: bool,
    pub fold_converged: Vec<bool>,
}

/// Combines score tables through cross-validated logistic regression.
///
/// Features are rank-normalized to [0, 1]; each fold's model predicts
/// the held-out accounts, and those out-of-fold probabilities form the
/// combined score. Fold assignment is a seeded shuffle, so results are
/// reproducible for a given seed.
pub fn logistic_combine(
    features: &[Vec<f64>],
    labels: &[bool],
    folds: usize,
    seed: u64,
) -> Result<CombineResult, EvalError> {
    if features.is_empty() {
        return Err(EvalError::NoFeatures);
    }
    let n = labels.len();
    for f in features {
        if f.len() != n {
            return Err(EvalError::LengthMismatch(f.len(), n));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite);
        }
    }
    if folds < 2 {
        return Err(EvalError::BadFolds(format!("need at least 2, got {folds}")));
    }
    if n < folds {
        return Err(EvalError::BadFolds(format!(
            "more folds ({folds}) than samples ({n})"
        )));
    }

    let normalized: Vec<Vec<f64>> = features.iter().map(|f| rank_normalize(f)).collect();
    let usable: Vec<usize> = normalized
        .iter()
        .enumerate()
        .filter(|(_, f)| f.iter().any(|&v| v != f[0]))
        .map(|(i, _)| i)
        .collect();
    let constant_features: Vec<usize> = (0..features.len())
        .filter(|i| !usable.contains(i))
        .collect();

    let y: Vec<f64> = labels.iter().map(|&b| f64::from(u8::from(b))).collect();
    let row = |i: usize| -> Vec<f64> { usable.iter().map(|&f| normalized[f][i]).collect() };

    // Deterministic fold assignment: seeded shuffle, then round-robin.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }

    let mut scores = vec![0.0; n];
    let mut fold_converged = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let rows: Vec<Vec<f64>> = train.iter().map(|&i| row(i)).collect();
        let targets: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let (beta, converged) = fit_logistic(&rows, &targets);
        fold_converged.push(converged);
        for i in (0..n).filter(|&i| fold_of[i] == fold) {
            let features_i = row(i);
            let mut eta = beta[0];
            for (j, &x) in features_i.iter().enumerate() {
                eta += beta[j + 1] * x;
            }
            scores[i] = sigmoid(eta);
        }
    }

    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    let (beta, full_fit_converged) = fit_logistic(&rows, &y);
    let mut coefficients = vec![0.0; features.len()];
    for (slot, &feature) in usable.iter().enumerate() {
        coefficients[feature] = beta[slot + 1];
    }

    Ok(CombineResult {
        scores,
        intercept: beta[0],
        coefficients,
        constant_features,
        full_fit_converged,
        fold_converged,
    })
}

/// Writes `account_id<TAB>score_rank<TAB>gain_rank` with descending
/// mid-ranks (rank 1 = best), one row per account, sorted by id.
pub fn scatter_export<W: Write>(
    ids: &[u64],
    scores: &[f64],
    gains: &[f64],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "# account_id\tscore_rank\tgain_rank")?;
    let n = ids.len() as f64;
    let score_ranks = mid_ranks(scores);
    let gain_ranks = mid_ranks(gains);
    let mut rows: Vec<(u64, f64, f64)> = ids
        .iter()
        .zip(score_ranks.iter().zip(&gain_ranks))
        .map(|(&id, (&sr, &gr))| (id, n + 1.0 - sr, n + 1.0 - gr))
        .collect();
    rows.sort_by_key(|&(id, _, _)| id);
    for (id, sr, gr) in rows {
        writeln!(out, "{id}\t{sr}\t{gr}")?;
    }
    Ok(())
}

/// One row of the metric report: `metric<TAB>method<TAB>cohort<TAB>value`.
pub fn write_metric_row<W: Write>(
    metric: &str,
    method: &str,
    cohort: &str,
    value: f64,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{metric}\t{method}\t{cohort}\t{value}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AccountMeta, FollowGraph};
    use proptest::prelude::*;

    fn id(x: u64) -> AccountId {
        AccountId(x as u32)
    }

    fn meta_for(created: &[i64]) -> MetaTable {
        MetaTable::new(
            created
                .iter()
                .map(|&c| AccountMeta {
                    created_at: c,
                    active: true,
                    fw_nr_horizon: Some(0),
                })
                .collect(),
        )
    }

    #[test]
    fn cohort_membership() {
        let week = 7 * 86_400;
        // Account 0 created 1 week before the snapshot, with 2 followers.
        let g = FollowGraph::from_edges(3, &[(1, 1, 0), (2, 2, 0)]).unwrap();
        let meta = meta_for(&[week, 0, 0]);
        let snapshot = 2 * week;

        let c = extract_cohort(&g, &meta, snapshot, 2, 2, false);
        assert_eq!(c.accounts, vec![id(0)]);
        // Raising the follower threshold excludes it.
        let c = extract_cohort(&g, &meta, snapshot, 2, 3, false);
        assert!(c.accounts.is_empty());
        // Too old for a 1-week window at a later snapshot.
        let c = extract_cohort(&g, &meta, 3 * week, 1, 1, false);
        assert!(c.accounts.is_empty());
        // Accounts created after the snapshot never qualify.
        let c = extract_cohort(&g, &meta, week / 2, 2, 0, false);
        assert!(!c.accounts.contains(&id(0)));
    }

    #[test]
    fn cohort_nesting() {
        let week = 7 * 86_400;
        let g = FollowGraph::from_edges(5, &[(1, 1, 0), (2, 2, 0), (3, 0, 1)]).unwrap();
        let meta = meta_for(&[0, week, 2 * week, 3 * week, 4 * week]);
        let snapshot = 4 * week;
        for min in 0..2 {
            let narrow = extract_cohort(&g, &meta, snapshot, 2, min, false);
            let wide = extract_cohort(&g, &meta, snapshot, 4, min, false);
            for u in &narrow.accounts {
                assert!(wide.accounts.contains(u));
            }
        }
        let strict = extract_cohort(&g, &meta, snapshot, 4, 2, false);
        let loose = extract_cohort(&g, &meta, snapshot, 4, 1, false);
        for u in &strict.accounts {
            assert!(loose.accounts.contains(u));
        }
    }

    #[test]
    fn cohort_active_only() {
        let week = 7 * 86_400;
        let g = FollowGraph::from_edges(2, &[(1, 1, 0)]).unwrap();
        let meta = MetaTable::new(vec![
            AccountMeta { created_at: 0, active: false, fw_nr_horizon: Some(1) },
            AccountMeta { created_at: 0, active: true, fw_nr_horizon: Some(1) },
        ]);
        let all = extract_cohort(&g, &meta, week, 1, 0, false);
        assert_eq!(all.accounts.len(), 2);
        let active = extract_cohort(&g, &meta, week, 1, 0, true);
        assert_eq!(active.accounts, vec![id(1)]);
    }

    #[test]
    fn spearman_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman_rho(&a, &a).unwrap(), 1.0);
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman_rho(&a, &rev).unwrap(), -1.0);
        let b = [1.0, 3.0, 2.0, 4.0];
        assert!((spearman_rho(&a, &b).unwrap() - 0.8).abs() < 1e-12);

        assert_eq!(
            spearman_rho(&[1.0, 1.0, 1.0], &a[..3]),
            Err(EvalError::ConstantInput)
        );
        assert_eq!(spearman_rho(&[1.0], &[2.0]), Err(EvalError::TooFew(2, 1)));
    }

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[10.0, 10.0]), vec![1.5, 1.5]);
        assert_eq!(mid_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(mid_ranks(&[5.0, 1.0, 5.0, 0.0]), vec![3.5, 2.0, 3.5, 1.0]);
    }

    #[test]
    fn ndcg_cases() {
        // Already gain-sorted.
        assert_eq!(ndcg_at_k(&[3.0, 2.0, 1.0], 3).unwrap(), 1.0);
        // All gains equal: any order is ideal.
        assert_eq!(ndcg_at_k(&[2.0, 2.0, 2.0], 2).unwrap(), 1.0);
        // Worst-first with gains (0, 1) at k = 2.
        let got = ndcg_at_k(&[0.0, 1.0], 2).unwrap();
        let expected = (1.0 / 3.0f64.log2()) / 1.0;
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.6309).abs() < 1e-4);
        // k beyond the length uses the full ranking.
        assert_eq!(ndcg_at_k(&[1.0, 2.0], 10).unwrap(), ndcg_at_k(&[1.0, 2.0], 2).unwrap());
        // Zero ideal.
        assert_eq!(ndcg_at_k(&[0.0, 0.0], 2).unwrap(), 0.0);
        assert_eq!(ndcg_at_k(&[1.0], 0), Err(EvalError::InvalidK));
        assert_eq!(ndcg_at_k(&[-1.0], 1), Err(EvalError::InvalidGain));
    }

    #[test]
    fn scatter_rows_use_descending_mid_ranks() {
        let mut buf = Vec::new();
        scatter_export(&[7, 8], &[1.0, 1.0], &[5.0, 2.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "7\t1.5\t1");
        assert_eq!(lines[2], "8\t1.5\t2");

        let mut buf = Vec::new();
        scatter_export(&[], &[], &[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn logistic_separable_orders_by_label() {
        let n = 40;
        let labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let feature: Vec<f64> = labels.iter().map(|&b| f64::from(u8::from(b))).collect();
        let result = logistic_combine(&[feature], &labels, 4, 42).unwrap();
        let pos_min = result
            .scores
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l)
            .map(|(s, _)| *s)
            .fold(f64::INFINITY, f64::min);
        let neg_max = result
            .scores
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| !l)
            .map(|(s, _)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            pos_min > neg_max,
            "out-of-fold scores must separate the labels: {pos_min} vs {neg_max}"
        );
    }

    #[test]
    fn logistic_random_feature_gets_smaller_weight() {
        // Deterministic synthetic fixture: informative feature follows
        // the labels, the other is label-independent noise.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        use rand::Rng;
        let n = 400;
        let labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
        let informative: Vec<f64> = labels
            .iter()
            .map(|&b| f64::from(u8::from(b)) + 0.2 * rng.random::<f64>())
            .collect();
        let noise: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let result = logistic_combine(&[informative, noise.clone()], &labels, 10, 42).unwrap();
        assert!(
            result.coefficients[0].abs() > result.coefficients[1].abs(),
            "informative {} vs noise {}",
            result.coefficients[0],
            result.coefficients[1]
        );

        // A noise-only model correlates weakly with the labels.
        let y: Vec<f64> = labels.iter().map(|&b| f64::from(u8::from(b))).collect();
        let noise_only = logistic_combine(&[noise], &labels, 10, 42).unwrap();
        let rho = spearman_rho(&noise_only.scores, &y).unwrap_or(0.0);
        assert!(rho.abs() < 0.25, "noise correlation {rho}");
    }

    #[test]
    fn logistic_duplicate_features_keep_the_ranking() {
        // Overlapping classes keep the likelihood bounded, so both fits
        // converge to the same effective weight and the orderings agree.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use rand::Rng;
        let n = 80;
        let labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
        let feature: Vec<f64> = labels
            .iter()
            .map(|&b| f64::from(u8::from(b)) + 1.5 * rng.random::<f64>())
            .collect();
        let single = logistic_combine(std::slice::from_ref(&feature), &labels, 4, 42).unwrap();
        let double = logistic_combine(&[feature.clone(), feature], &labels, 4, 42).unwrap();
        assert!(single.full_fit_converged && double.full_fit_converged);
        let order = |scores: &[f64]| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
            idx
        };
        assert_eq!(order(&single.scores), order(&double.scores));
    }

    #[test]
    fn logistic_constant_feature_reports_zero_coefficient() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let constant = vec![3.0; 20];
        let informative: Vec<f64> = labels.iter().map(|&b| f64::from(u8::from(b))).collect();
        let result = logistic_combine(&[constant, informative], &labels, 4, 1).unwrap();
        assert_eq!(result.coefficients[0], 0.0);
        assert_eq!(result.constant_features, vec![0]);
        assert!(result.coefficients[1] > 0.0);
    }

    #[test]
    fn logistic_rejects_bad_shapes() {
        assert!(matches!(
            logistic_combine(&[], &[true, false], 2, 0),
            Err(EvalError::NoFeatures)
        ));
        assert!(matches!(
            logistic_combine(&[vec![1.0]], &[true], 2, 0),
            Err(EvalError::BadFolds(_))
        ));
        assert!(matches!(
            logistic_combine(&[vec![1.0, 2.0]], &[true, false], 1, 0),
            Err(EvalError::BadFolds(_))
        ));
    }

    proptest! {
        #[test]
        fn spearman_symmetric_and_monotone_invariant(
            pairs in proptest::collection::vec((0u8..20, 0u8..20), 3..40),
        ) {
            let a: Vec<f64> = pairs.iter().map(|&(x, _)| f64::from(x)).collect();
            let b: Vec<f64> = pairs.iter().map(|&(_, y)| f64::from(y)).collect();
            let lhs = spearman_rho(&a, &b);
            prop_assert_eq!(lhs.clone(), spearman_rho(&b, &a));
            if let Ok(rho) = lhs {
                // Strictly monotone transforms leave ranks unchanged.
                let a2: Vec<f64> = a.iter().map(|&x| 3.0 * x + 7.0).collect();
                let b2: Vec<f64> = b.iter().map(|&y| (y + 1.0).powi(3)).collect();
                prop_assert_eq!(rho, spearman_rho(&a2, &b).unwrap());
                prop_assert_eq!(rho, spearman_rho(&a, &b2).unwrap());
            }
        }

        #[test]
        fn spearman_matches_brute_force(
            pairs in proptest::collection::vec((0u8..10, 0u8..10), 2..30),
        ) {
            let a: Vec<f64> = pairs.iter().map(|&(x, _)| f64::from(x)).collect();
            let b: Vec<f64> = pairs.iter().map(|&(_, y)| f64::from(y)).collect();
            // Independent reference: counting ranks, direct Pearson sums.
            fn ref_ranks(v: &[f64]) -> Vec<f64> {
                v.iter()
                    .map(|&x| {
                        let below = v.iter().filter(|&&o| o < x).count() as f64;
                        let equal = v.iter().filter(|&&o| o == x).count() as f64;
                        below + (equal + 1.0) / 2.0
                    })
                    .collect()
            }
            let ra = ref_ranks(&a);
            let rb = ref_ranks(&b);
            let n = ra.len() as f64;
            let ma = ra.iter().sum::<f64>() / n;
            let mb = rb.iter().sum::<f64>() / n;
            let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
            let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
            if va == 0.0 || vb == 0.0 {
                prop_assert_eq!(spearman_rho(&a, &b), Err(EvalError::ConstantInput));
            } else {
                let reference = cov / (va * vb).sqrt();
                let got = spearman_rho(&a, &b).unwrap();
                prop_assert!((got - reference).abs() < 1e-12);
            }
        }

        #[test]
        fn ndcg_invariant_under_monotone_score_transform(
            gains in proptest::collection::vec(0u8..10, 1..25),
            k in 1usize..30,
        ) {
            // Build a ranking from synthetic scores, then transform the
            // scores monotonically: the induced ranking (and nDCG) must
            // not change.
            let n = gains.len();
            let scores: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
            let ranked: Vec<f64> = order.iter().map(|&i| f64::from(gains[i])).collect();

            let transformed: Vec<f64> = scores.iter().map(|&s| s.exp() + 1.0).collect();
            let mut order2: Vec<usize> = (0..n).collect();
            order2.sort_by(|&a, &b| {
                transformed[b].partial_cmp(&transformed[a]).unwrap().then(a.cmp(&b))
            });
            let ranked2: Vec<f64> = order2.iter().map(|&i| f64::from(gains[i])).collect();

            prop_assert_eq!(ndcg_at_k(&ranked, k).unwrap(), ndcg_at_k(&ranked2, k).unwrap());
        }

        #[test]
        fn ndcg_is_one_iff_top_k_gain_sorted(
            gains in proptest::collection::vec(0u8..5, 2..15),
        ) {
            let mut sorted: Vec<f64> = gains.iter().map(|&g| f64::from(g)).collect();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if sorted.iter().sum::<f64>() > 0.0 {
                prop_assert_eq!(ndcg_at_k(&sorted, gains.len()).unwrap(), 1.0);
            }
        }
    }
}
