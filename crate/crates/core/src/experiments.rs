//! Ranking metrics and the experiment drivers built on them.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{split_leave_last, Dataset};
use crate::model::{build_pooled_rows, rank_movies, train, ModelConfig, Ranker, Scorer};
use crate::novelty::{ani_matrix, ani_row, uni, NoveltyConfig};
use crate::numcore::RngState;
use crate::{Error, Result};

/// `1 / log2(rank + 1)`: nDCG over the full list with one relevant item.
pub fn ndcg_at_rank(rank: usize) -> f64 {
    assert!(rank >= 1, "ranks are 1-based");
    1.0 / ((rank + 1) as f64).log2()
}

/// nDCG@all of `relevant` within `ranked`.
pub fn ndcg_all(ranked: &[u32], relevant: u32) -> Result<f64> {
    ranked
        .iter()
        .position(|&m| m == relevant)
        .map(|i| ndcg_at_rank(i + 1))
        .ok_or_else(|| Error::Validation(format!("movie {relevant} is not in the ranked list")))
}

/// Exact expected nDCG@all when the relevant item's rank is uniform over
/// `1..=n`.
pub fn random_baseline_expectation(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation(
            "random baseline needs at least one candidate".into(),
        ));
    }
    Ok((1..=n).map(ndcg_at_rank).sum::<f64>() / n as f64)
}

/// Mean nDCG@all of `trials` uniformly drawn ranks.
pub fn random_baseline_empirical(n: usize, trials: usize, rng: &mut RngState) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(Error::Validation(
            "random baseline needs n >= 1 and trials >= 1".into(),
        ));
    }
    let total: f64 = (0..trials).map(|_| ndcg_at_rank(rng.index(n) + 1)).sum();
    Ok(total / trials as f64)
}

/// Standard deviation of nDCG@all under a uniform rank over `1..=n`.
pub fn random_baseline_std(n: usize) -> Result<f64> {
    let mean = random_baseline_expectation(n)?;
    let second = (1..=n).map(|r| ndcg_at_rank(r).powi(2)).sum::<f64>() / n as f64;
    Ok((second - mean * mean).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub user_id: u32,
    pub holdout_movie_id: u32,
    pub rank: usize,
    pub ndcg: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub records: Vec<EvalRecord>,
    /// Arithmetic mean of the per-user nDCG values.
    pub mean: f64,
    /// Users with fewer than two actions.
    pub skipped: Vec<u32>,
    /// Mean over users of the random-ranking expectation for their
    /// candidate count.
    pub random_expectation: f64,
}

/// Leave-last-out evaluation: for each user, score the catalog with the ANI
/// row at the holdout time (computed from the prefix only) and record where
/// the held-out movie lands.
pub fn evaluate_users<R: Ranker + ?Sized>(
    ranker: &R,
    dataset: &Dataset,
    users: &[u32],
    k: usize,
    exclude_seen: bool,
) -> Result<EvalSummary> {
    let catalog = &dataset.catalog;
    let novelty = NoveltyConfig::new(k, catalog.tag_count())?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut expectation = 0.0;
    for &user_id in users {
        let seq = dataset.sequence(user_id)?;
        let (prefix, holdout) = match split_leave_last(seq) {
            Ok(split) => split,
            Err(Error::InsufficientHistory { .. }) => {
                log::warn!("user {user_id}: fewer than two actions, skipped");
                skipped.push(user_id);
                continue;
            }
            Err(e) => return Err(e),
        };
        let user = catalog
            .user(user_id)
            .ok_or_else(|| Error::Validation(format!("unknown user id {user_id}")))?;
        let tags = catalog.tag_sets(prefix)?;
        let row: Vec<f64> = ani_row(&tags, prefix.len() + 1, novelty)?;
        let exclude: HashSet<u32> = if exclude_seen {
            prefix
                .iter()
                .map(|e| e.movie_id)
                .filter(|&m| m != holdout.movie_id)
                .collect()
        } else {
            HashSet::new()
        };
        let ranked = rank_movies(ranker, user, &row, catalog, &exclude)?;
        let ids: Vec<u32> = ranked.iter().map(|&(m, _)| m).collect();
        let ndcg = ndcg_all(&ids, holdout.movie_id)?;
        let rank = ids
            .iter()
            .position(|&m| m == holdout.movie_id)
            .expect("found above")
            + 1;
        expectation += random_baseline_expectation(ids.len())?;
        records.push(EvalRecord {
            user_id,
            holdout_movie_id: holdout.movie_id,
            rank,
            ndcg,
            candidates: ids.len(),
        });
    }
    if records.is_empty() {
        return Err(Error::Validation("no evaluable users".into()));
    }
    let n = records.len() as f64;
    Ok(EvalSummary {
        mean: records.iter().map(|r| r.ndcg).sum::<f64>() / n,
        random_expectation: expectation / n,
        records,
        skipped,
    })
}

/// Ascending `min, min+step, ..., <= max`.
pub fn k_grid(min: usize, max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(Error::Validation("k step must be at least 1".into()));
    }
    if min == 0 || max < min {
        return Err(Error::Validation(format!("invalid k range [{min}, {max}]")));
    }
    Ok((min..=max).step_by(step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// A separate model per user and k.
    PerUser,
    /// One model per k, trained on all selected users together.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub k: usize,
    pub user_id: u32,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub k: usize,
    pub user_id: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
}

impl SweepOutcome {
    /// Mean nDCG per k, in grid order.
    pub fn mean_by_k(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64, usize)> = Vec::new();
        for r in &self.records {
            match out.last_mut() {
                Some((k, sum, n)) if *k == r.k => {
                    *sum += r.ndcg;
                    *n += 1;
                }
                _ => out.push((r.k, r.ndcg, 1)),
            }
        }
        out.into_iter().map(|(k, s, n)| (k, s / n as f64)).collect()
    }
}

fn train_and_evaluate(
    dataset: &Dataset,
    users: &[u32],
    config: &ModelConfig,
    exclude_seen: bool,
) -> Result<Vec<SweepRecord>> {
    let (rows, _) = build_pooled_rows::<f64>(dataset, users, config.k)?;
    let outcome = train(&rows, config, &dataset.catalog)?;
    let scorer = Scorer::new(&outcome.params, &dataset.catalog)?;
    let summary = evaluate_users(&scorer, dataset, users, config.k, exclude_seen)?;
    Ok(summary
        .records
        .into_iter()
        .map(|r| SweepRecord {
            k: config.k,
            user_id: r.user_id,
            ndcg: r.ndcg,
        })
        .collect())
}

/// Retrains for every k in `grid` (every cell from the same seed, so k is
/// the only thing that changes) and records the holdout nDCG@all. Cells run
/// in parallel; results come back in grid order. Failed cells are reported
/// rather than aborting the sweep.
pub fn sweep_k(
    dataset: &Dataset,
    users: &[u32],
    grid: &[usize],
    config: &ModelConfig,
    mode: SweepMode,
    exclude_seen: bool,
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::Empty("k grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "k grid must be strictly ascending".into(),
        ));
    }
    if users.is_empty() {
        return Err(Error::Empty("sweep users"));
    }
    for &u in users {
        dataset.sequence(u)?;
    }
    let cells: Vec<(usize, Option<u32>)> = match mode {
        SweepMode::PerUser => grid
            .iter()
            .flat_map(|&k| users.iter().map(move |&u| (k, Some(u))))
            .collect(),
        SweepMode::Shared => grid.iter().map(|&k| (k, None)).collect(),
    };
    let results: Vec<Result<Vec<SweepRecord>>> = cells
        .par_iter()
        .map(|&(k, user)| {
            let cfg = ModelConfig {
                k,
                ..config.clone()
            };
            let selected: Vec<u32> = match user {
                Some(u) => vec![u],
                None => users.to_vec(),
            };
            train_and_evaluate(dataset, &selected, &cfg, exclude_seen)
        })
        .collect();

    let mut outcome = SweepOutcome::default();
    for ((k, user_id), result) in cells.into_iter().zip(results) {
        match result {
            Ok(records) => outcome.records.extend(records),
            Err(e) => {
                log::warn!("sweep cell k={k} user={user_id:?} failed: {e}");
                outcome.failures.push(SweepFailure {
                    k,
                    user_id,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniPoint {
    pub user_id: u32,
    pub t: usize,
    pub uni: f64,
}

/// UNI at each of the first `max_steps` actions of every selected user.
pub fn uni_report(
    dataset: &Dataset,
    users: &[u32],
    k: usize,
    max_steps: usize,
) -> Result<Vec<UniPoint>> {
    let novelty = NoveltyConfig::new(k, dataset.catalog.tag_count())?;
    let mut out = Vec::new();
    for &user_id in users {
        let seq = dataset.sequence(user_id)?;
        let steps = seq.len().min(max_steps);
        if steps == 0 {
            continue;
        }
        let tags = dataset.catalog.tag_sets(&seq.events[..steps])?;
        let matrix = ani_matrix::<f64, _>(user_id, &tags, novelty)?;
        for (i, row) in matrix.rows().enumerate() {
            out.push(UniPoint {
                user_id,
                t: i + 1,
                uni: uni(row)?,
            });
        }
    }
    Ok(out)
}

pub fn write_eval_csv(mut w: impl Write, records: &[EvalRecord]) -> Result<()> {
    writeln!(w, "user_id,holdout_movie_id,rank,ndcg")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{:.6}",
            r.user_id, r.holdout_movie_id, r.rank, r.ndcg
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv(mut w: impl Write, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "k,user_id,ndcg")?;
    for r in records {
        writeln!(w, "{},{},{:.6}", r.k, r.user_id, r.ndcg)?;
    }
    Ok(())
}

pub fn write_uni_csv(mut w: impl Write, points: &[UniPoint]) -> Result<()> {
    writeln!(w, "user_id,t,uni")?;
    for p in points {
        writeln!(w, "{},{},{:.6}", p.user_id, p.t, p.uni)?;
    }
    Ok(())
}

/// `epoch,mean_loss`, losses in shortest round-trip form.
pub fn write_loss_csv(mut w: impl Write, trace: &[f64]) -> Result<()> {
    writeln!(w, "epoch,mean_loss")?;
    for (i, l) in trace.iter().enumerate() {
        writeln!(w, "{},{l:?}", i + 1)?;
    }
    Ok(())
}
