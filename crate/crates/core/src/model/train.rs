use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::params::{ModelParams, ParamVars};
use super::towers::{demographics_vector, movie_tower, predict_rating, user_tower};
use super::ModelConfig;
use crate::dataset::{
    oversample_low_ratings, split_leave_last, user_mean_and_center, Catalog, Dataset, RatingEvent,
    RawRating,
};
use crate::novelty::{ani_matrix, NoveltyConfig};
use crate::numcore::{sgd_step, Graph, RngState, Var};
use crate::{Error, Real, Result};

/// One training example: a past action with its ANI row and centered rating.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow<T> {
    pub user_id: u32,
    /// 1-based time of the action within the user's prefix.
    pub t: usize,
    pub movie_id: u32,
    pub ani: Vec<T>,
    /// `rating - mean rating` over the prefix.
    pub target: T,
    pub rating: u8,
}

impl<T> RawRating for TrainingRow<T> {
    fn raw_rating(&self) -> u8 {
        self.rating
    }
}

/// Rows for every action of `prefix`; ANI is computed on the prefix before
/// low ratings are duplicated.
pub fn build_training_rows<T: Real>(
    user_id: u32,
    prefix: &[RatingEvent],
    catalog: &Catalog,
    k: usize,
) -> Result<Vec<TrainingRow<T>>> {
    if prefix.is_empty() {
        return Err(Error::Empty("training prefix"));
    }
    let novelty = NoveltyConfig::new(k, catalog.tag_count())?;
    let tags = catalog.tag_sets(prefix)?;
    let ani = ani_matrix::<T, _>(user_id, &tags, novelty)?;
    let (_, centered) = user_mean_and_center::<T>(prefix)?;
    let rows = prefix
        .iter()
        .zip(centered)
        .enumerate()
        .map(|(i, (e, target))| TrainingRow {
            user_id,
            t: i + 1,
            movie_id: e.movie_id,
            ani: ani.row(i + 1).to_vec(),
            target,
            rating: e.rating,
        })
        .collect();
    Ok(oversample_low_ratings(rows))
}

/// Leave-last-out training rows pooled over `users`. Users with fewer than
/// two actions are skipped and returned in the second slot.
pub fn build_pooled_rows<T: Real>(
    dataset: &Dataset,
    users: &[u32],
    k: usize,
) -> Result<(Vec<TrainingRow<T>>, Vec<u32>)> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &u in users {
        let seq = dataset.sequence(u)?;
        match split_leave_last(seq) {
            Ok((prefix, _)) => rows.extend(build_training_rows(u, prefix, &dataset.catalog, k)?),
            Err(Error::InsufficientHistory { .. }) => skipped.push(u),
            Err(e) => return Err(e),
        }
    }
    Ok((rows, skipped))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: ModelParams<T>,
    /// Mean per-row loss of each completed epoch.
    pub loss_trace: Vec<f64>,
    pub converged: bool,
}

/// Records the forward pass for a mini-batch and returns the MSE node.
/// Each distinct movie's tower is evaluated once and shared by its rows.
pub fn batch_forward<T: Real>(
    g: &mut Graph<'_, T>,
    p: &ParamVars,
    rows: &[&TrainingRow<T>],
    catalog: &Catalog,
) -> Result<Var> {
    let mut movies: HashMap<u32, Var> = HashMap::new();
    let mut preds = Vec::with_capacity(rows.len());
    let mut targets = Vec::with_capacity(rows.len());
    for row in rows {
        let x = match movies.get(&row.movie_id) {
            Some(&x) => x,
            None => {
                let movie = catalog
                    .movie(row.movie_id)
                    .ok_or_else(|| Error::OutOfRange(format!("unknown movie {}", row.movie_id)))?;
                let x = movie_tower(g, p, movie)?;
                movies.insert(row.movie_id, x);
                x
            }
        };
        let user = catalog
            .user(row.user_id)
            .ok_or_else(|| Error::OutOfRange(format!("unknown user {}", row.user_id)))?;
        let u = user_tower(g, p, &demographics_vector(user), &row.ani)?;
        preds.push(predict_rating(g, u, x)?);
        targets.push(row.target);
    }
    g.mse_loss(&preds, &targets)
}

/// Mean squared error of one mini-batch and the parameter gradients, in
/// parameter order.
pub fn batch_loss<T: Real>(
    params: &ModelParams<T>,
    rows: &[&TrainingRow<T>],
    catalog: &Catalog,
) -> Result<(T, [Vec<T>; 8])> {
    let mut g = Graph::new();
    let p = ParamVars::bind(&mut g, params);
    let loss = batch_forward(&mut g, &p, rows, catalog)?;
    let grads = g.backward(loss)?;
    let value = g.scalar(loss)?;
    let per_param = p
        .all()
        .map(|v| grads.get(v).map(<[T]>::to_vec).unwrap_or_default());
    Ok((value, per_param))
}

/// Mini-batch gradient descent from a seeded Gaussian initialization.
///
/// Each epoch shuffles the rows with a generator derived from the master
/// seed and the epoch number. Training stops after `max_epochs`, or once the
/// relative improvement of the epoch loss has stayed below
/// `convergence_tolerance` for three consecutive epochs.
pub fn train<T: Real>(
    rows: &[TrainingRow<T>],
    config: &ModelConfig,
    catalog: &Catalog,
) -> Result<TrainOutcome<T>> {
    let params = ModelParams::for_catalog(config, catalog)?;
    train_from(params, rows, catalog)
}

pub fn train_from<T: Real>(
    mut params: ModelParams<T>,
    rows: &[TrainingRow<T>],
    catalog: &Catalog,
) -> Result<TrainOutcome<T>> {
    if rows.is_empty() {
        return Err(Error::Empty("training rows"));
    }
    let config = params.config.clone();
    config.validate()?;
    params.check_catalog(catalog)?;
    let lr = T::from_f64_lossy(config.learning_rate);

    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut loss_trace = Vec::new();
    let mut stalled = 0;
    let mut converged = false;
    for epoch in 1..=config.max_epochs {
        let mut shuffle = RngState::derive(config.seed, epoch as u64);
        order.shuffle(shuffle.generator());

        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&TrainingRow<T>> = chunk.iter().map(|&i| &rows[i]).collect();
            let (loss, grads) = batch_loss(&params, &batch, catalog)?;
            total += loss.to_f64_lossy() * batch.len() as f64;
            for (tensor, g) in params.tensors_mut().into_iter().zip(grads) {
                if !g.is_empty() {
                    tensor.accumulate_grad(&g)?;
                }
            }
            sgd_step(params.tensors_mut(), lr);
        }
        let mean = total / rows.len() as f64;
        if !mean.is_finite()
            || params
                .tensors()
                .iter()
                .any(|t| t.values().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        log::debug!("epoch {epoch}: mean loss {mean}");

        if let Some(&prev) = loss_trace.last() {
            let improvement = if prev == 0.0 {
                0.0
            } else {
                (prev - mean) / prev
            };
            if improvement < config.convergence_tolerance {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        loss_trace.push(mean);
        if stalled >= 3 {
            converged = true;
            break;
        }
    }
    Ok(TrainOutcome {
        params,
        loss_trace,
        converged,
    })
}
