//! Forward wiring of the two towers.
//!
//! Movie: title tokens -> embeddings -> conv -> ReLU -> max-over-time,
//! concatenated with the summed tag embeddings, then one linear layer.
//! User: demographics one-hots concatenated with the ANI row, then one linear
//! layer. The predicted (centered) rating is the dot product of the two.

use super::params::{ParamVars, DEMOGRAPHICS_LEN};
use crate::dataset::{Gender, Movie, UserProfile};
use crate::numcore::{Graph, Var};
use crate::{Error, Real, Result, Scalar};

pub fn demographics_vector<T: Scalar>(user: &UserProfile) -> Vec<T> {
    let mut d = vec![T::zero(); DEMOGRAPHICS_LEN];
    let gender = match user.gender {
        Gender::Male => 0,
        Gender::Female => 1,
    };
    d[gender] = T::one();
    d[2 + user.age.index()] = T::one();
    d[9 + usize::from(user.occupation)] = T::one();
    d
}

/// Latent vector `X_m`. Depends only on the movie and the parameters.
pub fn movie_tower<T: Real>(g: &mut Graph<'_, T>, p: &ParamVars, movie: &Movie) -> Result<Var> {
    let ids: Vec<usize> = movie.title_tokens.iter().map(|&t| t as usize).collect();
    let embedded = g.embedding_seq(p.token_embedding, &ids)?;
    let conv = g.conv1d(embedded, p.conv_kernels, p.conv_bias)?;
    let act = g.relu(conv);
    let title = g.max_pool_over_time(act)?;
    let tags = g.embedding_sum(p.tag_embedding, &movie.tags)?;
    let features = g.concat(&[title, tags])?;
    g.affine(features, p.movie_weights, p.movie_bias)
}

/// Latent vector `U_t` from demographics and the ANI row at `t`.
pub fn user_tower<T: Real>(
    g: &mut Graph<'_, T>,
    p: &ParamVars,
    demographics: &[T],
    ani_row: &[T],
) -> Result<Var> {
    if demographics.len() != DEMOGRAPHICS_LEN {
        return Err(Error::Shape(format!(
            "demographics vector of length {}, expected {DEMOGRAPHICS_LEN}",
            demographics.len()
        )));
    }
    let expected = g.shape(p.user_weights)[1] - DEMOGRAPHICS_LEN;
    if ani_row.len() != expected {
        return Err(Error::Shape(format!(
            "ANI row of length {}, model expects {expected}",
            ani_row.len()
        )));
    }
    let mut input = demographics.to_vec();
    input.extend_from_slice(ani_row);
    let x = g.input(input);
    g.affine(x, p.user_weights, p.user_bias)
}

pub fn predict_rating<T: Real>(g: &mut Graph<'_, T>, user: Var, movie: Var) -> Result<Var> {
    g.dot(user, movie)
}
