use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::params::{ModelParams, ParamVars};
use super::towers::{demographics_vector, movie_tower, user_tower};
use crate::dataset::{Catalog, Movie, UserProfile};
use crate::numcore::Graph;
use crate::{Error, Real, Result};

/// Anything that can score candidate movies for a user at one point in time.
pub trait Ranker {
    fn score(&self, user: &UserProfile, ani_row: &[f64], movies: &[&Movie]) -> Result<Vec<f64>>;
}

/// Trained parameters with every catalog movie's latent vector cached.
/// Movie latents do not depend on the user or time, so they are computed
/// once up front.
#[derive(Debug)]
pub struct Scorer<'p, T> {
    params: &'p ModelParams<T>,
    movie_latents: HashMap<u32, Vec<T>>,
}

impl<'p, T: Real> Scorer<'p, T> {
    pub fn new(params: &'p ModelParams<T>, catalog: &Catalog) -> Result<Self> {
        params.check_catalog(catalog)?;
        let movies: Vec<&Movie> = catalog.movies().collect();
        let movie_latents = movies
            .par_iter()
            .map(|m| Ok((m.movie_id, Self::encode(params, m)?)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(Self {
            params,
            movie_latents,
        })
    }

    fn encode(params: &ModelParams<T>, movie: &Movie) -> Result<Vec<T>> {
        let mut g = Graph::new();
        let p = ParamVars::bind(&mut g, params);
        let x = movie_tower(&mut g, &p, movie)?;
        Ok(g.value(x).to_vec())
    }

    pub fn movie_latent(&self, movie_id: u32) -> Option<&[T]> {
        self.movie_latents.get(&movie_id).map(Vec::as_slice)
    }

    pub fn user_latent(&self, user: &UserProfile, ani_row: &[T]) -> Result<Vec<T>> {
        let mut g = Graph::new();
        let p = ParamVars::bind(&mut g, self.params);
        let u = user_tower(&mut g, &p, &demographics_vector(user), ani_row)?;
        Ok(g.value(u).to_vec())
    }
}

impl<T: Real> Ranker for Scorer<'_, T> {
    fn score(&self, user: &UserProfile, ani_row: &[f64], movies: &[&Movie]) -> Result<Vec<f64>> {
        let ani: Vec<T> = ani_row.iter().map(|&x| T::from_f64_lossy(x)).collect();
        let u = self.user_latent(user, &ani)?;
        movies
            .iter()
            .map(|m| {
                let x = match self.movie_latents.get(&m.movie_id) {
                    Some(x) => x.clone(),
                    None => Self::encode(self.params, m)?,
                };
                let r = u
                    .iter()
                    .zip(&x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                Ok(r.to_f64_lossy())
            })
            .collect()
    }
}

/// All catalog movies not in `exclude`, ordered by predicted rating
/// (descending) with ties broken by ascending movie id.
pub fn rank_movies<R: Ranker + ?Sized>(
    ranker: &R,
    user: &UserProfile,
    ani_row: &[f64],
    catalog: &Catalog,
    exclude: &HashSet<u32>,
) -> Result<Vec<(u32, f64)>> {
    let movies: Vec<&Movie> = catalog
        .movies()
        .filter(|m| !exclude.contains(&m.movie_id))
        .collect();
    if movies.is_empty() {
        return Err(Error::Empty("candidate movies"));
    }
    let scores = ranker.score(user, ani_row, &movies)?;
    let mut ranked: Vec<(u32, f64)> = movies.iter().map(|m| m.movie_id).zip(scores).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}
