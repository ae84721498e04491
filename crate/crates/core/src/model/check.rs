//! Finite-difference verification of the full two-tower graph on small,
//! randomly shaped models.

use super::params::{ModelParams, ParamVars};
use super::train::{batch_forward, TrainingRow};
use super::ModelConfig;
use crate::dataset::{AgeBucket, Catalog, Gender, RawMovie, UserProfile};
use crate::numcore::{grad_check, GradCheckReport, RngState, GRAD_CHECK_EPSILON};
use crate::Result;

/// A random miniature catalog, model and batch for `seed`.
pub fn random_problem(seed: u64) -> Result<(Catalog, ModelParams<f64>, Vec<TrainingRow<f64>>)> {
    let mut rng = RngState::derive(seed, 0x6772_6164);
    let mut pick = |lo: usize, hi: usize| lo + rng.index(hi - lo + 1);

    let conv_window = pick(1, 3);
    let config = ModelConfig {
        latent_dim: pick(2, 5),
        token_emb_dim: pick(2, 4),
        tag_emb_dim: pick(2, 4),
        conv_window,
        conv_filters: pick(2, 4),
        title_len: conv_window + pick(0, 3),
        seed,
        ..ModelConfig::default()
    };
    let tag_count = pick(2, 5);
    let word_count = pick(3, 6);
    let movie_count = pick(2, 4);

    let movies: Vec<RawMovie> = (0..movie_count)
        .map(|i| {
            let words: Vec<String> = (0..pick(1, 5))
                .map(|_| format!("w{}", pick(0, word_count - 1)))
                .collect();
            let mut genres: Vec<String> = (0..pick(1, tag_count))
                .map(|_| format!("g{}", pick(0, tag_count - 1)))
                .collect();
            // Every tag appears somewhere so the vocabulary has `tag_count` entries.
            genres.push(format!("g{}", i % tag_count));
            RawMovie {
                movie_id: i as u32 + 1,
                title: words.join(" "),
                genres,
            }
        })
        .collect();
    let users = vec![
        UserProfile {
            user_id: 1,
            gender: Gender::Female,
            age: AgeBucket::ALL[pick(0, 6)],
            occupation: pick(0, 20) as u8,
        },
        UserProfile {
            user_id: 2,
            gender: Gender::Male,
            age: AgeBucket::ALL[pick(0, 6)],
            occupation: pick(0, 20) as u8,
        },
    ];
    let catalog = Catalog::build(users, movies, config.title_len)?;
    let tags = catalog.tag_count();

    let mut rng = RngState::derive(seed, 0x726f_7773);
    let rows: Vec<TrainingRow<f64>> = (0..pick(2, 5))
        .map(|t| TrainingRow {
            user_id: 1 + rng.index(2) as u32,
            t: t + 1,
            movie_id: 1 + rng.index(movie_count) as u32,
            ani: (0..tags).map(|_| 1.0 / (1 + rng.index(4)) as f64).collect(),
            target: rng.uniform(-4.0, 4.0),
            rating: 3,
        })
        .collect();

    // Use a wider init than training does so every path carries signal.
    let mut params = ModelParams::for_catalog(&config, &catalog)?;
    let mut init = RngState::derive(seed, 0x696e_6974);
    for t in params.tensors_mut() {
        for v in t.values_mut() {
            *v = init.normal(0.0, 0.5);
        }
    }
    Ok((catalog, params, rows))
}

/// Gradient check of the batch MSE for [`random_problem`]`(seed)`.
pub fn full_model_grad_check(seed: u64) -> Result<GradCheckReport> {
    let (catalog, params, rows) = random_problem(seed)?;
    let refs: Vec<&TrainingRow<f64>> = rows.iter().collect();
    let tensors: Vec<_> = params.tensors().into_iter().cloned().collect();
    grad_check(&tensors, GRAD_CHECK_EPSILON, |g, vars| {
        batch_forward(g, &ParamVars::from_slice(vars), &refs, &catalog)
    })
}
