//! The two-tower rating model.

mod check;
mod config;
mod io;
mod params;
mod ranking;
mod towers;
mod train;

pub use check::{full_model_grad_check, random_problem};
pub use config::ModelConfig;
pub use io::{load_params, save_params, FORMAT_VERSION, MAGIC};
pub use params::{param_shapes, ModelParams, ParamVars, DEMOGRAPHICS_LEN, PARAM_NAMES};
pub use ranking::{rank_movies, Ranker, Scorer};
pub use towers::{demographics_vector, movie_tower, predict_rating, user_tower};
pub use train::{
    batch_forward, batch_loss, build_pooled_rows, build_training_rows, train, train_from,
    TrainOutcome, TrainingRow,
};
