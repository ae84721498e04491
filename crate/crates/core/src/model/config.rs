use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Architecture and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Size of the shared user/movie latent space.
    pub latent_dim: usize,
    pub token_emb_dim: usize,
    pub tag_emb_dim: usize,
    pub conv_window: usize,
    pub conv_filters: usize,
    pub title_len: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop once the relative epoch-loss improvement stays below this for
    /// three epochs in a row.
    pub convergence_tolerance: f64,
    pub seed: u64,
    /// Novelty window.
    pub k: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            latent_dim: 32,
            token_emb_dim: 16,
            tag_emb_dim: 16,
            conv_window: 3,
            conv_filters: 16,
            title_len: 16,
            learning_rate: 0.01,
            batch_size: 64,
            max_epochs: 30,
            convergence_tolerance: 1e-4,
            seed: 0,
            k: 20,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("latent_dim", self.latent_dim),
            ("token_emb_dim", self.token_emb_dim),
            ("tag_emb_dim", self.tag_emb_dim),
            ("conv_window", self.conv_window),
            ("conv_filters", self.conv_filters),
            ("title_len", self.title_len),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("k", self.k),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Validation(format!("{name} must be at least 1")));
        }
        if self.conv_window > self.title_len {
            return Err(Error::Validation(format!(
                "conv_window {} exceeds title_len {}",
                self.conv_window, self.title_len
            )));
        }
        // lr = 0 is allowed: it is the identity on parameters.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Validation(format!(
                "learning_rate must be finite and nonnegative, got {}",
                self.learning_rate
            )));
        }
        if self.convergence_tolerance.is_nan() || self.convergence_tolerance < 0.0 {
            return Err(Error::Validation(
                "convergence_tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}
