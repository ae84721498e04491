use super::ModelConfig;
use crate::dataset::{Catalog, OCCUPATION_COUNT};
use crate::numcore::{gaussian_init, Graph, RngState, Tensor, Var};
use crate::{Error, Real, Result};

/// One-hot gender (2) + age bucket (7) + occupation (21).
pub const DEMOGRAPHICS_LEN: usize = 2 + 7 + OCCUPATION_COUNT;

pub const PARAM_NAMES: [&str; 8] = [
    "token_embedding",
    "tag_embedding",
    "conv_kernels",
    "conv_bias",
    "movie_weights",
    "movie_bias",
    "user_weights",
    "user_bias",
];

/// All learnable arrays of both towers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub config: ModelConfig,
    /// `V x token_emb_dim`; row 0 is the padding token.
    pub token_embedding: Tensor<T>,
    /// `|I| x tag_emb_dim`.
    pub tag_embedding: Tensor<T>,
    /// `conv_filters x conv_window x token_emb_dim`.
    pub conv_kernels: Tensor<T>,
    pub conv_bias: Tensor<T>,
    /// `latent_dim x (conv_filters + tag_emb_dim)`.
    pub movie_weights: Tensor<T>,
    pub movie_bias: Tensor<T>,
    /// `latent_dim x (DEMOGRAPHICS_LEN + |I|)`.
    pub user_weights: Tensor<T>,
    pub user_bias: Tensor<T>,
}

/// Expected shapes in [`PARAM_NAMES`] order.
pub fn param_shapes(config: &ModelConfig, token_rows: usize, tag_count: usize) -> [Vec<usize>; 8] {
    let c = config;
    [
        vec![token_rows, c.token_emb_dim],
        vec![tag_count, c.tag_emb_dim],
        vec![c.conv_filters, c.conv_window, c.token_emb_dim],
        vec![c.conv_filters],
        vec![c.latent_dim, c.conv_filters + c.tag_emb_dim],
        vec![c.latent_dim],
        vec![c.latent_dim, DEMOGRAPHICS_LEN + tag_count],
        vec![c.latent_dim],
    ]
}

impl<T: Real> ModelParams<T> {
    /// Draws every parameter from `N(0, 0.1^2)` using `config.seed`, in
    /// [`PARAM_NAMES`] order.
    pub fn init(config: &ModelConfig, token_rows: usize, tag_count: usize) -> Result<Self> {
        config.validate()?;
        let mut rng = RngState::new(config.seed);
        let shapes = param_shapes(config, token_rows, tag_count);
        let mut t = shapes
            .iter()
            .map(|s| gaussian_init(s, &mut rng))
            .collect::<Result<Vec<_>>>()?
            .into_iter();
        let mut next = || t.next().expect("eight shapes");
        Ok(Self {
            config: config.clone(),
            token_embedding: next(),
            tag_embedding: next(),
            conv_kernels: next(),
            conv_bias: next(),
            movie_weights: next(),
            movie_bias: next(),
            user_weights: next(),
            user_bias: next(),
        })
    }

    pub fn for_catalog(config: &ModelConfig, catalog: &Catalog) -> Result<Self> {
        Self::init(
            config,
            catalog.vocab().token_table_size(),
            catalog.tag_count(),
        )
    }

    /// Assembles parameters from named tensors, checking every shape.
    pub fn from_tensors(config: ModelConfig, tensors: Vec<Tensor<T>>) -> Result<Self> {
        config.validate()?;
        if tensors.len() != PARAM_NAMES.len() {
            return Err(Error::Shape(format!(
                "expected 8 tensors, got {}",
                tensors.len()
            )));
        }
        let token_rows = tensors[0].shape().first().copied().unwrap_or(0);
        let tag_count = tensors[1].shape().first().copied().unwrap_or(0);
        let shapes = param_shapes(&config, token_rows, tag_count);
        for ((t, s), name) in tensors.iter().zip(&shapes).zip(PARAM_NAMES) {
            if t.shape() != s.as_slice() {
                return Err(Error::Shape(format!(
                    "{name}: expected shape {s:?}, found {:?}",
                    t.shape()
                )));
            }
        }
        let mut t = tensors.into_iter().map(Tensor::with_grad);
        let mut next = || t.next().expect("length checked");
        Ok(Self {
            config,
            token_embedding: next(),
            tag_embedding: next(),
            conv_kernels: next(),
            conv_bias: next(),
            movie_weights: next(),
            movie_bias: next(),
            user_weights: next(),
            user_bias: next(),
        })
    }

    pub fn token_rows(&self) -> usize {
        self.token_embedding.shape()[0]
    }

    pub fn tag_count(&self) -> usize {
        self.tag_embedding.shape()[0]
    }

    pub fn tensors(&self) -> [&Tensor<T>; 8] {
        [
            &self.token_embedding,
            &self.tag_embedding,
            &self.conv_kernels,
            &self.conv_bias,
            &self.movie_weights,
            &self.movie_bias,
            &self.user_weights,
            &self.user_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 8] {
        [
            &mut self.token_embedding,
            &mut self.tag_embedding,
            &mut self.conv_kernels,
            &mut self.conv_bias,
            &mut self.movie_weights,
            &mut self.movie_bias,
            &mut self.user_weights,
            &mut self.user_bias,
        ]
    }

    /// Fails if the vocabulary sizes these parameters were built for differ
    /// from `catalog`'s.
    pub fn check_catalog(&self, catalog: &Catalog) -> Result<()> {
        let (tokens, tags) = (catalog.vocab().token_table_size(), catalog.tag_count());
        if self.token_rows() != tokens || self.tag_count() != tags {
            return Err(Error::Validation(format!(
                "model built for {} title tokens / {} tags, catalog has {tokens} / {tags}",
                self.token_rows(),
                self.tag_count()
            )));
        }
        if self.config.title_len != catalog.title_len() {
            return Err(Error::Validation(format!(
                "model expects titles of {} tokens, catalog uses {}",
                self.config.title_len,
                catalog.title_len()
            )));
        }
        Ok(())
    }
}

/// Graph handles for every parameter tensor.
#[derive(Debug, Clone, Copy)]
pub struct ParamVars {
    pub token_embedding: Var,
    pub tag_embedding: Var,
    pub conv_kernels: Var,
    pub conv_bias: Var,
    pub movie_weights: Var,
    pub movie_bias: Var,
    pub user_weights: Var,
    pub user_bias: Var,
}

impl ParamVars {
    pub fn bind<'a, T: Real>(g: &mut Graph<'a, T>, p: &'a ModelParams<T>) -> Self {
        Self::from_slice(&p.tensors().map(|t| g.param(t)))
    }

    /// Handles in [`PARAM_NAMES`] order.
    pub fn from_slice(v: &[Var]) -> Self {
        assert_eq!(v.len(), 8, "eight parameter handles");
        Self {
            token_embedding: v[0],
            tag_embedding: v[1],
            conv_kernels: v[2],
            conv_bias: v[3],
            movie_weights: v[4],
            movie_bias: v[5],
            user_weights: v[6],
            user_bias: v[7],
        }
    }

    pub fn all(&self) -> [Var; 8] {
        [
            self.token_embedding,
            self.tag_embedding,
            self.conv_kernels,
            self.conv_bias,
            self.movie_weights,
            self.movie_bias,
            self.user_weights,
            self.user_bias,
        ]
    }
}
