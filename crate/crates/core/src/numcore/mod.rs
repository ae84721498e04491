//! A small reverse-mode differentiation engine.
//!
//! Only the operations the two-tower model needs are provided. A [`Graph`]
//! records each operation as it is evaluated; [`Graph::backward`] walks the
//! record once in reverse and returns per-node gradients. Parameters are
//! borrowed, not copied, so building a graph per mini-batch is cheap.

mod gradcheck;
mod graph;
mod optim;
mod rng;
mod tensor;

pub use gradcheck::{grad_check, GradCheckReport, GRAD_CHECK_EPSILON};
pub use graph::{Gradients, Graph, Var};
pub use optim::sgd_step;
pub use rng::{gaussian_init, RngState, INIT_STD};
pub use tensor::Tensor;
