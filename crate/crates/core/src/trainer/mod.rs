//! Negative sampling, losses, optimizers and the training loop.

mod config;
mod loss;
mod optim;
mod sampler;
mod train;

pub use config::{LossMode, Optimizer, TrainConfig, DEFAULT_BATCH, DEFAULT_DIM};
pub use loss::{loss_and_grad, loss_bernoulli, loss_sgns, loss_softmax_ce};
pub use optim::{apply_step, GradAccum, OptimizerState, StepStats, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use sampler::{sample_negatives, sample_tails_into, MAX_REDRAWS};
pub use train::{train, train_with_progress, EpochStats, TrainMetrics, Trainer};
