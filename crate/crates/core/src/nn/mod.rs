//! Dense feed-forward networks with hand-written reverse mode.
//!
//! Everything is `f64`. Batches are row-major [`Matrix`] values with one
//! sample per row; the matrix products go through `matrixmultiply`.

mod adam;
mod matrix;
mod network;
mod policy;
mod schedule;
pub mod snapshot;

pub use adam::{AdamConfig, AdamState};
pub use matrix::Matrix;
pub use network::{
    clip_gradients, dueling_combine, Activation, Dense, ForwardCache, Gradients, HeadKind,
    LayerGrad, LayerSpec, MlpNetwork,
};
pub use policy::{argmax, categorical_entropy, log_prob, sample_categorical, softmax, PROB_FLOOR};
pub use schedule::LrSchedule;
