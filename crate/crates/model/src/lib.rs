//! Double-precision reference implementation of the FiLM² layer and the
//! txt2π policy/baseline network, with tape-based reverse-mode gradients
//! checked against central finite differences.

pub mod checkpoint;
pub mod film2;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod loss;
pub mod model;
pub mod params;
pub mod tensor;

pub use checkpoint::Checkpoint;
pub use film2::{film2_forward, Film2Options, Film2Params};
pub use gradcheck::{grad_check, GradCheckReport};
pub use graph::{Gradients, Graph, Var};
pub use loss::{baseline_loss, entropy_loss};
pub use model::{positional_features, Ablations, ModelConfig, ObsInput, PolicyOutput, Txt2Pi};
pub use params::{ParamId, ParamStore};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("token index {0} outside the vocabulary")]
    UnknownToken(usize),
    #[error("not a probability distribution")]
    NotDistribution,
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
