//! Shallow and deep (initial-residual, identity-mapped) graph convolutional
//! classifiers with a hand-written backward pass.

mod model;
mod train;

pub use model::{
    beta_for_layer, forward, gcnii_layer, gcnii_layer_with_beta, log_softmax, loss, loss_and_gradients, shallow_layer,
    DecayGroup, ForwardPass, ModelParameters, Tensor,
};
pub use train::{load_checkpoint, predict, save_checkpoint, train, Prediction, TrainTrace, CHECKPOINT_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Plain graph convolutions followed by one output map.
    Shallow,
    /// Input map, residual/identity-mapped convolutions, output map.
    Deep,
}

/// How the identity-mapping strength decays with layer index `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSchedule {
    /// `ln(λ/ℓ + 1)`
    #[default]
    Log,
    /// `λ/ℓ`
    Linear,
}

/// Which loss drives early stopping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopOn {
    /// Loss on the test mask.
    Test,
    /// Loss on this fraction of the training nodes, held out from the gradient.
    Validation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Graph-convolution layers.
    pub hidden_layers: usize,
    pub hidden_dim: usize,
    /// Initial-residual weight (deep only).
    pub alpha: f64,
    /// Identity-mapping hyperparameter (deep only).
    pub lambda: f64,
    #[serde(default)]
    pub beta_schedule: BetaSchedule,
    pub dropout: f64,
    pub learning_rate: f64,
    /// L2 rate for convolution weights (and, in the shallow model, everything).
    pub weight_decay_hidden: f64,
    /// L2 rate for the deep model's input and output maps.
    pub weight_decay_fc: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub stop_on: StopOn,
}

impl ModelConfig {
    pub fn shallow() -> Self {
        Self {
            variant: Variant::Shallow,
            hidden_layers: 3,
            hidden_dim: 64,
            alpha: 0.1,
            lambda: 0.5,
            beta_schedule: BetaSchedule::Log,
            dropout: 0.4,
            learning_rate: 0.01,
            weight_decay_hidden: 0.01,
            weight_decay_fc: 0.0005,
            patience: 30,
            max_epochs: 1500,
            seed: 0,
            stop_on: StopOn::Test,
        }
    }

    pub fn deep() -> Self {
        Self { variant: Variant::Deep, hidden_layers: 64, learning_rate: 0.05, patience: 100, ..Self::shallow() }
    }

    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::Shallow => Self::shallow(),
            Variant::Deep => Self::deep(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.hidden_layers == 0 {
            return bad("hidden_layers must be at least 1".into());
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay_hidden >= 0.0) || !(self.weight_decay_fc >= 0.0) {
            return bad("weight decay must be non-negative".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if let StopOn::Validation(f) = self.stop_on {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("validation fraction must lie in (0, 1), got {f}"));
            }
        }
        Ok(())
    }

    /// Decay rate for a parameter group. The shallow model uses the hidden
    /// rate throughout.
    pub fn decay_for(&self, group: DecayGroup) -> f64 {
        match (self.variant, group) {
            (Variant::Deep, DecayGroup::FullyConnected) => self.weight_decay_fc,
            _ => self.weight_decay_hidden,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::shallow()
    }
}
