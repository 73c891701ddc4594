//! Weighted logistic regression trained by deterministic full-batch
//! gradient descent.
//!
//! The model fits a linear score `w . x + b` on standardized features and
//! minimizes the sample-size-normalized weighted log-loss
//!
//! ```text
//! L(w, b) = (1/n) * sum_i s_i * l(y_i, sigma(w . x_i + b)) + (l2/2) * |w|^2
//! ```
//!
//! Normalizing by `n` keeps the gradient scale — and therefore the default
//! learning rate — independent of how large the training window has grown.
//! Parameters start at zero and every arithmetic step is order-fixed, so two
//! fits on identical inputs produce bit-identical models.
//!
//! Feature standardization statistics come from the training set alone and
//! are stored on the model, so scoring later batches reuses the training
//! frame of reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stream::Instance;

/// Decision threshold used for all classification-rate metrics.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig<F: Scalar> {
    pub learning_rate: F,
    pub epochs: usize,
    pub l2: F,
    /// Reserved for stochastic optimizers; the full-batch path is
    /// deterministic and never reads it.
    pub seed: u64,
}

impl<F: Scalar> Default for TrainConfig<F> {
    fn default() -> Self {
        Self {
            learning_rate: F::from_f64(0.1).unwrap(),
            epochs: 500,
            l2: F::from_f64(1e-4).unwrap(),
            seed: 0,
        }
    }
}

impl<F: Scalar> TrainConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= F::zero() {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !self.l2.is_finite() || self.l2 < F::zero() {
            return Err(Error::InvalidConfig("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// A trained linear classifier plus the standardization statistics of its
/// training window.
///
/// Serializes to a flat JSON object: `{"weights": [...], "bias": ...,
/// "feature_means": [...], "feature_stds": [...], "trained_on": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<F: Scalar> {
    weights: Vec<F>,
    bias: F,
    feature_means: Vec<F>,
    feature_stds: Vec<F>,
    trained_on: usize,
}

impl<F: Scalar> LinearModel<F> {
    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn bias(&self) -> F {
        self.bias
    }

    pub fn feature_means(&self) -> &[F] {
        &self.feature_means
    }

    pub fn feature_stds(&self) -> &[F] {
        &self.feature_stds
    }

    /// Highest batch time index seen during training.
    pub fn trained_on(&self) -> usize {
        self.trained_on
    }

    pub fn to_json(&self) -> String
    where
        F: Serialize,
    {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        F: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))
    }
}

fn stable_sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        let e = (-z).exp();
        F::one() / (F::one() + e)
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow for large `|z|`.
fn softplus<F: Scalar>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// The training objective at the given parameters. `features` holds one row
/// per example, in whatever space the caller chose (fit applies it to
/// standardized rows).
pub fn weighted_loss<F: Scalar>(
    features: &[Vec<F>],
    labels: &[u8],
    sample_weights: &[F],
    weights: &[F],
    bias: F,
    l2: F,
) -> F {
    let n = F::from_count(features.len());
    let mut data_term = F::zero();
    for ((row, &label), &s) in features.iter().zip(labels).zip(sample_weights) {
        let z = dot(weights, row) + bias;
        // -[y ln p + (1-y) ln(1-p)] = softplus(z) - y z
        let nll = if label == 1 { softplus(z) - z } else { softplus(z) };
        data_term += s * nll;
    }
    let ridge: F = weights.iter().map(|&w| w * w).sum();
    data_term / n + l2 / F::from_count(2) * ridge
}

/// Analytic gradient of [`weighted_loss`] with respect to `(weights, bias)`.
pub fn weighted_gradient<F: Scalar>(
    features: &[Vec<F>],
    labels: &[u8],
    sample_weights: &[F],
    weights: &[F],
    bias: F,
    l2: F,
) -> (Vec<F>, F) {
    let n = F::from_count(features.len());
    let mut grad_w = vec![F::zero(); weights.len()];
    let mut grad_b = F::zero();
    for ((row, &label), &s) in features.iter().zip(labels).zip(sample_weights) {
        let z = dot(weights, row) + bias;
        let residual = s * (stable_sigmoid(z) - F::from_count(label as usize));
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Per-dimension mean and population standard deviation; a constant feature
/// gets standard deviation 1 so standardization never divides by zero.
fn feature_stats<F: Scalar>(instances: &[Instance<F>], dim: usize) -> (Vec<F>, Vec<F>) {
    let n = F::from_count(instances.len());
    let mut means = vec![F::zero(); dim];
    for inst in instances {
        for (m, &x) in means.iter_mut().zip(inst.features()) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![F::zero(); dim];
    for inst in instances {
        for ((v, &m), &x) in vars.iter_mut().zip(&means).zip(inst.features()) {
            let d = x - m;
            *v += d * d;
        }
    }
    let stds = vars
        .into_iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > F::zero() {
                s
            } else {
                F::one()
            }
        })
        .collect();
    (means, stds)
}

/// Trains a model on weighted instances.
///
/// Deterministic: identical inputs and config give a bit-identical model.
pub fn fit<F: Scalar>(
    instances: &[Instance<F>],
    sample_weights: &[F],
    config: &TrainConfig<F>,
) -> Result<LinearModel<F>> {
    config.validate()?;
    if instances.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if instances.len() != sample_weights.len() {
        return Err(Error::LengthMismatch { left: instances.len(), right: sample_weights.len() });
    }
    let mut any_positive = false;
    for &s in sample_weights {
        if !s.is_finite() || s < F::zero() {
            return Err(Error::InvalidSampleWeights);
        }
        any_positive |= s > F::zero();
    }
    if !any_positive {
        return Err(Error::InvalidSampleWeights);
    }
    let dim = instances[0].features().len();
    for inst in instances {
        if inst.features().len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: inst.features().len() });
        }
    }

    let (means, stds) = feature_stats(instances, dim);
    let rows: Vec<Vec<F>> =
        instances.iter().map(|inst| standardize_row(inst.features(), &means, &stds)).collect();
    let labels: Vec<u8> = instances.iter().map(Instance::label).collect();

    let mut weights = vec![F::zero(); dim];
    let mut bias = F::zero();
    for _ in 0..config.epochs {
        let (grad_w, grad_b) =
            weighted_gradient(&rows, &labels, sample_weights, &weights, bias, config.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w = *w - config.learning_rate * *g;
        }
        bias = bias - config.learning_rate * grad_b;
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged);
        }
    }

    let trained_on = instances.iter().map(Instance::time_index).max().unwrap_or(0);
    Ok(LinearModel { weights, bias, feature_means: means, feature_stds: stds, trained_on })
}

fn standardize_row<F: Scalar>(features: &[F], means: &[F], stds: &[F]) -> Vec<F> {
    features.iter().zip(means).zip(stds).map(|((&x, &m), &s)| (x - m) / s).collect()
}

/// Probability of the favorable label, strictly inside (0, 1).
pub fn predict_proba<F: Scalar>(model: &LinearModel<F>, features: &[F]) -> Result<F> {
    if features.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            got: features.len(),
        });
    }
    let mut z = model.bias;
    for ((&x, &m), (&s, &w)) in
        features.iter().zip(&model.feature_means).zip(model.feature_stds.iter().zip(&model.weights))
    {
        z += w * (x - m) / s;
    }
    let p = stable_sigmoid(z);
    Ok(p.max(F::min_positive_value()).min(F::one() - F::epsilon()))
}

/// Hard decision: 1 iff the predicted probability reaches `threshold`.
///
/// `threshold` must lie in the open interval (0, 1); rate metrics in this
/// crate always use [`DEFAULT_THRESHOLD`].
pub fn predict<F: Scalar>(model: &LinearModel<F>, features: &[F], threshold: F) -> Result<u8> {
    debug_assert!(threshold > F::zero() && threshold < F::one());
    let p = predict_proba(model, features)?;
    Ok(u8::from(p >= threshold))
}
