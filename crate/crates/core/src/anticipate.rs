//! Anticipatory weighting: correct for the group distribution the *next*
//! batch is expected to have, not just the one already observed.
//!
//! The forecast is a trailing moving average of per-batch group
//! distributions. Reweighing against that forecast yields "future" weights,
//! which are blended with the ordinary "current" weights through a mixing
//! coefficient `alpha`: 1 keeps only the current correction, 0 trusts the
//! forecast alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reweigh::reweigh;
use crate::scalar::Scalar;
use crate::stream::{GroupDistribution, WeightTable, CELLS};

/// Forecast window and blending coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnticipationConfig<F: Scalar> {
    /// Number of trailing batches averaged by the forecast.
    pub window: usize,
    /// Mix between current weights (`alpha`) and forecast weights
    /// (`1 - alpha`).
    pub alpha: F,
}

impl<F: Scalar> AnticipationConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("anticipation window must be at least 1".into()));
        }
        check_alpha(self.alpha)?;
        Ok(())
    }
}

impl<F: Scalar> Default for AnticipationConfig<F> {
    fn default() -> Self {
        Self { window: 3, alpha: F::from_f64(0.5).unwrap() }
    }
}

fn check_alpha<F: Scalar>(alpha: F) -> Result<()> {
    if !alpha.is_finite() || alpha < F::zero() || alpha > F::one() {
        return Err(Error::AlphaOutOfRange(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// Cellwise mean of the trailing `window` entries of `history` (all of it if
/// shorter). The result carries `n = 0`: it describes no observed batch.
pub fn forecast<F: Scalar>(
    history: &[GroupDistribution<F>],
    window: usize,
) -> Result<GroupDistribution<F>> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if window == 0 {
        return Err(Error::InvalidConfig("anticipation window must be at least 1".into()));
    }
    let tail = &history[history.len() - window.min(history.len())..];
    let k = F::from_count(tail.len());
    let mut p = [[F::zero(); 2]; 2];
    for dist in tail {
        for &(a, y) in &CELLS {
            p[a as usize][y as usize] += dist.get(a, y);
        }
    }
    for row in &mut p {
        for v in row {
            *v /= k;
        }
    }
    GroupDistribution::new(p, 0)
}

/// Convex combination `alpha * current + (1 - alpha) * future`, cellwise.
pub fn blend<F: Scalar>(
    current: &WeightTable<F>,
    future: &WeightTable<F>,
    alpha: F,
) -> Result<WeightTable<F>> {
    check_alpha(alpha)?;
    let mut w = [[F::one(); 2]; 2];
    for &(a, y) in &CELLS {
        w[a as usize][y as usize] =
            alpha * current.get(a, y) + (F::one() - alpha) * future.get(a, y);
    }
    WeightTable::new(w)
}

/// The full anticipatory weight computation: reweigh the distribution the
/// model trains on, reweigh the forecast for the next batch, blend.
pub fn abc_weights<F: Scalar>(
    train_dist: &GroupDistribution<F>,
    history: &[GroupDistribution<F>],
    config: &AnticipationConfig<F>,
) -> Result<WeightTable<F>> {
    config.validate()?;
    let current = reweigh(train_dist);
    let future = reweigh(&forecast(history, config.window)?);
    blend(&current, &future, config.alpha)
}
