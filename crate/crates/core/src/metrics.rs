//! Fairness and accuracy metrics, per batch and across time.
//!
//! Snapshot metrics describe one evaluated batch: AUC plus three absolute
//! between-group gaps (positive-prediction rate, true-positive rate,
//! false-positive rate). Temporal metrics compress a per-step series of one
//! such gap into its worst level, its average step-to-step movement, and its
//! worst step-to-step jump.
//!
//! A metric that is undefined on a batch — a group that never occurs, or a
//! class that is missing where a rate conditions on it — is *reported as
//! missing*, never silently zero, and excluded from aggregation. The
//! exclusion count travels with the aggregate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which between-group gap a temporal aggregation tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DeltaMetric {
    /// Gap in positive-prediction rates.
    #[default]
    #[serde(rename = "delta_sp")]
    StatisticalParity,
    /// Gap in true-positive rates.
    #[serde(rename = "delta_tpr")]
    EqualOpportunity,
    /// Gap in false-positive rates.
    #[serde(rename = "delta_fpr")]
    PredictiveEquality,
}

impl DeltaMetric {
    /// Column name used in reports.
    pub fn column(&self) -> &'static str {
        match self {
            DeltaMetric::StatisticalParity => "delta_sp",
            DeltaMetric::EqualOpportunity => "delta_tpr",
            DeltaMetric::PredictiveEquality => "delta_fpr",
        }
    }
}

fn check_same_length(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// Positive-prediction rate per group, i.e. P(Yhat = 1 | A = a).
fn group_rates<F: Scalar>(predictions: &[u8], sensitive: &[u8]) -> Result<[F; 2]> {
    let mut total = [0usize; 2];
    let mut positive = [0usize; 2];
    for (&p, &a) in predictions.iter().zip(sensitive) {
        debug_assert!(p <= 1 && a <= 1);
        total[a as usize] += 1;
        positive[a as usize] += p as usize;
    }
    if total[0] == 0 || total[1] == 0 {
        return Err(Error::EmptyGroup);
    }
    Ok([
        F::from_count(positive[0]) / F::from_count(total[0]),
        F::from_count(positive[1]) / F::from_count(total[1]),
    ])
}

/// Absolute gap in positive-prediction rates between the two groups.
pub fn statistical_parity_diff<F: Scalar>(predictions: &[u8], sensitive: &[u8]) -> Result<F> {
    check_same_length(predictions.len(), sensitive.len())?;
    let [r0, r1]: [F; 2] = group_rates(predictions, sensitive)?;
    Ok((r0 - r1).abs())
}

/// Absolute gap in true-positive rates. Each group must contribute at least
/// one actual positive.
pub fn equal_opportunity_diff<F: Scalar>(
    predictions: &[u8],
    labels: &[u8],
    sensitive: &[u8],
) -> Result<F> {
    check_same_length(predictions.len(), labels.len())?;
    check_same_length(predictions.len(), sensitive.len())?;
    let mut positives = [0usize; 2];
    let mut true_positives = [0usize; 2];
    for ((&p, &y), &a) in predictions.iter().zip(labels).zip(sensitive) {
        debug_assert!(p <= 1 && y <= 1 && a <= 1);
        if y == 1 {
            positives[a as usize] += 1;
            true_positives[a as usize] += p as usize;
        }
    }
    if positives[0] == 0 || positives[1] == 0 {
        return Err(Error::NoPositivesInGroup);
    }
    let tpr0 = F::from_count(true_positives[0]) / F::from_count(positives[0]);
    let tpr1 = F::from_count(true_positives[1]) / F::from_count(positives[1]);
    Ok((tpr0 - tpr1).abs())
}

/// Absolute gap in false-positive rates. Each group must contribute at least
/// one actual negative.
pub fn predictive_equality_diff<F: Scalar>(
    predictions: &[u8],
    labels: &[u8],
    sensitive: &[u8],
) -> Result<F> {
    check_same_length(predictions.len(), labels.len())?;
    check_same_length(predictions.len(), sensitive.len())?;
    let mut negatives = [0usize; 2];
    let mut false_positives = [0usize; 2];
    for ((&p, &y), &a) in predictions.iter().zip(labels).zip(sensitive) {
        debug_assert!(p <= 1 && y <= 1 && a <= 1);
        if y == 0 {
            negatives[a as usize] += 1;
            false_positives[a as usize] += p as usize;
        }
    }
    if negatives[0] == 0 || negatives[1] == 0 {
        return Err(Error::NoNegativesInGroup);
    }
    let fpr0 = F::from_count(false_positives[0]) / F::from_count(negatives[0]);
    let fpr1 = F::from_count(false_positives[1]) / F::from_count(negatives[1]);
    Ok((fpr0 - fpr1).abs())
}

/// Area under the ROC curve via the rank-sum formulation: the probability
/// that a random positive outscores a random negative, ties counting half.
pub fn auc<F: Scalar>(scores: &[F], labels: &[u8]) -> Result<F> {
    check_same_length(scores.len(), labels.len())?;
    let n = scores.len();
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = n - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::AucUndefined);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).expect("scores must not be NaN"));

    // Average ranks over tie runs, then sum the positives' ranks.
    let two = F::from_count(2);
    let mut rank_sum = F::zero();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share the average (i + 1 + j) / 2.
        let avg_rank = F::from_count(i + 1 + j) / two;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum += avg_rank;
            }
        }
        i = j;
    }
    let np = F::from_count(positives);
    let u = rank_sum - np * (np + F::one()) / two;
    Ok(u / (np * F::from_count(negatives)))
}

/// All snapshot metrics for one evaluated batch; `None` marks an undefined
/// metric per the missing-value policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotReport<F: Scalar> {
    pub auc: Option<F>,
    pub delta_sp: Option<F>,
    pub delta_tpr: Option<F>,
    pub delta_fpr: Option<F>,
    pub n_evaluated: usize,
}

/// Computes every snapshot metric, turning the *undefined* conditions into
/// `None` while still failing hard on structurally invalid input.
pub fn snapshot<F: Scalar>(
    scores: &[F],
    predictions: &[u8],
    labels: &[u8],
    sensitive: &[u8],
) -> Result<SnapshotReport<F>> {
    check_same_length(scores.len(), predictions.len())?;
    check_same_length(scores.len(), labels.len())?;
    check_same_length(scores.len(), sensitive.len())?;

    let auc = match auc(scores, labels) {
        Ok(v) => Some(v),
        Err(Error::AucUndefined) => None,
        Err(e) => return Err(e),
    };
    let delta_sp = match statistical_parity_diff(predictions, sensitive) {
        Ok(v) => Some(v),
        Err(Error::EmptyGroup) => None,
        Err(e) => return Err(e),
    };
    let delta_tpr = match equal_opportunity_diff(predictions, labels, sensitive) {
        Ok(v) => Some(v),
        Err(Error::EmptyGroup | Error::NoPositivesInGroup) => None,
        Err(e) => return Err(e),
    };
    let delta_fpr = match predictive_equality_diff(predictions, labels, sensitive) {
        Ok(v) => Some(v),
        Err(Error::EmptyGroup | Error::NoNegativesInGroup) => None,
        Err(e) => return Err(e),
    };
    Ok(SnapshotReport { auc, delta_sp, delta_tpr, delta_fpr, n_evaluated: scores.len() })
}

/// Worst level the gap reaches: `max_i d_i`.
pub fn max_bias<F: Scalar>(deltas: &[F]) -> Result<F> {
    if deltas.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(deltas.iter().copied().fold(F::neg_infinity(), F::max))
}

/// Average step-to-step movement: `(1/N) * sum_{i>=2} |d_i - d_{i-1}|`.
///
/// The denominator is the series length N, although only N - 1 differences
/// exist; callers comparing against hand-computed values should keep that in
/// mind.
pub fn temporal_stability<F: Scalar>(deltas: &[F]) -> Result<F> {
    if deltas.len() < 2 {
        return Err(Error::SeriesTooShort);
    }
    let sum: F = deltas.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(sum / F::from_count(deltas.len()))
}

/// Worst step-to-step jump: `max_{i>=2} |d_i - d_{i-1}|`.
pub fn max_bias_difference<F: Scalar>(deltas: &[F]) -> Result<F> {
    if deltas.len() < 2 {
        return Err(Error::SeriesTooShort);
    }
    Ok(deltas.windows(2).map(|w| (w[1] - w[0]).abs()).fold(F::neg_infinity(), F::max))
}

/// Temporal aggregate of one delta series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalReport<F: Scalar> {
    pub mb: F,
    pub ts: F,
    pub mbd: F,
    /// Steps that contributed (missing values excluded).
    pub n_steps: usize,
    /// Steps excluded because the metric was undefined there.
    pub n_missing: usize,
}

impl<F: Scalar> TemporalReport<F> {
    /// Aggregates a series in which some steps may be missing. At least two
    /// present values are required.
    pub fn from_deltas(deltas: &[Option<F>]) -> Result<Self> {
        let present: Vec<F> = deltas.iter().copied().flatten().collect();
        let n_missing = deltas.len() - present.len();
        Ok(Self {
            mb: max_bias(&present)?,
            ts: temporal_stability(&present)?,
            mbd: max_bias_difference(&present)?,
            n_steps: present.len(),
            n_missing,
        })
    }
}

/// Mean over the present values; `None` if every value is missing.
pub fn mean_present<F: Scalar>(values: impl Iterator<Item = Option<F>>) -> Option<F> {
    let mut sum = F::zero();
    let mut count = 0usize;
    for v in values.flatten() {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / F::from_count(count))
}
