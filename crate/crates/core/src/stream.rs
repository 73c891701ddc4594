//! Domain types for learning over a stream of time-indexed batches.
//!
//! An experiment consumes a stream: an ordered sequence of [`Batch`]es, each
//! holding [`Instance`]s observed at one time index. Every instance carries a
//! binary sensitive attribute (group 0 is the unprivileged group by
//! convention) and a binary class label (1 is the favorable outcome). The
//! joint frequencies of those two bits are what [`GroupDistribution`]
//! captures, and a [`WeightTable`] assigns one sample weight per (group,
//! label) cell.
//!
//! All types validate their invariants at construction and are immutable
//! afterwards, so they can be shared freely across threads.

use crate::error::{Error, Result};
use crate::metrics::DeltaMetric;
use crate::regimes::RegimeId;
use crate::scalar::Scalar;

/// The four (sensitive, label) cells in a fixed, row-major order.
pub const CELLS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// One labeled, group-annotated example at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<F: Scalar> {
    features: Vec<F>,
    sensitive: u8,
    label: u8,
    time_index: usize,
}

impl<F: Scalar> Instance<F> {
    /// Builds an instance, rejecting sensitive or label values outside
    /// {0, 1}.
    pub fn new(features: Vec<F>, sensitive: u8, label: u8, time_index: usize) -> Result<Self> {
        if sensitive > 1 {
            return Err(Error::NonBinaryValue(sensitive));
        }
        if label > 1 {
            return Err(Error::NonBinaryValue(label));
        }
        Ok(Self { features, sensitive, label, time_index })
    }

    pub fn features(&self) -> &[F] {
        &self.features
    }

    pub fn sensitive(&self) -> u8 {
        self.sensitive
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }
}

/// A non-empty set of instances sharing one time index.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<F: Scalar> {
    time_index: usize,
    instances: Vec<Instance<F>>,
}

impl<F: Scalar> Batch<F> {
    /// Builds a batch from instances that must be non-empty, agree on their
    /// time index, and agree on feature dimensionality.
    pub fn new(instances: Vec<Instance<F>>) -> Result<Self> {
        let first = instances.first().ok_or(Error::EmptyBatch)?;
        let time_index = first.time_index();
        let dim = first.features().len();
        for inst in &instances {
            if inst.time_index() != time_index {
                return Err(Error::MixedTimeIndices);
            }
            if inst.features().len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: inst.features().len() });
            }
        }
        Ok(Self { time_index, instances })
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn instances(&self) -> &[Instance<F>] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a batch is non-empty by construction
    }

    /// Feature dimensionality shared by every instance in the batch.
    pub fn dim(&self) -> usize {
        self.instances[0].features().len()
    }
}

/// Empirical joint distribution over the four (sensitive, label) cells.
///
/// Entries are non-negative and sum to one up to a precision-dependent
/// tolerance. `n` records the batch size the table was estimated from; a
/// forecast that does not correspond to observed data carries `n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDistribution<F: Scalar> {
    p: [[F; 2]; 2],
    n: usize,
}

impl<F: Scalar> GroupDistribution<F> {
    /// Validates and wraps a probability table. `p[a][y]` is the mass of
    /// group `a` with label `y`.
    pub fn new(p: [[F; 2]; 2], n: usize) -> Result<Self> {
        let mut sum = F::zero();
        for row in &p {
            for &v in row {
                if !v.is_finite() || v < F::zero() {
                    return Err(Error::InvalidDistribution(format!(
                        "entries must be finite and non-negative, got {v}"
                    )));
                }
                sum += v;
            }
        }
        if (sum - F::one()).abs() > F::simplex_tolerance() {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self { p, n })
    }

    /// Builds the distribution from raw cell counts.
    pub fn from_counts(counts: [[usize; 2]; 2]) -> Result<Self> {
        let total: usize = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyBatch);
        }
        let t = F::from_count(total);
        let mut p = [[F::zero(); 2]; 2];
        for a in 0..2 {
            for y in 0..2 {
                p[a][y] = F::from_count(counts[a][y]) / t;
            }
        }
        Ok(Self { p, n: total })
    }

    /// Probability mass of cell `(a, y)`.
    pub fn get(&self, a: u8, y: u8) -> F {
        self.p[a as usize][y as usize]
    }

    /// Batch size the table was computed from, 0 for forecasts.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Marginal probability of the sensitive attribute, P(A = a).
    pub fn marginal_sensitive(&self, a: u8) -> F {
        self.p[a as usize][0] + self.p[a as usize][1]
    }

    /// Marginal probability of the label, P(Y = y).
    pub fn marginal_label(&self, y: u8) -> F {
        self.p[0][y as usize] + self.p[1][y as usize]
    }

    /// Cells with their masses, in [`CELLS`] order.
    pub fn cells(&self) -> impl Iterator<Item = ((u8, u8), F)> + '_ {
        CELLS.iter().map(move |&(a, y)| ((a, y), self.get(a, y)))
    }

    /// L1 distance to another table.
    pub fn l1_distance(&self, other: &Self) -> F {
        CELLS.iter().map(|&(a, y)| (self.get(a, y) - other.get(a, y)).abs()).sum()
    }
}

/// One positive, finite sample weight per (sensitive, label) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTable<F: Scalar> {
    w: [[F; 2]; 2],
}

impl<F: Scalar> WeightTable<F> {
    pub fn new(w: [[F; 2]; 2]) -> Result<Self> {
        for row in &w {
            for &v in row {
                if !v.is_finite() || v <= F::zero() {
                    return Err(Error::InvalidWeightTable(format!(
                        "weights must be positive and finite, got {v}"
                    )));
                }
            }
        }
        Ok(Self { w })
    }

    /// The identity table: weight 1 for every cell.
    pub fn uniform() -> Self {
        Self { w: [[F::one(); 2]; 2] }
    }

    pub fn get(&self, a: u8, y: u8) -> F {
        self.w[a as usize][y as usize]
    }
}

/// Empirical (sensitive, label) frequencies of one batch.
///
/// Cannot fail: batches are non-empty by construction.
pub fn group_distribution<F: Scalar>(batch: &Batch<F>) -> GroupDistribution<F> {
    let mut counts = [[0usize; 2]; 2];
    for inst in batch.instances() {
        counts[inst.sensitive() as usize][inst.label() as usize] += 1;
    }
    GroupDistribution::from_counts(counts).expect("batch is non-empty")
}

/// Joint frequencies over several batches pooled together, as used when a
/// model trains on a window of past batches at once.
pub fn pooled_distribution<F: Scalar>(batches: &[Batch<F>]) -> Result<GroupDistribution<F>> {
    let mut counts = [[0usize; 2]; 2];
    for batch in batches {
        for inst in batch.instances() {
            counts[inst.sensitive() as usize][inst.label() as usize] += 1;
        }
    }
    GroupDistribution::from_counts(counts)
}

/// Evaluation results for one tested batch. `None` marks a metric that was
/// undefined on that batch (an absent group, or a missing class for AUC and
/// the rate-based deltas) and is excluded from any aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics<F: Scalar> {
    pub time_index: usize,
    pub auc: Option<F>,
    pub delta_sp: Option<F>,
    pub delta_tpr: Option<F>,
    pub delta_fpr: Option<F>,
}

impl<F: Scalar> StepMetrics<F> {
    /// The delta value selected by `metric`.
    pub fn delta(&self, metric: DeltaMetric) -> Option<F> {
        match metric {
            DeltaMetric::StatisticalParity => self.delta_sp,
            DeltaMetric::EqualOpportunity => self.delta_tpr,
            DeltaMetric::PredictiveEquality => self.delta_fpr,
        }
    }

    /// Names of the metrics that are missing at this step, in column order.
    pub fn missing_names(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        if self.auc.is_none() {
            names.push("auc");
        }
        if self.delta_sp.is_none() {
            names.push("delta_sp");
        }
        if self.delta_tpr.is_none() {
            names.push("delta_tpr");
        }
        if self.delta_fpr.is_none() {
            names.push("delta_fpr");
        }
        names
    }
}

/// Per-step metric records for one regime, ordered by time index.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries<F: Scalar> {
    regime: RegimeId,
    per_step: Vec<StepMetrics<F>>,
}

impl<F: Scalar> MetricSeries<F> {
    /// Validates ordering (strictly increasing time indices) and ranges
    /// (every present metric value in [0, 1]).
    pub fn new(regime: RegimeId, per_step: Vec<StepMetrics<F>>) -> Result<Self> {
        for pair in per_step.windows(2) {
            if pair[1].time_index <= pair[0].time_index {
                return Err(Error::InvalidStream(format!(
                    "metric records out of order at t={}",
                    pair[1].time_index
                )));
            }
        }
        for step in &per_step {
            for value in
                [step.auc, step.delta_sp, step.delta_tpr, step.delta_fpr].into_iter().flatten()
            {
                if !(F::zero()..=F::one()).contains(&value) {
                    return Err(Error::InvalidStream(format!(
                        "metric value {value} at t={} outside [0, 1]",
                        step.time_index
                    )));
                }
            }
        }
        Ok(Self { regime, per_step })
    }

    pub fn regime(&self) -> RegimeId {
        self.regime
    }

    pub fn per_step(&self) -> &[StepMetrics<F>] {
        &self.per_step
    }

    /// The chosen delta metric at every step, missing values preserved.
    pub fn delta_series(&self, metric: DeltaMetric) -> Vec<Option<F>> {
        self.per_step.iter().map(|s| s.delta(metric)).collect()
    }
}
