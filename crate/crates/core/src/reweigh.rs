//! Group reweighing: sample weights that make the sensitive attribute
//! statistically independent of the label in the weighted data.
//!
//! For each (group, label) cell the weight is the ratio of the mass the cell
//! would carry if attribute and label were independent (the product of the
//! marginals) to the mass actually observed. Under-represented cells get
//! weights above 1, over-represented cells below 1.

use crate::scalar::Scalar;
use crate::stream::{Batch, GroupDistribution, Instance, WeightTable, CELLS};

/// The distribution the batch would have if the sensitive attribute and the
/// label were independent: `P(A = a) * P(Y = y)` per cell, marginals taken
/// from `dist`.
pub fn expected_distribution<F: Scalar>(dist: &GroupDistribution<F>) -> GroupDistribution<F> {
    let mut p = [[F::zero(); 2]; 2];
    for &(a, y) in &CELLS {
        p[a as usize][y as usize] = dist.marginal_sensitive(a) * dist.marginal_label(y);
    }
    GroupDistribution::new(p, dist.n()).expect("marginal product stays on the simplex")
}

/// Per-cell weights `expected / observed`.
///
/// A cell with zero observed mass keeps weight 1: no instance exists to
/// carry any other value, and 1 leaves hypothetical future members neutral.
pub fn reweigh<F: Scalar>(dist: &GroupDistribution<F>) -> WeightTable<F> {
    let expected = expected_distribution(dist);
    let mut w = [[F::one(); 2]; 2];
    for &(a, y) in &CELLS {
        let observed = dist.get(a, y);
        if observed > F::zero() {
            w[a as usize][y as usize] = expected.get(a, y) / observed;
        }
    }
    WeightTable::new(w).expect("ratios of positive masses are positive and finite")
}

/// Looks up the weight of each instance's (group, label) cell.
pub fn instance_weights<F: Scalar>(instances: &[Instance<F>], table: &WeightTable<F>) -> Vec<F> {
    instances.iter().map(|inst| table.get(inst.sensitive(), inst.label())).collect()
}

/// [`instance_weights`] over a whole batch.
pub fn apply_weights<F: Scalar>(batch: &Batch<F>, table: &WeightTable<F>) -> Vec<F> {
    instance_weights(batch.instances(), table)
}
