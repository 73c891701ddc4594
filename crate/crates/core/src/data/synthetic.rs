//! Synthetic stream generation with controllable group-distribution drift.
//!
//! Each batch realizes a target (group, label) distribution *exactly* up to
//! integer rounding: cell counts come from largest-remainder apportionment,
//! so the realized frequencies sit within `1/batch_size` of the target per
//! cell. Features are spherical Gaussian noise with two planted signals: the
//! label shifts axis 0 and the group shifts axis 1, which makes the group
//! partially recoverable from features and lets biased training produce
//! genuinely unfair models.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stream::{Batch, GroupDistribution, Instance, CELLS};

/// The group offset on axis 1 is this fraction of `class_separation`, so the
/// group signal is present but weaker than the label signal.
pub const GROUP_OFFSET_FACTOR: f64 = 0.5;

/// How the target (group, label) distribution moves across the stream.
///
/// Tables are `[[p; 2]; 2]` indexed by `[group][label]` and must each sum
/// to 1. In serialized form the variant is selected by a `preset` field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum TrajectorySpec<F: Scalar> {
    /// The same table at every time index.
    Stationary { table: [[F; 2]; 2] },
    /// Cellwise linear interpolation from `start` (t = 1) to `end` (t = n).
    LinearDrift { start: [[F; 2]; 2], end: [[F; 2]; 2] },
    /// Smooth cosine oscillation between `start` and `end` with the given
    /// period in batches.
    Oscillating { start: [[F; 2]; 2], end: [[F; 2]; 2], period: usize },
    /// `start` until just before `change_at`, `end` from then on.
    PhaseShift { start: [[F; 2]; 2], end: [[F; 2]; 2], change_at: usize },
}

fn check_table<F: Scalar>(name: &str, table: &[[F; 2]; 2]) -> Result<()> {
    GroupDistribution::new(*table, 0)
        .map(|_| ())
        .map_err(|e| Error::InvalidSpec(format!("{name} table: {e}")))
}

impl<F: Scalar> TrajectorySpec<F> {
    pub fn validate(&self, n_batches: usize) -> Result<()> {
        match self {
            TrajectorySpec::Stationary { table } => check_table("stationary", table),
            TrajectorySpec::LinearDrift { start, end } => {
                check_table("start", start)?;
                check_table("end", end)
            }
            TrajectorySpec::Oscillating { start, end, period } => {
                check_table("start", start)?;
                check_table("end", end)?;
                if *period < 2 {
                    return Err(Error::InvalidSpec("oscillation period must be at least 2".into()));
                }
                Ok(())
            }
            TrajectorySpec::PhaseShift { start, end, change_at } => {
                check_table("start", start)?;
                check_table("end", end)?;
                if *change_at < 2 || *change_at > n_batches {
                    return Err(Error::InvalidSpec(format!(
                        "change_at must lie in 2..={n_batches}, got {change_at}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The target distribution at time `t` (1-based) in a stream of
    /// `n_batches`.
    pub fn target(&self, t: usize, n_batches: usize) -> GroupDistribution<F> {
        let table = match self {
            TrajectorySpec::Stationary { table } => *table,
            TrajectorySpec::LinearDrift { start, end } => {
                let u = if n_batches > 1 { (t - 1) as f64 / (n_batches - 1) as f64 } else { 0.0 };
                mix_tables(start, end, F::from_f64(u).unwrap())
            }
            TrajectorySpec::Oscillating { start, end, period } => {
                let angle = std::f64::consts::TAU * (t - 1) as f64 / *period as f64;
                let u = (1.0 - angle.cos()) / 2.0;
                mix_tables(start, end, F::from_f64(u).unwrap())
            }
            TrajectorySpec::PhaseShift { start, end, change_at } => {
                if t < *change_at {
                    *start
                } else {
                    *end
                }
            }
        };
        GroupDistribution::new(table, 0).expect("convex mix of valid tables stays valid")
    }
}

/// Cellwise `(1 - u) * start + u * end`.
fn mix_tables<F: Scalar>(start: &[[F; 2]; 2], end: &[[F; 2]; 2], u: F) -> [[F; 2]; 2] {
    let mut out = *start;
    for a in 0..2 {
        for y in 0..2 {
            out[a][y] = (F::one() - u) * start[a][y] + u * end[a][y];
        }
    }
    out
}

/// Full recipe for a synthetic stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec<F: Scalar> {
    /// Stream length; at least 2 so there is something to evaluate on.
    pub n_batches: usize,
    /// Instances per batch; at least 8 so every cell can be populated.
    pub batch_size: usize,
    /// Feature dimensionality; at least 2 for the two signal axes.
    pub dim: usize,
    pub trajectory: TrajectorySpec<F>,
    /// Distance between the label-conditional feature means on axis 0.
    pub class_separation: F,
    pub seed: u64,
}

impl<F: Scalar> DriftSpec<F> {
    pub fn validate(&self) -> Result<()> {
        if self.n_batches < 2 {
            return Err(Error::InvalidSpec("n_batches must be at least 2".into()));
        }
        if self.batch_size < 8 {
            return Err(Error::InvalidSpec("batch_size must be at least 8".into()));
        }
        if self.dim < 2 {
            return Err(Error::InvalidSpec("dim must be at least 2".into()));
        }
        if !self.class_separation.is_finite() || self.class_separation <= F::zero() {
            return Err(Error::InvalidSpec("class_separation must be positive".into()));
        }
        self.trajectory.validate(self.n_batches)
    }

    /// A 12-batch stream whose group bias deepens linearly: group 1 starts
    /// moderately favored and ends strongly favored. Useful as a default
    /// worked example of anticipatory correction paying off.
    pub fn default_linear_drift() -> Self {
        let f = |x: f64| F::from_f64(x).unwrap();
        DriftSpec {
            n_batches: 12,
            batch_size: 500,
            dim: 4,
            trajectory: TrajectorySpec::LinearDrift {
                start: [[f(0.35), f(0.15)], [f(0.15), f(0.35)]],
                end: [[f(0.45), f(0.05)], [f(0.05), f(0.45)]],
            },
            class_separation: f(4.0),
            seed: 8,
        }
    }
}

/// Apportions `total` into four cell counts matching `dist` as closely as
/// integers allow: floors first, then one extra unit per largest fractional
/// remainder (ties to the earlier cell in [`CELLS`] order). Every count lands
/// within one unit of `p * total`.
pub fn largest_remainder<F: Scalar>(dist: &GroupDistribution<F>, total: usize) -> [[usize; 2]; 2] {
    let mut counts = [[0usize; 2]; 2];
    let mut remainders = [0.0f64; 4];
    let mut assigned = 0usize;
    for (i, (a, y)) in CELLS.iter().enumerate() {
        let ideal = dist.get(*a, *y).to_f64().expect("probability fits in f64") * total as f64;
        let base = ideal.floor() as usize;
        counts[*a as usize][*y as usize] = base;
        remainders[i] = ideal - base as f64;
        assigned += base;
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| remainders[j].partial_cmp(&remainders[i]).unwrap().then(i.cmp(&j)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        let (a, y) = CELLS[i];
        counts[a as usize][y as usize] += 1;
    }
    counts
}

/// Generates the stream described by `spec`. Deterministic in the seed.
pub fn generate<F: Scalar>(spec: &DriftSpec<F>) -> Result<Vec<Batch<F>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sep = spec.class_separation.to_f64().expect("separation fits in f64");
    let group_sep = GROUP_OFFSET_FACTOR * sep;

    let mut batches = Vec::with_capacity(spec.n_batches);
    for t in 1..=spec.n_batches {
        let target = spec.trajectory.target(t, spec.n_batches);
        let counts = largest_remainder(&target, spec.batch_size);
        let mut instances = Vec::with_capacity(spec.batch_size);
        for (a, y) in CELLS {
            let label_offset = if y == 1 { sep / 2.0 } else { -sep / 2.0 };
            let group_offset = if a == 1 { group_sep / 2.0 } else { -group_sep / 2.0 };
            for _ in 0..counts[a as usize][y as usize] {
                let mut features = Vec::with_capacity(spec.dim);
                for d in 0..spec.dim {
                    let mut x: f64 = StandardNormal.sample(&mut rng);
                    if d == 0 {
                        x += label_offset;
                    } else if d == 1 {
                        x += group_offset;
                    }
                    features.push(F::from_f64(x).expect("sample fits the scalar type"));
                }
                instances.push(Instance::new(features, a, y, t)?);
            }
        }
        batches.push(Batch::new(instances)?);
    }
    Ok(batches)
}
