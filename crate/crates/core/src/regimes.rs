//! Training regimes: who trains when, on what, with which weights.
//!
//! All regimes share one evaluation protocol: a model trained at time `t` is
//! scored on batch `t+1`, so every metric describes data the model had not
//! seen. The regimes differ in how often they retrain and how they weight:
//!
//! * **Vanilla** - train once on the first batch, uniform weights.
//! * **Static** - train once on the first batch, reweighed against that
//!   batch's own group distribution.
//! * **Dynamic** - retrain from scratch at every step on the window of all
//!   batches seen so far, reweighed against the pooled window distribution.
//! * **Abc** - like Dynamic, but the weights blend the pooled correction
//!   with one aimed at the forecast distribution of the next batch.
//!
//! A step whose fit diverges, or whose metric is undefined on the test
//! batch, is recorded as missing rather than fabricated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anticipate::{abc_weights, AnticipationConfig};
use crate::error::{Error, Result};
use crate::learner::{fit, predict_proba, LinearModel, TrainConfig, DEFAULT_THRESHOLD};
use crate::metrics::{mean_present, snapshot, DeltaMetric};
use crate::reweigh::{instance_weights, reweigh};
use crate::scalar::Scalar;
use crate::stream::{
    group_distribution, pooled_distribution, Batch, GroupDistribution, Instance, MetricSeries,
    StepMetrics, WeightTable,
};

/// The four training regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeId {
    Vanilla,
    Static,
    Dynamic,
    Abc,
}

impl RegimeId {
    pub const ALL: [RegimeId; 4] =
        [RegimeId::Vanilla, RegimeId::Static, RegimeId::Dynamic, RegimeId::Abc];

    pub fn name(&self) -> &'static str {
        match self {
            RegimeId::Vanilla => "vanilla",
            RegimeId::Static => "static",
            RegimeId::Dynamic => "dynamic",
            RegimeId::Abc => "abc",
        }
    }
}

impl std::fmt::Display for RegimeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RegimeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(RegimeId::Vanilla),
            "static" => Ok(RegimeId::Static),
            "dynamic" => Ok(RegimeId::Dynamic),
            "abc" => Ok(RegimeId::Abc),
            other => Err(Error::InvalidConfig(format!("unknown regime: {other}"))),
        }
    }
}

/// Everything one regime run needs to know.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<F: Scalar> {
    pub regime: RegimeId,
    pub train: TrainConfig<F>,
    /// Required for [`RegimeId::Abc`], forbidden otherwise.
    pub anticipation: Option<AnticipationConfig<F>>,
    /// When true (the default), retraining regimes accumulate all batches
    /// seen so far; when false they train on the newest batch alone.
    pub growing_window: bool,
    /// Which gap feeds the temporal aggregation downstream.
    pub delta_metric: DeltaMetric,
}

impl<F: Scalar> ExperimentConfig<F> {
    pub fn new(regime: RegimeId) -> Self {
        Self {
            regime,
            train: TrainConfig::default(),
            anticipation: (regime == RegimeId::Abc).then(AnticipationConfig::default),
            growing_window: true,
            delta_metric: DeltaMetric::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        match (&self.anticipation, self.regime) {
            (Some(a), RegimeId::Abc) => a.validate(),
            (None, RegimeId::Abc) => {
                Err(Error::InvalidConfig("abc regime requires an anticipation section".into()))
            }
            (Some(_), _) => Err(Error::InvalidConfig(format!(
                "anticipation is only meaningful for the abc regime, not {}",
                self.regime
            ))),
            (None, _) => Ok(()),
        }
    }
}

/// One train-and-evaluate step, with enough detail to audit the run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<F: Scalar> {
    /// Time index of the newest batch the model trained on.
    pub trained_at: usize,
    /// Time index of the evaluated batch.
    pub evaluated_at: usize,
    /// Number of instances in the training window.
    pub train_size: usize,
    /// `None` when the fit diverged at this step.
    pub model: Option<LinearModel<F>>,
    /// Scores on the evaluated batch, in instance order (empty without a
    /// model).
    pub scores: Vec<F>,
    /// Thresholded decisions matching `scores`.
    pub predictions: Vec<u8>,
    pub metrics: StepMetrics<F>,
}

/// A regime's full output: the metric series plus per-step detail.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRun<F: Scalar> {
    pub series: MetricSeries<F>,
    pub steps: Vec<StepOutcome<F>>,
}

fn validate_stream<F: Scalar>(stream: &[Batch<F>]) -> Result<()> {
    if stream.len() < 2 {
        return Err(Error::InvalidStream(
            "need at least 2 batches (train on one, test on the next)".into(),
        ));
    }
    let dim = stream[0].dim();
    for batch in stream {
        if batch.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: batch.dim() });
        }
    }
    for pair in stream.windows(2) {
        if pair[1].time_index() <= pair[0].time_index() {
            return Err(Error::InvalidStream(format!(
                "batches out of order at t={}",
                pair[1].time_index()
            )));
        }
    }
    Ok(())
}

fn window_instances<F: Scalar>(window: &[Batch<F>]) -> Vec<Instance<F>> {
    window.iter().flat_map(|b| b.instances().iter().cloned()).collect()
}

/// Fits on the window, treating divergence as "no model this step" per the
/// missing-value policy and propagating everything else.
fn try_fit<F: Scalar>(
    instances: &[Instance<F>],
    weights: &[F],
    config: &TrainConfig<F>,
) -> Result<Option<LinearModel<F>>> {
    match fit(instances, weights, config) {
        Ok(model) => Ok(Some(model)),
        Err(Error::Diverged) => Ok(None),
        Err(e) => Err(e),
    }
}

fn evaluate_step<F: Scalar>(
    model: Option<LinearModel<F>>,
    trained_at: usize,
    train_size: usize,
    test: &Batch<F>,
) -> Result<StepOutcome<F>> {
    let time_index = test.time_index();
    let Some(model) = model else {
        return Ok(StepOutcome {
            trained_at,
            evaluated_at: time_index,
            train_size,
            model: None,
            scores: Vec::new(),
            predictions: Vec::new(),
            metrics: StepMetrics {
                time_index,
                auc: None,
                delta_sp: None,
                delta_tpr: None,
                delta_fpr: None,
            },
        });
    };
    let threshold = F::from_f64(DEFAULT_THRESHOLD).unwrap();
    let mut scores = Vec::with_capacity(test.len());
    for inst in test.instances() {
        scores.push(predict_proba(&model, inst.features())?);
    }
    let predictions: Vec<u8> = scores.iter().map(|&p| u8::from(p >= threshold)).collect();
    let labels: Vec<u8> = test.instances().iter().map(Instance::label).collect();
    let sensitive: Vec<u8> = test.instances().iter().map(Instance::sensitive).collect();
    let report = snapshot(&scores, &predictions, &labels, &sensitive)?;
    Ok(StepOutcome {
        trained_at,
        evaluated_at: time_index,
        train_size,
        model: Some(model),
        scores,
        predictions,
        metrics: StepMetrics {
            time_index,
            auc: report.auc,
            delta_sp: report.delta_sp,
            delta_tpr: report.delta_tpr,
            delta_fpr: report.delta_fpr,
        },
    })
}

/// Runs one regime over the stream, returning per-step detail.
pub fn run_regime_detailed<F: Scalar>(
    stream: &[Batch<F>],
    config: &ExperimentConfig<F>,
) -> Result<RegimeRun<F>> {
    config.validate()?;
    validate_stream(stream)?;

    let mut steps = Vec::with_capacity(stream.len() - 1);
    match config.regime {
        RegimeId::Vanilla | RegimeId::Static => {
            let first = &stream[0];
            let weights = match config.regime {
                RegimeId::Vanilla => vec![F::one(); first.len()],
                _ => {
                    let table = reweigh(&group_distribution(first));
                    instance_weights(first.instances(), &table)
                }
            };
            let model = try_fit(first.instances(), &weights, &config.train)?;
            for test in &stream[1..] {
                steps.push(evaluate_step(model.clone(), first.time_index(), first.len(), test)?);
            }
        }
        RegimeId::Dynamic | RegimeId::Abc => {
            // Per-batch distributions feed the forecast; the pooled window
            // distribution drives the current-weight correction.
            let per_batch: Vec<GroupDistribution<F>> =
                stream.iter().map(group_distribution).collect();
            for t in 0..stream.len() - 1 {
                let window = if config.growing_window { &stream[..=t] } else { &stream[t..=t] };
                let train_dist = pooled_distribution(window)?;
                let table: WeightTable<F> = match config.regime {
                    RegimeId::Dynamic => reweigh(&train_dist),
                    _ => {
                        let anticipation = config.anticipation.as_ref().expect("validated above");
                        abc_weights(&train_dist, &per_batch[..=t], anticipation)?
                    }
                };
                let instances = window_instances(window);
                let weights = instance_weights(&instances, &table);
                let model = try_fit(&instances, &weights, &config.train)?;
                steps.push(evaluate_step(
                    model,
                    stream[t].time_index(),
                    instances.len(),
                    &stream[t + 1],
                )?);
            }
        }
    }

    let series = MetricSeries::new(config.regime, steps.iter().map(|s| s.metrics).collect())?;
    Ok(RegimeRun { series, steps })
}

/// Runs one regime, keeping only the metric series.
pub fn run_regime<F: Scalar>(
    stream: &[Batch<F>],
    config: &ExperimentConfig<F>,
) -> Result<MetricSeries<F>> {
    run_regime_detailed(stream, config).map(|run| run.series)
}

/// One row of an alpha sweep: the blend coefficient and the across-step
/// means of every snapshot metric (missing steps excluded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRow<F: Scalar> {
    pub alpha: F,
    pub mean_auc: Option<F>,
    pub mean_delta_sp: Option<F>,
    pub mean_delta_tpr: Option<F>,
    pub mean_delta_fpr: Option<F>,
}

/// Reruns the abc regime once per alpha, identical in every other respect.
/// Runs are independent, so they execute in parallel; the returned rows
/// follow the order of `alphas`.
pub fn sweep_alpha<F: Scalar>(
    stream: &[Batch<F>],
    base: &ExperimentConfig<F>,
    alphas: &[F],
) -> Result<Vec<AlphaRow<F>>> {
    if base.regime != RegimeId::Abc {
        return Err(Error::InvalidConfig("alpha sweeps only apply to the abc regime".into()));
    }
    base.validate()?;
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("alpha sweep needs at least one value".into()));
    }
    for &alpha in alphas {
        if !alpha.is_finite() || alpha < F::zero() || alpha > F::one() {
            return Err(Error::AlphaOutOfRange(alpha.to_f64().unwrap_or(f64::NAN)));
        }
    }
    alphas
        .par_iter()
        .map(|&alpha| {
            let mut config = base.clone();
            config.anticipation.as_mut().expect("validated above").alpha = alpha;
            let series = run_regime(stream, &config)?;
            let steps = series.per_step();
            Ok(AlphaRow {
                alpha,
                mean_auc: mean_present(steps.iter().map(|s| s.auc)),
                mean_delta_sp: mean_present(steps.iter().map(|s| s.delta_sp)),
                mean_delta_tpr: mean_present(steps.iter().map(|s| s.delta_tpr)),
                mean_delta_fpr: mean_present(steps.iter().map(|s| s.delta_fpr)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_names_round_trip() {
        for regime in RegimeId::ALL {
            assert_eq!(regime.name().parse::<RegimeId>().unwrap(), regime);
        }
        assert!("abcd".parse::<RegimeId>().is_err());
        assert_eq!(serde_json::to_string(&RegimeId::Abc).unwrap(), "\"abc\"");
    }

    #[test]
    fn anticipation_must_match_regime() {
        let mut config = ExperimentConfig::<f64>::new(RegimeId::Abc);
        assert!(config.validate().is_ok());
        config.anticipation = None;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::<f64>::new(RegimeId::Dynamic);
        assert!(config.validate().is_ok());
        config.anticipation = Some(AnticipationConfig::default());
        assert!(config.validate().is_err());
    }

    fn tiny_stream(n_batches: usize) -> Vec<Batch<f64>> {
        // Deterministic toy stream: labels follow the sign of the first
        // feature, groups alternate, every cell occupied.
        (1..=n_batches)
            .map(|t| {
                let instances = (0..8)
                    .map(|i| {
                        let label = (i % 2) as u8;
                        let group = ((i / 2) % 2) as u8;
                        let x = if label == 1 { 1.0 } else { -1.0 };
                        let jitter = (i as f64) * 0.01 + (t as f64) * 0.001;
                        Instance::new(vec![x + jitter, jitter], group, label, t).unwrap()
                    })
                    .collect();
                Batch::new(instances).unwrap()
            })
            .collect()
    }

    #[test]
    fn two_batch_stream_yields_one_record_at_t2() {
        let stream = tiny_stream(2);
        for regime in RegimeId::ALL {
            let series = run_regime(&stream, &ExperimentConfig::new(regime)).unwrap();
            assert_eq!(series.per_step().len(), 1, "{regime}");
            assert_eq!(series.per_step()[0].time_index, 2, "{regime}");
        }
    }

    #[test]
    fn single_batch_stream_is_rejected() {
        let stream = tiny_stream(1);
        let err = run_regime(&stream, &ExperimentConfig::new(RegimeId::Vanilla)).unwrap_err();
        assert!(matches!(err, Error::InvalidStream(_)));
    }

    #[test]
    fn growing_window_accumulates_batch_sizes() {
        let stream = tiny_stream(4);
        let run = run_regime_detailed(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();
        let sizes: Vec<usize> = run.steps.iter().map(|s| s.train_size).collect();
        assert_eq!(sizes, vec![8, 16, 24]);
    }

    #[test]
    fn sliding_window_trains_on_newest_batch_only() {
        let stream = tiny_stream(4);
        let mut config = ExperimentConfig::new(RegimeId::Dynamic);
        config.growing_window = false;
        let run = run_regime_detailed(&stream, &config).unwrap();
        let sizes: Vec<usize> = run.steps.iter().map(|s| s.train_size).collect();
        assert_eq!(sizes, vec![8, 8, 8]);
        let trained: Vec<usize> = run.steps.iter().map(|s| s.trained_at).collect();
        assert_eq!(trained, vec![1, 2, 3]);
    }

    #[test]
    fn abc_at_alpha_one_is_bitwise_dynamic() {
        let stream = tiny_stream(5);
        let dynamic =
            run_regime_detailed(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();
        let mut abc_config = ExperimentConfig::new(RegimeId::Abc);
        abc_config.anticipation = Some(AnticipationConfig { window: 3, alpha: 1.0 });
        let abc = run_regime_detailed(&stream, &abc_config).unwrap();
        for (d, a) in dynamic.steps.iter().zip(&abc.steps) {
            assert_eq!(d.scores, a.scores);
            assert_eq!(d.predictions, a.predictions);
            assert_eq!(d.model, a.model);
        }
    }

    #[test]
    fn vanilla_equals_static_when_first_batch_is_balanced() {
        // tiny_stream batches are exactly balanced over the four cells, so
        // static's weights are all 1 and the two regimes coincide.
        let stream = tiny_stream(4);
        let vanilla =
            run_regime_detailed(&stream, &ExperimentConfig::new(RegimeId::Vanilla)).unwrap();
        let static_ =
            run_regime_detailed(&stream, &ExperimentConfig::new(RegimeId::Static)).unwrap();
        for (v, s) in vanilla.steps.iter().zip(&static_.steps) {
            assert_eq!(v.scores, s.scores);
        }
    }

    #[test]
    fn future_batches_cannot_influence_the_present() {
        let stream = tiny_stream(5);
        let baseline =
            run_regime_detailed(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();

        // Corrupt the final batch's features wildly; every model must stay
        // bit-identical because the last batch is never trained on.
        let mut corrupted = stream.clone();
        let last = corrupted.pop().unwrap();
        let mangled: Vec<Instance<f64>> = last
            .instances()
            .iter()
            .map(|inst| {
                let features: Vec<f64> = inst.features().iter().map(|x| x * 1e3 + 7.0).collect();
                Instance::new(features, inst.sensitive(), inst.label(), inst.time_index()).unwrap()
            })
            .collect();
        corrupted.push(Batch::new(mangled).unwrap());
        let perturbed =
            run_regime_detailed(&corrupted, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();

        for (a, b) in baseline.steps.iter().zip(&perturbed.steps) {
            assert_eq!(a.model, b.model);
        }
    }

    #[test]
    fn sweep_alpha_one_matches_dynamic_means() {
        let stream = tiny_stream(5);
        let rows = sweep_alpha(&stream, &ExperimentConfig::new(RegimeId::Abc), &[1.0]).unwrap();
        let dynamic = run_regime(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();
        let steps = dynamic.per_step();
        assert_eq!(rows[0].mean_auc, mean_present(steps.iter().map(|s| s.auc)));
        assert_eq!(rows[0].mean_delta_sp, mean_present(steps.iter().map(|s| s.delta_sp)));
    }

    #[test]
    fn sweep_is_deterministic_and_validates_input() {
        let stream = tiny_stream(4);
        let base = ExperimentConfig::new(RegimeId::Abc);
        let a = sweep_alpha(&stream, &base, &[0.0, 0.5, 1.0]).unwrap();
        let b = sweep_alpha(&stream, &base, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].alpha, 0.0);
        assert_eq!(a[2].alpha, 1.0);

        assert!(sweep_alpha(&stream, &base, &[]).is_err());
        assert!(matches!(sweep_alpha(&stream, &base, &[0.5, 1.2]), Err(Error::AlphaOutOfRange(_))));
        let dynamic = ExperimentConfig::new(RegimeId::Dynamic);
        assert!(sweep_alpha(&stream, &dynamic, &[0.5]).is_err());
    }

    #[test]
    fn regime_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Batch<f64>>();
        assert_send_sync::<MetricSeries<f64>>();
        assert_send_sync::<ExperimentConfig<f64>>();
        assert_send_sync::<RegimeRun<f64>>();
    }
}
