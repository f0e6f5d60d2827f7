//! Pipeline glue: tick days through preprocessing into tensors, model
//! training/prediction wrappers, the concatenated encoded stream used by
//! the tuner, and the day-by-day rolling experiment with naive and random
//! baselines.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::{
    run_days, ReportRow, RollingOutcome, StrategyConfig, StrategyDay, TradingReport,
};
use crate::engine::{init_network, InitConfig, LifParams, ModelVariant, NetworkState, Topology};
use crate::error::{Error, Result};
use crate::market::{
    aggregate_vwap, apply_normalization, encode_poisson, make_difference_features,
    make_supervised_features, normalize, FeatureMatrix, NormalizationSpec, Tick,
};
use crate::metrics::{
    evaluate, label_ground_truth, EvalCounts, GroundTruth, MetricsReport, SpikeLabel, DEFAULT_ALPHA,
};
use crate::plasticity::{train_unsupervised, StdpParams};
use crate::seed;
use crate::supervised::{train_supervised, TrainConfig};
use crate::tensor::SpikeTensor;

/// One day of raw ticks.
#[derive(Debug, Clone)]
pub struct DayInput {
    pub date: String,
    pub ticks: Vec<Tick>,
}

/// Preprocessing knobs shared across the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    /// Ticks per VWAP bar.
    pub window_n: usize,
    /// Difference-feature lags for the segregated models.
    pub lags: usize,
    /// Return lags for the supervised feature set.
    pub lag_set: Vec<usize>,
    /// Rolling window for volatility and volume features.
    pub vol_window: usize,
    pub q_low: f64,
    pub q_high: f64,
    pub upper_bound: f64,
    /// Spike-train length per timestamp.
    pub timesteps: usize,
    /// Forward/backward window for ground-truth labeling.
    pub label_window: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            window_n: 10,
            lags: 1,
            lag_set: vec![1, 3, 5],
            vol_window: 10,
            q_low: 0.1,
            q_high: 0.9,
            upper_bound: 1.0,
            timesteps: 20,
            label_window: 3,
        }
    }
}

/// Which feature set feeds the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Signed VWAP differences over `lags`, split into pos/neg channels.
    Differences { lags: usize },
    /// Returns, volatility and volume for the supervised model.
    Supervised,
}

/// One day after VWAP aggregation, feature building and labeling, before
/// normalization (which depends on the training/test role).
#[derive(Debug, Clone)]
pub struct PreparedDay {
    pub date: String,
    pub vwap: Vec<f64>,
    pub raw_features: FeatureMatrix,
    pub truth: GroundTruth,
}

impl PreparedDay {
    pub fn offset(&self) -> usize {
        self.raw_features.offset
    }

    /// Per-tensor-row supervised labels.
    pub fn row_labels(&self) -> Vec<Option<bool>> {
        let off = self.offset();
        (0..self.raw_features.n_rows())
            .map(|r| self.truth.labels[off + r].is_real)
            .collect()
    }
}

/// Aggregate, build features and label one day.
pub fn prepare_day(day: &DayInput, prep: &PrepConfig, kind: FeatureKind) -> Result<PreparedDay> {
    let bars = aggregate_vwap(&day.ticks, prep.window_n)?;
    let vwap: Vec<f64> = bars.iter().map(|b| b.vwap).collect();
    let raw_features = match kind {
        FeatureKind::Differences { lags } => make_difference_features(&bars, lags)?,
        FeatureKind::Supervised => make_supervised_features(&bars, &prep.lag_set, prep.vol_window)?,
    };
    let truth = label_ground_truth(&vwap, prep.label_window, None)?;
    Ok(PreparedDay {
        date: day.date.clone(),
        vwap,
        raw_features,
        truth,
    })
}

/// Fit normalization on a training day and encode it.
pub fn fit_and_encode(
    day: &PreparedDay,
    prep: &PrepConfig,
    encode_seed: u64,
) -> Result<(SpikeTensor, NormalizationSpec)> {
    let (normed, spec) = normalize(&day.raw_features, prep.q_low, prep.q_high, prep.upper_bound)?;
    let tensor = encode_poisson(&normed, prep.timesteps, encode_seed)?;
    Ok((tensor, spec))
}

/// Encode a day under a previously fitted normalization (test days replay
/// the training-day transform; no look-ahead).
pub fn encode_with_spec(
    day: &PreparedDay,
    spec: &NormalizationSpec,
    prep: &PrepConfig,
    encode_seed: u64,
) -> Result<SpikeTensor> {
    let normed = apply_normalization(&day.raw_features, spec)?;
    encode_poisson(&normed, prep.timesteps, encode_seed)
}

/// Hyperparameters of one unsupervised model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnsupervisedSpec {
    pub variant: ModelVariant,
    /// Input lags (1 for the two-input model).
    pub lags: usize,
    pub n_hidden: usize,
    pub lif: LifParams,
    pub stdp: StdpParams,
    pub d_thresh: u32,
}

/// Model selection plus everything needed to train it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ModelSpec {
    Unsupervised(UnsupervisedSpec),
    Supervised(TrainConfig),
}

impl ModelSpec {
    pub fn feature_kind(&self) -> FeatureKind {
        match self {
            ModelSpec::Unsupervised(u) => FeatureKind::Differences { lags: u.lags },
            ModelSpec::Supervised(_) => FeatureKind::Supervised,
        }
    }
}

/// A trained network with its decoding threshold.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub net: NetworkState,
    pub d_thresh: u32,
}

impl TrainedModel {
    /// Predictions aligned to the day's VWAP bars (leading rows without
    /// features stay false).
    pub fn predict_day(
        &mut self,
        tensor: &SpikeTensor,
        offset: usize,
        vwap_len: usize,
    ) -> Result<Vec<bool>> {
        let mut preds = vec![false; vwap_len];
        for row in 0..tensor.n_timestamps() {
            let out = self.net.simulate_timestamp(tensor, row)?;
            preds[offset + row] = self
                .net
                .predict_from_counts(&out.output_counts, self.d_thresh);
        }
        Ok(preds)
    }
}

/// Build the topology for an unsupervised spec.
pub fn build_topology(spec: &UnsupervisedSpec) -> Result<Topology> {
    match spec.variant {
        ModelVariant::Model1 => Topology::model1(spec.lags, spec.n_hidden),
        ModelVariant::Model2 => Topology::model2(spec.lags, spec.n_hidden),
        ModelVariant::Model3 => Err(Error::InvalidConfig(
            "the dense model trains supervised".into(),
        )),
    }
}

/// Train a model on one day's tensor and labels.
pub fn train_model(
    spec: &ModelSpec,
    tensor: &SpikeTensor,
    labels: &[Option<bool>],
    init_seed: u64,
    train_seed: u64,
) -> Result<TrainedModel> {
    match spec {
        ModelSpec::Unsupervised(u) => {
            let topo = build_topology(u)?;
            let mut net = init_network(&topo, u.lif, init_seed, InitConfig::default())?;
            train_unsupervised(
                &mut net,
                tensor,
                0..tensor.n_timestamps(),
                &u.stdp,
                usize::MAX,
            )?;
            Ok(TrainedModel {
                net,
                d_thresh: u.d_thresh,
            })
        }
        ModelSpec::Supervised(cfg) => {
            let topo = Topology::model3(tensor.n_channels(), cfg.n_hidden)?;
            let lif = LifParams::new(cfg.beta, cfg.v_thresh)?;
            let mut net = init_network(&topo, lif, init_seed, InitConfig::default())?;
            train_supervised(&mut net, tensor, labels, cfg, train_seed)?;
            Ok(TrainedModel { net, d_thresh: 0 })
        }
    }
}

/// Concatenated multi-day stream for the tuner: per-day normalization and
/// encoding, rows stacked in day order with their labels.
#[derive(Debug, Clone)]
pub struct EncodedStream {
    pub tensor: SpikeTensor,
    pub labels: Vec<SpikeLabel>,
    /// Difference-feature lags the tensor was built with.
    pub lags: usize,
}

impl EncodedStream {
    pub fn n_rows(&self) -> usize {
        self.tensor.n_timestamps()
    }

    /// Channel indices for a model using the first `lags` lags.
    pub fn channels_for_lags(&self, lags: usize) -> Result<Vec<usize>> {
        if lags == 0 || lags > self.lags {
            return Err(Error::InvalidParam(format!(
                "requested {lags} lags from a stream built with {}",
                self.lags
            )));
        }
        let mut ch: Vec<usize> = (0..lags).collect();
        ch.extend(self.lags..self.lags + lags);
        Ok(ch)
    }
}

/// Build the tuning stream from difference features with `prep.lags` lags.
pub fn build_stream(days: &[DayInput], prep: &PrepConfig, root_seed: u64) -> Result<EncodedStream> {
    if days.is_empty() {
        return Err(Error::EmptyDay);
    }
    let prepared: Vec<(SpikeTensor, Vec<SpikeLabel>)> = days
        .par_iter()
        .enumerate()
        .map(|(di, day)| {
            let p = prepare_day(day, prep, FeatureKind::Differences { lags: prep.lags })?;
            let (tensor, _) = fit_and_encode(
                &p,
                prep,
                seed::derive_indexed(root_seed, "encode", di as u64),
            )?;
            let off = p.offset();
            let labels: Vec<SpikeLabel> = (0..tensor.n_timestamps())
                .map(|r| p.truth.labels[off + r])
                .collect();
            Ok((tensor, labels))
        })
        .collect::<Result<_>>()?;
    let tensors: Vec<&SpikeTensor> = prepared.iter().map(|(t, _)| t).collect();
    let tensor = SpikeTensor::concat(&tensors)?;
    let labels = prepared
        .iter()
        .flat_map(|(_, l)| l.iter().copied())
        .collect();
    Ok(EncodedStream {
        tensor,
        labels,
        lags: prep.lags,
    })
}

/// Per-test-day results of the rolling experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayResult {
    pub date: String,
    pub metrics: MetricsReport,
    pub trading: TradingReport,
}

/// Everything the rolling experiment produces: the model column, both
/// baselines, per-day breakdowns and the model equity curve.
#[derive(Debug, Clone, Serialize)]
pub struct RollingBundle {
    pub model: ReportRow,
    pub naive: ReportRow,
    pub random: ReportRow,
    pub per_day: Vec<DayResult>,
    #[serde(skip)]
    pub model_outcome: Option<RollingOutcome>,
    #[serde(skip)]
    pub random_accuracy_runs: Vec<Option<f64>>,
}

/// Options for the rolling experiment baselines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub random_runs: usize,
    pub random_prob: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            random_runs: 100,
            random_prob: 0.5,
        }
    }
}

/// Day-by-day rolling experiment: train on day i, evaluate and trade on
/// day i+1, reusing day-i normalization. Baselines run over the identical
/// test days.
pub fn rolling_experiment(
    days: &[DayInput],
    model_spec: &ModelSpec,
    prep: &PrepConfig,
    strategy: &StrategyConfig,
    baselines: &BaselineConfig,
    root_seed: u64,
    trades_per_day_scaling: usize,
) -> Result<RollingBundle> {
    if days.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            got: days.len(),
        });
    }
    let kind = model_spec.feature_kind();
    let prepared: Vec<PreparedDay> = days
        .par_iter()
        .map(|d| prepare_day(d, prep, kind))
        .collect::<Result<_>>()?;

    // one (train day i, test day i+1) pair per test day, independent
    let pair_results: Vec<(Vec<bool>, usize)> = (0..days.len() - 1)
        .into_par_iter()
        .map(|i| {
            let train_day = &prepared[i];
            let test_day = &prepared[i + 1];
            let (train_tensor, norm) = fit_and_encode(
                train_day,
                prep,
                seed::derive_indexed(root_seed, "encode", i as u64),
            )?;
            let labels = train_day.row_labels();
            let mut model = train_model(
                model_spec,
                &train_tensor,
                &labels,
                seed::derive_indexed(root_seed, "init", i as u64),
                seed::derive_indexed(root_seed, "train", i as u64),
            )?;
            let test_tensor = encode_with_spec(
                test_day,
                &norm,
                prep,
                seed::derive_indexed(root_seed, "encode-test", i as u64),
            )?;
            let preds = model.predict_day(&test_tensor, test_day.offset(), test_day.vwap.len())?;
            Ok((preds, i + 1))
        })
        .collect::<Result<_>>()?;

    // model column
    let mut model_days = Vec::new();
    let mut per_day = Vec::new();
    let mut pooled = EvalCounts::default();
    for (preds, ti) in &pair_results {
        let day = &prepared[*ti];
        let metrics = evaluate(preds, &day.truth, DEFAULT_ALPHA)?;
        pooled.accumulate(preds, &day.truth)?;
        model_days.push(StrategyDay {
            date: day.date.clone(),
            vwap: day.vwap.clone(),
            predictions: preds.clone(),
        });
        per_day.push((day.date.clone(), metrics));
    }
    let model_outcome = run_days(&model_days, strategy)?;
    let n_test_days = model_days.len();
    let mut model_report = model_outcome.aggregate.clone();
    if let Some(e) = model_report.expectancy {
        model_report.scaled_cumulative_return = Some(crate::backtest::scale_report(
            e,
            trades_per_day_scaling,
            n_test_days,
        ));
    }
    let per_day: Vec<DayResult> = per_day
        .into_iter()
        .zip(&model_outcome.per_day_trading)
        .map(|((date, metrics), trading)| DayResult {
            date,
            metrics,
            trading: trading.clone(),
        })
        .collect();

    // naive baseline: trade every timestamp through the same strategy
    let naive_days: Vec<StrategyDay> = model_days
        .iter()
        .map(|d| StrategyDay {
            date: d.date.clone(),
            vwap: d.vwap.clone(),
            predictions: vec![true; d.vwap.len()],
        })
        .collect();
    let naive_outcome = run_days(&naive_days, strategy)?;
    let mut naive_report = naive_outcome.aggregate.clone();
    if let Some(e) = naive_report.expectancy {
        naive_report.scaled_cumulative_return = Some(crate::backtest::scale_report(
            e,
            trades_per_day_scaling,
            n_test_days,
        ));
    }
    let mut naive_counts = EvalCounts::default();
    for (d, day) in naive_days
        .iter()
        .zip(pair_results.iter().map(|(_, ti)| &prepared[*ti]))
    {
        naive_counts.accumulate(&d.predictions, &day.truth)?;
    }

    // random baseline averaged over independent runs
    let run_reports: Vec<(TradingReport, Option<f64>)> = (0..baselines.random_runs)
        .into_par_iter()
        .map(|run| {
            let mut counts = EvalCounts::default();
            let days_r: Vec<StrategyDay> = model_days
                .iter()
                .enumerate()
                .map(|(di, d)| {
                    let mut rng = seed::rng_indexed(
                        root_seed,
                        "strategy-random",
                        (run * n_test_days + di) as u64,
                    );
                    let predictions: Vec<bool> = (0..d.vwap.len())
                        .map(|_| rng.random::<f64>() < baselines.random_prob)
                        .collect();
                    StrategyDay {
                        date: d.date.clone(),
                        vwap: d.vwap.clone(),
                        predictions,
                    }
                })
                .collect();
            for (d, (_, ti)) in days_r.iter().zip(&pair_results) {
                counts.accumulate(&d.predictions, &prepared[*ti].truth)?;
            }
            let outcome = run_days(&days_r, strategy)?;
            let mut rep = outcome.aggregate;
            if let Some(e) = rep.expectancy {
                rep.scaled_cumulative_return = Some(crate::backtest::scale_report(
                    e,
                    trades_per_day_scaling,
                    n_test_days,
                ));
            }
            Ok((rep, counts.report(DEFAULT_ALPHA).spike_accuracy))
        })
        .collect::<Result<_>>()?;
    let random_reports: Vec<TradingReport> = run_reports.iter().map(|(r, _)| r.clone()).collect();
    let random_accuracy_runs: Vec<Option<f64>> = run_reports.iter().map(|(_, a)| *a).collect();

    Ok(RollingBundle {
        model: ReportRow::from_report("model", &model_report, Some(pooled.report(DEFAULT_ALPHA))),
        naive: ReportRow::from_report(
            "naive",
            &naive_report,
            Some(naive_counts.report(DEFAULT_ALPHA)),
        ),
        random: ReportRow::mean_of("random", &random_reports),
        per_day,
        model_outcome: Some(model_outcome),
        random_accuracy_runs,
    })
}

/// Mean of the defined spike accuracies over random-baseline runs.
pub fn mean_defined(vals: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = vals.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{generate_synthetic_ticks, SyntheticConfig};

    fn small_days(n_days: usize, ticks: usize) -> Vec<DayInput> {
        let cfg = SyntheticConfig {
            n_days,
            ticks_per_day: ticks,
            spike_rate: 0.002,
            ..SyntheticConfig::default()
        };
        generate_synthetic_ticks(&cfg)
            .unwrap()
            .into_iter()
            .map(|d| DayInput {
                date: d.date,
                ticks: d.ticks,
            })
            .collect()
    }

    fn tiny_unsupervised() -> ModelSpec {
        ModelSpec::Unsupervised(UnsupervisedSpec {
            variant: ModelVariant::Model1,
            lags: 1,
            n_hidden: 8,
            lif: LifParams::new(0.9, 1.0).unwrap(),
            stdp: StdpParams::excitatory(0.004, 0.003, 20.0, 20.0).unwrap(),
            d_thresh: 8,
        })
    }

    #[test]
    fn prepare_day_aligns_rows_with_labels() {
        let days = small_days(1, 3000);
        let prep = PrepConfig::default();
        let p = prepare_day(&days[0], &prep, FeatureKind::Differences { lags: 1 }).unwrap();
        assert_eq!(p.vwap.len(), 300);
        assert_eq!(p.raw_features.n_rows() + p.offset(), p.vwap.len());
        assert_eq!(p.truth.labels.len(), p.vwap.len());
        let labels = p.row_labels();
        assert_eq!(labels.len(), p.raw_features.n_rows());
    }

    #[test]
    fn stream_concatenates_days() {
        let days = small_days(2, 2000);
        let prep = PrepConfig {
            lags: 3,
            ..PrepConfig::default()
        };
        let stream = build_stream(&days, &prep, 7).unwrap();
        assert_eq!(stream.tensor.n_channels(), 6);
        assert_eq!(stream.n_rows(), stream.labels.len());
        assert_eq!(stream.n_rows(), 2 * (200 - 3));
        let ch = stream.channels_for_lags(2).unwrap();
        assert_eq!(ch, vec![0, 1, 3, 4]);
    }

    #[test]
    fn rolling_experiment_runs_and_is_deterministic() {
        let days = small_days(3, 2500);
        let spec = tiny_unsupervised();
        let prep = PrepConfig::default();
        let strat = StrategyConfig::default();
        let base = BaselineConfig {
            random_runs: 5,
            random_prob: 0.5,
        };
        let a = rolling_experiment(&days, &spec, &prep, &strat, &base, 11, 1000).unwrap();
        let b = rolling_experiment(&days, &spec, &prep, &strat, &base, 11, 1000).unwrap();
        assert_eq!(a.per_day.len(), 2);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        // day 2 appears once as train, once as test
        assert_eq!(a.per_day[0].date, days[1].date);
        assert_eq!(a.per_day[1].date, days[2].date);
        assert!(a.naive.n_trades > 0.0);
    }

    #[test]
    fn rolling_works_with_the_supervised_model() {
        let days = small_days(3, 2500);
        let spec = ModelSpec::Supervised(crate::supervised::TrainConfig {
            n_hidden: 8,
            epochs: 2,
            batch_size: 32,
            ..crate::supervised::TrainConfig::default()
        });
        let bundle = rolling_experiment(
            &days,
            &spec,
            &PrepConfig::default(),
            &StrategyConfig::default(),
            &BaselineConfig {
                random_runs: 3,
                random_prob: 0.5,
            },
            13,
            1000,
        )
        .unwrap();
        assert_eq!(bundle.per_day.len(), 2);
        let m = bundle.model.metrics.as_ref().unwrap();
        assert!(m.n_labeled > 0);
        assert!(bundle.naive.n_trades > 0.0);
    }

    #[test]
    fn rolling_needs_two_days() {
        let days = small_days(1, 2000);
        let spec = tiny_unsupervised();
        let err = rolling_experiment(
            &days,
            &spec,
            &PrepConfig::default(),
            &StrategyConfig::default(),
            &BaselineConfig::default(),
            1,
            1000,
        );
        assert!(err.is_err());
    }

    #[test]
    fn naive_baseline_profits_on_momentum_persistent_stream() {
        // strongly persistent bursts create positive lag-1 autocorrelation,
        // which the always-on momentum strategy exploits
        let cfg = SyntheticConfig {
            n_days: 3,
            ticks_per_day: 20_000,
            spike_rate: 0.004,
            spike_magnitude: 6.0,
            momentum_persistence: 0.985,
            ..SyntheticConfig::default()
        };
        let days: Vec<DayInput> = generate_synthetic_ticks(&cfg)
            .unwrap()
            .into_iter()
            .map(|d| DayInput {
                date: d.date,
                ticks: d.ticks,
            })
            .collect();
        let prep = PrepConfig::default();
        // oracle: sign of lag-1 autocorrelation of VWAP returns
        let mut autocov_num = 0.0;
        let mut autocov_den = 0.0;
        for day in &days {
            let bars = aggregate_vwap(&day.ticks, prep.window_n).unwrap();
            let rets: Vec<f64> = bars
                .windows(2)
                .map(|w| w[1].vwap / w[0].vwap - 1.0)
                .collect();
            let mean = rets.iter().sum::<f64>() / rets.len() as f64;
            for w in rets.windows(2) {
                autocov_num += (w[0] - mean) * (w[1] - mean);
            }
            for r in &rets {
                autocov_den += (r - mean) * (r - mean);
            }
        }
        assert!(
            autocov_num / autocov_den > 0.02,
            "stream must be momentum-persistent for this check"
        );

        let spec = tiny_unsupervised();
        let bundle = rolling_experiment(
            &days,
            &spec,
            &prep,
            &StrategyConfig::default(),
            &BaselineConfig {
                random_runs: 3,
                random_prob: 0.5,
            },
            5,
            1000,
        )
        .unwrap();
        assert!(
            bundle.naive.expectancy.unwrap() > 0.0,
            "naive momentum should profit on a persistent stream, got {:?}",
            bundle.naive.expectancy
        );
    }

    #[test]
    fn random_baseline_expectancy_tracks_naive() {
        // both trade with identical direction logic; only timing differs,
        // so the random baseline's mean expectancy should sit within a few
        // standard errors of the naive expectancy
        let cfg = SyntheticConfig {
            n_days: 3,
            ticks_per_day: 20_000,
            spike_rate: 0.004,
            spike_magnitude: 6.0,
            momentum_persistence: 0.985,
            ..SyntheticConfig::default()
        };
        let days: Vec<DayInput> = generate_synthetic_ticks(&cfg)
            .unwrap()
            .into_iter()
            .map(|d| DayInput {
                date: d.date,
                ticks: d.ticks,
            })
            .collect();
        let bundle = rolling_experiment(
            &days,
            &tiny_unsupervised(),
            &PrepConfig::default(),
            &StrategyConfig::default(),
            &BaselineConfig {
                random_runs: 100,
                random_prob: 0.5,
            },
            9,
            1000,
        )
        .unwrap();
        let naive_e = bundle.naive.expectancy.unwrap();
        let random_e = bundle.random.expectancy.unwrap();
        // standard error proxy from the spread of per-trade returns is not
        // retained per run; use a loose band in return units instead
        let scale = naive_e.abs().max(1e-5);
        assert!(
            (random_e - naive_e).abs() <= 4.0 * scale,
            "random {random_e} vs naive {naive_e}"
        );
    }
}
