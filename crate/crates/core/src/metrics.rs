//! Ground-truth price-spike labeling and predictive metrics.
//!
//! A timestamp is a real spike when the mean absolute return over the
//! following window exceeds the intra-day median absolute return. Real
//! spikes are further classed momentum or reversion by comparing the trend
//! before and after. The report bundles precision-style rates plus the
//! penalised spike accuracy used as a tuning objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_LABEL_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendClass {
    Momentum,
    Reversion,
    /// Trend product exactly zero.
    Neutral,
}

/// Per-timestamp label; fields are `None` where the forward or backward
/// window falls off the series.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpikeLabel {
    pub is_real: Option<bool>,
    pub trend: Option<TrendClass>,
}

/// Labeled series for one day.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub r_thresh: f64,
    pub window: usize,
    pub labels: Vec<SpikeLabel>,
}

/// Absolute one-step percentage returns; entry `t` covers the move from `t`
/// to `t+1`.
pub fn abs_returns(vwap: &[f64]) -> Result<Vec<f64>> {
    if vwap.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            got: vwap.len(),
        });
    }
    vwap.windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[0] <= 0.0 {
                Err(Error::ZeroPrice(i))
            } else {
                Ok((w[1] / w[0] - 1.0).abs())
            }
        })
        .collect()
}

/// Median of the intra-day absolute return series (even length takes the
/// mean of the central pair).
pub fn spike_threshold(abs_rets: &[f64]) -> f64 {
    assert!(!abs_rets.is_empty(), "empty return series");
    crate::market::quantile(abs_rets, 0.5)
}

/// Label every timestamp of a day's VWAP series.
///
/// `is_real(t)` compares the mean absolute return over `(t, t+w]` against the
/// median threshold (strict). The trend class at `t` uses the sign of
/// `(x[t] - x[t-w]) * (x[t+w] - x[t])`. Boundary timestamps without a full
/// window stay unlabeled and are excluded from every denominator.
pub fn label_ground_truth(
    vwap: &[f64],
    window: usize,
    r_thresh: Option<f64>,
) -> Result<GroundTruth> {
    if window == 0 {
        return Err(Error::InvalidParam("label window must be >= 1".into()));
    }
    if vwap.len() <= 2 * window {
        return Err(Error::InsufficientHistory {
            needed: 2 * window,
            got: vwap.len(),
        });
    }
    let rets = abs_returns(vwap)?;
    let r_thresh = match r_thresh {
        Some(t) => t,
        None => spike_threshold(&rets),
    };
    let m = vwap.len();
    let mut labels = vec![SpikeLabel::default(); m];
    for (t, label) in labels.iter_mut().enumerate() {
        // strength needs returns (t, t+w]; rets[j] covers j -> j+1, so the
        // last usable index is m-2
        if t + window <= m - 2 {
            let s: f64 = rets[t + 1..=t + window].iter().sum::<f64>() / window as f64;
            label.is_real = Some(s > r_thresh);
        }
        if t >= window && t + window < m {
            let product = (vwap[t] - vwap[t - window]) * (vwap[t + window] - vwap[t]);
            label.trend = Some(if product > 0.0 {
                TrendClass::Momentum
            } else if product < 0.0 {
                TrendClass::Reversion
            } else {
                TrendClass::Neutral
            });
        }
    }
    Ok(GroundTruth {
        r_thresh,
        window,
        labels,
    })
}

/// Metric bundle; `None` marks an undefined ratio (zero denominator), never
/// reported as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub spike_accuracy: Option<f64>,
    pub momentum_spike_pct: Option<f64>,
    pub spiking_rate: f64,
    pub real_spiking_rate: f64,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub psa: Option<f64>,
    pub srd: Option<f64>,
    pub n_labeled: usize,
    pub n_predicted: usize,
    pub n_real: usize,
}

/// Confusion counts over the labeled timestamps of one or more days.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub labeled: usize,
    pub predicted: usize,
    pub real: usize,
    pub predicted_real: usize,
    pub predicted_fake: usize,
    pub predicted_momentum: usize,
}

impl EvalCounts {
    /// Tally one day; predictions align index-for-index with the labels.
    pub fn accumulate(&mut self, predictions: &[bool], truth: &GroundTruth) -> Result<()> {
        self.accumulate_labels(predictions, &truth.labels)
    }

    /// Tally against a bare label slice (stream evaluation).
    pub fn accumulate_labels(&mut self, predictions: &[bool], labels: &[SpikeLabel]) -> Result<()> {
        if predictions.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} predictions vs {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        for (&pred, label) in predictions.iter().zip(labels) {
            let Some(is_real) = label.is_real else {
                continue;
            };
            self.labeled += 1;
            if is_real {
                self.real += 1;
            }
            if pred {
                self.predicted += 1;
                if is_real {
                    self.predicted_real += 1;
                    if label.trend == Some(TrendClass::Momentum) {
                        self.predicted_momentum += 1;
                    }
                } else {
                    self.predicted_fake += 1;
                }
            }
        }
        Ok(())
    }

    pub fn report(&self, alpha: f64) -> MetricsReport {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        let fake = self.labeled - self.real;
        let spiking_rate = if self.labeled == 0 {
            0.0
        } else {
            self.predicted as f64 / self.labeled as f64
        };
        let real_spiking_rate = if self.labeled == 0 {
            0.0
        } else {
            self.real as f64 / self.labeled as f64
        };
        let spike_accuracy = ratio(self.predicted_real, self.predicted);
        let (psa_v, srd_v) = match spike_accuracy {
            Some(sa) if real_spiking_rate > 0.0 => {
                let (p, s) = psa(sa, spiking_rate, real_spiking_rate, alpha)
                    .expect("real rate checked positive");
                (Some(p), Some(s))
            }
            _ => {
                let srd = if real_spiking_rate > 0.0 {
                    Some(spiking_rate / real_spiking_rate - 1.0)
                } else {
                    None
                };
                (None, srd)
            }
        };
        MetricsReport {
            spike_accuracy,
            momentum_spike_pct: ratio(self.predicted_momentum, self.predicted),
            spiking_rate,
            real_spiking_rate,
            tpr: ratio(self.predicted_real, self.real),
            fpr: ratio(self.predicted_fake, fake),
            psa: psa_v,
            srd: srd_v,
            n_labeled: self.labeled,
            n_predicted: self.predicted,
            n_real: self.real,
        }
    }
}

/// Evaluate one day of predictions against its ground truth.
pub fn evaluate(predictions: &[bool], truth: &GroundTruth, alpha: f64) -> Result<MetricsReport> {
    let mut counts = EvalCounts::default();
    counts.accumulate(predictions, truth)?;
    Ok(counts.report(alpha))
}

/// Penalised spike accuracy and the spike-rate deviation behind it.
///
/// The penalty decays exponentially once |SRD| exceeds the tolerance, so
/// accuracy only counts at an actionable spiking rate.
pub fn psa(
    spike_accuracy: f64,
    spiking_rate: f64,
    real_spiking_rate: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if real_spiking_rate <= 0.0 {
        return Err(Error::NoRealSpikes);
    }
    let srd = spiking_rate / real_spiking_rate - 1.0;
    let penalty = (-(srd.abs() - alpha).max(0.0)).exp();
    Ok((spike_accuracy * penalty, srd))
}
