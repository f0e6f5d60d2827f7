//! Robust per-channel normalization: quantile clipping then min-max rescale.
//!
//! Quantiles are computed per channel over all of that channel's values
//! (zeros included) with the linear-interpolation estimator. Values are
//! clipped to [q_low, q_high] and rescaled to [0, upper_bound]; constant
//! channels map to all-zeros. The fitted spec replays the identical
//! transform on later days, so test days never see their own statistics.

use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-channel clip bounds in source units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScale {
    pub q_low: f64,
    pub q_high: f64,
}

/// Fitted normalization transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub q_low_frac: f64,
    pub q_high_frac: f64,
    pub upper_bound: f64,
    pub channels: Vec<ChannelScale>,
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile fraction out of range");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Fit and apply the three-step normalization, returning the transformed
/// matrix and the fitted transform for replaying it on later days.
pub fn normalize(
    features: &FeatureMatrix,
    q_low: f64,
    q_high: f64,
    upper_bound: f64,
) -> Result<(FeatureMatrix, NormalizationSpec)> {
    if features.n_rows() == 0 {
        return Err(Error::InsufficientHistory { needed: 1, got: 0 });
    }
    if !(0.0 < upper_bound && upper_bound <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "upper_bound must be in (0, 1], got {upper_bound}"
        )));
    }
    if !(0.0..=1.0).contains(&q_low) || !(0.0..=1.0).contains(&q_high) || q_low > q_high {
        return Err(Error::InvalidParam(
            "quantile fractions must satisfy 0 <= q_low <= q_high <= 1".into(),
        ));
    }
    let channels = (0..features.n_channels())
        .map(|ch| {
            let vals = features.channel_values(ch);
            ChannelScale {
                q_low: quantile(&vals, q_low),
                q_high: quantile(&vals, q_high),
            }
        })
        .collect();
    let spec = NormalizationSpec {
        q_low_frac: q_low,
        q_high_frac: q_high,
        upper_bound,
        channels,
    };
    let out = apply_normalization(features, &spec)?;
    Ok((out, spec))
}

/// Replay a fitted spec on a feature matrix with the same channel layout.
pub fn apply_normalization(
    features: &FeatureMatrix,
    spec: &NormalizationSpec,
) -> Result<FeatureMatrix> {
    if spec.channels.len() != features.n_channels() {
        return Err(Error::ShapeMismatch(format!(
            "spec has {} channels, features have {}",
            spec.channels.len(),
            features.n_channels()
        )));
    }
    let mut out = FeatureMatrix::new(features.n_rows(), features.labels.clone(), features.offset);
    for ch in 0..features.n_channels() {
        let ChannelScale { q_low, q_high } = spec.channels[ch];
        let width = q_high - q_low;
        for r in 0..features.n_rows() {
            let v = if width <= 0.0 {
                // constant channel: no information, no spikes
                0.0
            } else {
                (features.get(r, ch).clamp(q_low, q_high) - q_low) / width * spec.upper_bound
            };
            out.set(r, ch, v);
        }
    }
    Ok(out)
}
