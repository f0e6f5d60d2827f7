//! Feature construction from VWAP bars.
//!
//! Bipolar features are split into positive and negative channels so the
//! Poisson encoder only ever sees non-negative rates. Channel layout for the
//! difference features groups all positive lags first, then all negative
//! lags, which maps directly onto the two input pathways of the segregated
//! network models.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tick::VwapBar;
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"FEAT";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Unsigned,
}

/// Descriptor of one channel: source feature, lag, bipolar half.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub feature: String,
    pub lag: usize,
    pub sign: Sign,
}

/// Dense row-major feature values with channel labels.
///
/// Row `r` describes the source series at index `offset + r`; the first
/// `offset` bars are dropped so every row is fully defined.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_channels: usize,
    pub offset: usize,
    values: Vec<f64>,
    pub labels: Vec<ChannelLabel>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, labels: Vec<ChannelLabel>, offset: usize) -> Self {
        let n_channels = labels.len();
        Self {
            n_rows,
            n_channels,
            offset,
            values: vec![0.0; n_rows * n_channels],
            labels,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    #[inline]
    pub fn get(&self, row: usize, channel: usize) -> f64 {
        self.values[row * self.n_channels + channel]
    }

    #[inline]
    pub fn set(&mut self, row: usize, channel: usize, v: f64) {
        self.values[row * self.n_channels + channel] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_channels..(row + 1) * self.n_channels]
    }

    /// All values of one channel.
    pub fn channel_values(&self, channel: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, channel)).collect()
    }

    /// Indices of channels whose label matches `feature` and `sign`.
    pub fn channels_for(&self, feature: &str, sign: Sign) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.feature == feature && l.sign == sign)
            .map(|(i, _)| i)
            .collect()
    }

    /// Binary container: magic, version, shape, offset, row-major f64 values,
    /// then a JSON blob with the channel labels.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[0u8; 2])?;
        w.write_all(&(self.n_rows as u64).to_le_bytes())?;
        w.write_all(&(self.n_channels as u64).to_le_bytes())?;
        w.write_all(&(self.offset as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        let labels = serde_json::to_vec(&self.labels)?;
        w.write_all(&(labels.len() as u32).to_le_bytes())?;
        w.write_all(&labels)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::Container("bad magic, not a feature matrix".into()));
        }
        let mut u16b = [0u8; 2];
        r.read_exact(&mut u16b)?;
        if u16::from_le_bytes(u16b) != VERSION {
            return Err(Error::Container("unsupported feature version".into()));
        }
        r.read_exact(&mut u16b)?;
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)?;
        let n_rows = u64::from_le_bytes(u64b) as usize;
        r.read_exact(&mut u64b)?;
        let n_channels = u64::from_le_bytes(u64b) as usize;
        r.read_exact(&mut u64b)?;
        let offset = u64::from_le_bytes(u64b) as usize;
        let mut values = vec![0.0f64; n_rows * n_channels];
        let mut f64b = [0u8; 8];
        for v in values.iter_mut() {
            r.read_exact(&mut f64b)?;
            *v = f64::from_le_bytes(f64b);
        }
        let mut u32b = [0u8; 4];
        r.read_exact(&mut u32b)?;
        let mut labels_buf = vec![0u8; u32::from_le_bytes(u32b) as usize];
        r.read_exact(&mut labels_buf)?;
        let labels: Vec<ChannelLabel> = serde_json::from_slice(&labels_buf)?;
        if labels.len() != n_channels {
            return Err(Error::Container("label count mismatch".into()));
        }
        Ok(Self {
            n_rows,
            n_channels,
            offset,
            values,
            labels,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Lagged VWAP differences split into positive/negative channels.
///
/// Channels 0..k hold the positive halves for lags 1..=k, channels k..2k the
/// negative halves, so a segregated model reads pathway one from the first
/// half and pathway two from the second.
pub fn make_difference_features(bars: &[VwapBar], lags: usize) -> Result<FeatureMatrix> {
    if lags == 0 {
        return Err(Error::InvalidParam("lags must be >= 1".into()));
    }
    if bars.len() <= lags {
        return Err(Error::InsufficientHistory {
            needed: lags,
            got: bars.len(),
        });
    }
    let mut labels = Vec::with_capacity(2 * lags);
    for lag in 1..=lags {
        labels.push(ChannelLabel {
            feature: "diff".into(),
            lag,
            sign: Sign::Positive,
        });
    }
    for lag in 1..=lags {
        labels.push(ChannelLabel {
            feature: "diff".into(),
            lag,
            sign: Sign::Negative,
        });
    }
    let n_rows = bars.len() - lags;
    let mut m = FeatureMatrix::new(n_rows, labels, lags);
    for r in 0..n_rows {
        let n = r + lags;
        for lag in 1..=lags {
            let d = bars[n].vwap - bars[n - lag].vwap;
            m.set(r, lag - 1, d.max(0.0));
            m.set(r, lags + lag - 1, (-d).max(0.0));
        }
    }
    Ok(m)
}

/// Return, volatility and volume features for the supervised model.
///
/// Per lag: the lagged simple return, split into positive/negative channels.
/// Volatility is the rolling sample standard deviation of one-step returns
/// over `vol_window`; volume is the rolling total volume over the same
/// window.
pub fn make_supervised_features(
    bars: &[VwapBar],
    lag_set: &[usize],
    vol_window: usize,
) -> Result<FeatureMatrix> {
    if lag_set.is_empty() || lag_set.contains(&0) {
        return Err(Error::InvalidParam("lag set must be positive".into()));
    }
    if vol_window < 2 {
        return Err(Error::InvalidParam("vol window must be >= 2".into()));
    }
    let max_lag = *lag_set.iter().max().unwrap();
    let offset = max_lag.max(vol_window);
    if bars.len() <= offset {
        return Err(Error::InsufficientHistory {
            needed: offset,
            got: bars.len(),
        });
    }

    let mut labels = Vec::new();
    for &lag in lag_set {
        labels.push(ChannelLabel {
            feature: "return".into(),
            lag,
            sign: Sign::Positive,
        });
        labels.push(ChannelLabel {
            feature: "return".into(),
            lag,
            sign: Sign::Negative,
        });
    }
    labels.push(ChannelLabel {
        feature: "volatility".into(),
        lag: 0,
        sign: Sign::Unsigned,
    });
    labels.push(ChannelLabel {
        feature: "volume".into(),
        lag: 0,
        sign: Sign::Unsigned,
    });

    // one-step returns; step_returns[j] refers to the move from bar j-1 to j
    let mut step_returns = vec![0.0; bars.len()];
    for j in 1..bars.len() {
        if bars[j - 1].vwap <= 0.0 {
            return Err(Error::ZeroPrice(j - 1));
        }
        step_returns[j] = bars[j].vwap / bars[j - 1].vwap - 1.0;
    }

    let n_rows = bars.len() - offset;
    let mut m = FeatureMatrix::new(n_rows, labels, offset);
    for r in 0..n_rows {
        let n = r + offset;
        let mut ch = 0;
        for &lag in lag_set {
            let ret = bars[n].vwap / bars[n - lag].vwap - 1.0;
            m.set(r, ch, ret.max(0.0));
            m.set(r, ch + 1, (-ret).max(0.0));
            ch += 2;
        }
        let window = &step_returns[n + 1 - vol_window..=n];
        let mean = window.iter().sum::<f64>() / vol_window as f64;
        let var =
            window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (vol_window - 1) as f64;
        m.set(r, ch, var.sqrt());
        let volume: u64 = bars[n + 1 - vol_window..=n]
            .iter()
            .map(|b| b.total_volume)
            .sum();
        m.set(r, ch + 1, volume as f64);
    }
    Ok(m)
}
