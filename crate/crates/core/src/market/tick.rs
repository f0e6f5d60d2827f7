//! Ticks and VWAP bars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One transaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    /// Microseconds since session open; non-decreasing within a day.
    pub timestamp_us: i64,
    /// Trade price, strictly positive.
    pub price: f64,
    /// Trade size in shares, strictly positive.
    pub volume: u64,
}

/// Volume-weighted average price over one aggregation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VwapBar {
    pub index: usize,
    pub vwap: f64,
    pub total_volume: u64,
}

/// Aggregate ticks into VWAP bars of `window_n` transactions each.
///
/// A trailing partial window with at least one tick produces a final bar.
pub fn aggregate_vwap(ticks: &[Tick], window_n: usize) -> Result<Vec<VwapBar>> {
    if ticks.is_empty() {
        return Err(Error::NoTicks);
    }
    if window_n == 0 {
        return Err(Error::InvalidParam("vwap window must be >= 1".into()));
    }
    let mut bars = Vec::with_capacity(ticks.len().div_ceil(window_n));
    for (index, chunk) in ticks.chunks(window_n).enumerate() {
        let mut notional = 0.0;
        let mut total_volume = 0u64;
        for t in chunk {
            notional += t.price * t.volume as f64;
            total_volume += t.volume;
        }
        bars.push(VwapBar {
            index,
            vwap: notional / total_volume as f64,
            total_volume,
        });
    }
    Ok(bars)
}
