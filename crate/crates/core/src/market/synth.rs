//! Synthetic tick data: a random-walk mid-price with injected momentum
//! bursts and log-normal volumes. Substitutes for a proprietary exchange
//! feed; burst start indices are returned as diagnostics only.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tick::Tick;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_days: usize,
    pub ticks_per_day: usize,
    pub base_price: f64,
    /// Per-tick log-return standard deviation of the background walk.
    pub noise_volatility: f64,
    /// Probability per tick of starting a momentum burst.
    pub spike_rate: f64,
    /// Burst move size as a multiple of the noise volatility.
    pub spike_magnitude: f64,
    /// Probability per tick that an active burst continues.
    pub momentum_persistence: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_days: 19,
            ticks_per_day: 200_000,
            base_price: 120.0,
            noise_volatility: 2.0e-5,
            spike_rate: 0.0011,
            spike_magnitude: 3.0,
            momentum_persistence: 0.995,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ticks_per_day == 0 {
            return Err(Error::EmptyDay);
        }
        if self.n_days == 0 {
            return Err(Error::InvalidConfig("n_days must be >= 1".into()));
        }
        for (name, rate) in [
            ("spike_rate", self.spike_rate),
            ("momentum_persistence", self.momentum_persistence),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        for (name, mag) in [
            ("base_price", self.base_price),
            ("noise_volatility", self.noise_volatility),
            ("spike_magnitude", self.spike_magnitude),
        ] {
            if !(mag > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// One generated day with burst diagnostics.
#[derive(Debug, Clone)]
pub struct SyntheticDay {
    pub date: String,
    pub ticks: Vec<Tick>,
    /// Tick indices where a burst was injected.
    pub burst_starts: Vec<usize>,
}

/// Sequential weekdays starting 2015-02-02, formatted YYYY-MM-DD.
fn trading_dates(n: usize) -> Vec<String> {
    const DAYS_IN_MONTH: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let (mut y, mut m, mut d) = (2015u32, 2u32, 2u32);
    let mut dates = Vec::with_capacity(n);
    let leap = |y: u32| (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    // Sakamoto's day-of-week: 0 = Sunday
    let dow = |y: u32, m: u32, d: u32| -> u32 {
        const T: [u32; 12] = [0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4];
        let yy = if m < 3 { y - 1 } else { y };
        (yy + yy / 4 - yy / 100 + yy / 400 + T[(m - 1) as usize] + d) % 7
    };
    while dates.len() < n {
        let w = dow(y, m, d);
        if w != 0 && w != 6 {
            dates.push(format!("{y:04}-{m:02}-{d:02}"));
        }
        let dim = if m == 2 && leap(y) {
            29
        } else {
            DAYS_IN_MONTH[(m - 1) as usize]
        };
        d += 1;
        if d > dim {
            d = 1;
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
    }
    dates
}

/// Generate per-day tick sequences, deterministic per seed.
pub fn generate_synthetic_ticks(config: &SyntheticConfig) -> Result<Vec<SyntheticDay>> {
    config.validate()?;
    let dates = trading_dates(config.n_days);
    let volume_dist = LogNormal::new(4.0, 1.0).expect("valid lognormal");
    let mut days = Vec::with_capacity(config.n_days);
    for (day_idx, date) in dates.into_iter().enumerate() {
        let mut rng = seed::rng_indexed(config.seed, "synth-day", day_idx as u64);
        let mut ticks = Vec::with_capacity(config.ticks_per_day);
        let mut burst_starts = Vec::new();
        let mut price = config.base_price;
        let mut timestamp_us: i64 = 0;
        // while a burst is active this holds its signed per-tick scale;
        // each burst draws its own strength so weak and strong bursts mix
        let mut burst_scale: f64 = 0.0;
        let price_floor = config.base_price * 0.01;
        for i in 0..config.ticks_per_day {
            let z: f64 = StandardNormal.sample(&mut rng);
            let log_ret = if burst_scale != 0.0 {
                let r = burst_scale * config.noise_volatility * (0.5 + z.abs());
                if rng.random::<f64>() >= config.momentum_persistence {
                    burst_scale = 0.0;
                }
                r
            } else {
                if rng.random::<f64>() < config.spike_rate {
                    let dir = if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
                    let strength = config.spike_magnitude * rng.random_range(0.25..=1.0);
                    burst_scale = dir * strength;
                    burst_starts.push(i);
                }
                config.noise_volatility * z
            };
            price = (price * log_ret.exp()).max(price_floor);
            timestamp_us += rng.random_range(50..=500);
            let sampled: f64 = volume_dist.sample(&mut rng);
            let volume = (sampled.round() as u64).max(1);
            ticks.push(Tick {
                timestamp_us,
                price,
                volume,
            });
        }
        days.push(SyntheticDay {
            date,
            ticks,
            burst_starts,
        });
    }
    Ok(days)
}
