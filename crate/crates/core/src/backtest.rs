//! Spike-triggered momentum strategy and trading metrics.
//!
//! A prediction at timestamp t opens a position at the next bar's VWAP,
//! held for a fixed duration, one position at a time, full capital at 1x
//! leverage. Direction follows the position flag: price above its recent
//! average goes long, below goes short (an inversion switch exists because
//! the source material's prose and listing disagree).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrategyConfig {
    /// Look-back bars for the position flag.
    pub lookback: usize,
    /// Holding duration in bars.
    pub hold: usize,
    /// Swap long/short relative to the flag sign.
    pub invert_direction: bool,
    /// Round-trip cost in basis points (0 = frictionless).
    pub cost_bps: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            lookback: 3,
            hold: 3,
            invert_direction: false,
            cost_bps: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TradeDirection {
    Long,
    Short,
}

impl TradeDirection {
    fn sign(self) -> f64 {
        match self {
            TradeDirection::Long => 1.0,
            TradeDirection::Short => -1.0,
        }
    }
}

/// One executed round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub entry_idx: usize,
    pub exit_idx: usize,
    pub direction: TradeDirection,
    pub entry_vwap: f64,
    pub exit_vwap: f64,
    /// Signed fractional return net of costs.
    pub ret: f64,
}

/// Difference between the current price and the mean of the previous
/// `lookback` prices; `None` without enough history.
pub fn position_flag(vwap: &[f64], t: usize, lookback: usize) -> Option<f64> {
    if lookback == 0 || t < lookback || t >= vwap.len() {
        return None;
    }
    let mean = vwap[t - lookback..t].iter().sum::<f64>() / lookback as f64;
    Some(vwap[t] - mean)
}

/// Execute the strategy over one day.
///
/// Returns the trades and a per-timestamp equity curve (initial capital 1,
/// marked to market while a position is open, compounded at each exit).
/// Positions still open at the last bar are closed there.
pub fn run_strategy(
    predictions: &[bool],
    vwap: &[f64],
    cfg: &StrategyConfig,
) -> Result<(Vec<Trade>, Vec<f64>)> {
    if predictions.len() != vwap.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} bars",
            predictions.len(),
            vwap.len()
        )));
    }
    if cfg.lookback == 0 || cfg.hold == 0 {
        return Err(Error::InvalidParam("lookback and hold must be >= 1".into()));
    }
    let len = vwap.len();
    let cost = cfg.cost_bps * 1e-4;
    let mut trades = Vec::new();
    let mut equity = vec![1.0; len];
    let mut base = 1.0f64;
    let mut open: Option<(usize, usize, TradeDirection)> = None;

    for t in 0..len {
        if let Some((entry, exit, dir)) = open {
            if t == exit {
                let gross = dir.sign() * (vwap[exit] / vwap[entry] - 1.0);
                let ret = gross - cost;
                base *= 1.0 + ret;
                trades.push(Trade {
                    entry_idx: entry,
                    exit_idx: exit,
                    direction: dir,
                    entry_vwap: vwap[entry],
                    exit_vwap: vwap[exit],
                    ret,
                });
                open = None;
            }
        }
        equity[t] = match open {
            Some((entry, _, dir)) if t >= entry => {
                base * (1.0 + dir.sign() * (vwap[t] / vwap[entry] - 1.0))
            }
            _ => base,
        };
        if predictions[t] && open.is_none() {
            if let Some(flag) = position_flag(vwap, t, cfg.lookback) {
                if flag != 0.0 {
                    let mut dir = if flag > 0.0 {
                        TradeDirection::Long
                    } else {
                        TradeDirection::Short
                    };
                    if cfg.invert_direction {
                        dir = match dir {
                            TradeDirection::Long => TradeDirection::Short,
                            TradeDirection::Short => TradeDirection::Long,
                        };
                    }
                    let entry = t + 1;
                    let exit = (entry + cfg.hold).min(len - 1);
                    if entry < len && exit > entry {
                        open = Some((entry, exit, dir));
                    }
                }
            }
        }
    }
    Ok((trades, equity))
}

/// Aggregate trading report mirroring the standard metric table. Ratios
/// without a defined denominator are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingReport {
    pub cumulative_return: f64,
    pub sharpe: Option<f64>,
    pub max_drawdown: f64,
    pub win_rate: Option<f64>,
    pub profit_factor: Option<f64>,
    pub profit_loss_ratio: Option<f64>,
    pub expectancy: Option<f64>,
    pub n_trades: usize,
    pub scaled_cumulative_return: Option<f64>,
}

/// Largest peak-to-trough fraction of an equity curve.
pub fn max_drawdown(equity: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &v in equity {
        peak = peak.max(v);
        if peak > 0.0 {
            worst = worst.max((peak - v) / peak);
        }
    }
    worst
}

/// Annualized Sharpe ratio over per-day returns (sample standard deviation,
/// sqrt(252) scaling); `None` below two days or at zero variance.
fn sharpe_ratio(daily_returns: &[f64]) -> Option<f64> {
    if daily_returns.len() < 2 {
        return None;
    }
    let n = daily_returns.len() as f64;
    let mean = daily_returns.iter().sum::<f64>() / n;
    let var = daily_returns
        .iter()
        .map(|r| (r - mean) * (r - mean))
        .sum::<f64>()
        / (n - 1.0);
    if var <= 0.0 {
        return None;
    }
    Some(mean / var.sqrt() * 252.0_f64.sqrt())
}

/// Metric bundle over executed trades, an equity curve and per-day returns.
pub fn trading_metrics(trades: &[Trade], equity: &[f64], daily_returns: &[f64]) -> TradingReport {
    let final_equity = equity.last().copied().unwrap_or(1.0);
    let wins: Vec<f64> = trades.iter().map(|t| t.ret).filter(|r| *r > 0.0).collect();
    let losses: Vec<f64> = trades.iter().map(|t| t.ret).filter(|r| *r < 0.0).collect();
    let gain_sum: f64 = wins.iter().sum();
    let loss_sum: f64 = losses.iter().sum();
    let win_rate = if trades.is_empty() {
        None
    } else {
        Some(wins.len() as f64 / trades.len() as f64)
    };
    let profit_factor = if loss_sum < 0.0 {
        Some(gain_sum / loss_sum.abs())
    } else {
        None
    };
    let profit_loss_ratio = if !wins.is_empty() && !losses.is_empty() {
        let mean_win = gain_sum / wins.len() as f64;
        let mean_loss = loss_sum / losses.len() as f64;
        Some(mean_win / mean_loss.abs())
    } else {
        None
    };
    let expectancy = if trades.is_empty() {
        None
    } else {
        Some(trades.iter().map(|t| t.ret).sum::<f64>() / trades.len() as f64)
    };
    TradingReport {
        cumulative_return: final_equity - 1.0,
        sharpe: sharpe_ratio(daily_returns),
        max_drawdown: max_drawdown(equity),
        win_rate,
        profit_factor,
        profit_loss_ratio,
        expectancy,
        n_trades: trades.len(),
        scaled_cumulative_return: None,
    }
}

/// Arithmetic scaling of per-trade expectancy to a fixed trade budget:
/// `expectancy * trades_per_day * n_days`, as a return fraction.
pub fn scale_report(expectancy: f64, trades_per_day: usize, n_days: usize) -> f64 {
    expectancy * trades_per_day as f64 * n_days as f64
}

/// One test day ready for strategy execution.
#[derive(Debug, Clone)]
pub struct StrategyDay {
    pub date: String,
    pub vwap: Vec<f64>,
    pub predictions: Vec<bool>,
}

/// Evaluation of a prediction source over consecutive test days: each day
/// trades independently with capital chained across days, metrics pooled.
#[derive(Debug, Clone)]
pub struct RollingOutcome {
    pub per_day_trading: Vec<TradingReport>,
    pub aggregate: TradingReport,
    /// Concatenated equity curve over all test days.
    pub equity: Vec<f64>,
    /// Trades tagged with their day index; trade indices are day-local.
    pub trades: Vec<(usize, Trade)>,
    /// Start of each day inside the concatenated curve.
    pub day_offsets: Vec<usize>,
    pub daily_returns: Vec<f64>,
}

/// Run the strategy across consecutive test days.
pub fn run_days(days: &[StrategyDay], cfg: &StrategyConfig) -> Result<RollingOutcome> {
    let mut per_day_trading = Vec::with_capacity(days.len());
    let mut all_trades = Vec::new();
    let mut equity = Vec::new();
    let mut day_offsets = Vec::with_capacity(days.len());
    let mut daily_returns = Vec::with_capacity(days.len());
    let mut capital = 1.0f64;
    for (di, day) in days.iter().enumerate() {
        day_offsets.push(equity.len());
        let (trades, day_curve) = run_strategy(&day.predictions, &day.vwap, cfg)?;
        let day_final = day_curve.last().copied().unwrap_or(1.0);
        daily_returns.push(day_final - 1.0);
        per_day_trading.push(trading_metrics(&trades, &day_curve, &[]));
        equity.extend(day_curve.iter().map(|v| v * capital));
        capital *= day_final;
        all_trades.extend(trades.into_iter().map(|t| (di, t)));
    }
    let trades_flat: Vec<Trade> = all_trades.iter().map(|(_, t)| *t).collect();
    let aggregate = trading_metrics(&trades_flat, &equity, &daily_returns);
    Ok(RollingOutcome {
        per_day_trading,
        aggregate,
        equity,
        trades: all_trades,
        day_offsets,
        daily_returns,
    })
}

/// Write trades as `entry_idx,exit_idx,direction,entry_vwap,exit_vwap,return`;
/// indices refer to the concatenated equity curve.
pub fn write_trades_csv(
    trades: &[(usize, Trade)],
    day_offsets: &[usize],
    mut w: impl std::io::Write,
) -> Result<()> {
    writeln!(
        w,
        "entry_idx,exit_idx,direction,entry_vwap,exit_vwap,return"
    )?;
    for (day, t) in trades {
        let off = day_offsets.get(*day).copied().unwrap_or(0);
        writeln!(
            w,
            "{},{},{},{},{},{}",
            off + t.entry_idx,
            off + t.exit_idx,
            match t.direction {
                TradeDirection::Long => "long",
                TradeDirection::Short => "short",
            },
            t.entry_vwap,
            t.exit_vwap,
            t.ret
        )?;
    }
    Ok(())
}

/// Write an equity curve as `timestamp_idx,equity`.
pub fn write_equity_csv(equity: &[f64], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "timestamp_idx,equity")?;
    for (i, v) in equity.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

/// Per-strategy row of the aggregate report (averaged rows hold means, so
/// the trade count is fractional there).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub cumulative_return: f64,
    pub sharpe: Option<f64>,
    pub max_drawdown: f64,
    pub win_rate: Option<f64>,
    pub profit_factor: Option<f64>,
    pub profit_loss_ratio: Option<f64>,
    pub expectancy: Option<f64>,
    pub n_trades: f64,
    pub scaled_cumulative_return: Option<f64>,
    pub metrics: Option<MetricsReport>,
}

impl ReportRow {
    pub fn from_report(name: &str, r: &TradingReport, metrics: Option<MetricsReport>) -> Self {
        Self {
            name: name.to_string(),
            cumulative_return: r.cumulative_return,
            sharpe: r.sharpe,
            max_drawdown: r.max_drawdown,
            win_rate: r.win_rate,
            profit_factor: r.profit_factor,
            profit_loss_ratio: r.profit_loss_ratio,
            expectancy: r.expectancy,
            n_trades: r.n_trades as f64,
            scaled_cumulative_return: r.scaled_cumulative_return,
            metrics,
        }
    }

    /// Field-wise mean over runs; optional fields average over the runs
    /// where they are defined.
    pub fn mean_of(name: &str, reports: &[TradingReport]) -> Self {
        fn mean(vals: impl Iterator<Item = f64>) -> Option<f64> {
            let v: Vec<f64> = vals.collect();
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        }
        Self {
            name: name.to_string(),
            cumulative_return: mean(reports.iter().map(|r| r.cumulative_return)).unwrap_or(0.0),
            sharpe: mean(reports.iter().filter_map(|r| r.sharpe)),
            max_drawdown: mean(reports.iter().map(|r| r.max_drawdown)).unwrap_or(0.0),
            win_rate: mean(reports.iter().filter_map(|r| r.win_rate)),
            profit_factor: mean(reports.iter().filter_map(|r| r.profit_factor)),
            profit_loss_ratio: mean(reports.iter().filter_map(|r| r.profit_loss_ratio)),
            expectancy: mean(reports.iter().filter_map(|r| r.expectancy)),
            n_trades: mean(reports.iter().map(|r| r.n_trades as f64)).unwrap_or(0.0),
            scaled_cumulative_return: mean(
                reports.iter().filter_map(|r| r.scaled_cumulative_return),
            ),
            metrics: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn flag_examples() {
        assert_eq!(position_flag(&[10.0, 10.0, 10.0, 13.0], 3, 3), Some(3.0));
        assert_eq!(position_flag(&[10.0; 8], 5, 3), Some(0.0));
        assert_eq!(position_flag(&[10.0, 11.0], 1, 3), None);
    }

    #[test]
    fn flag_matches_brute_force_mean() {
        let mut rng = crate::seed::rng(3, "flag");
        let vwap: Vec<f64> = (0..200)
            .map(|_| 90.0 + rng.random::<f64>() * 20.0)
            .collect();
        for t in 3..vwap.len() {
            let mut s = 0.0;
            for i in 1..=3 {
                s += vwap[t - i];
            }
            let expected = vwap[t] - s / 3.0;
            assert!((position_flag(&vwap, t, 3).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn no_predictions_means_flat_equity() {
        let vwap = vec![100.0, 101.0, 102.0, 103.0, 104.0];
        let preds = vec![false; 5];
        let (trades, equity) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        assert!(trades.is_empty());
        assert!(equity.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn zero_flag_produces_no_trade() {
        let vwap = vec![100.0, 100.0, 100.0, 100.0, 110.0, 120.0];
        let mut preds = vec![false; 6];
        preds[3] = true; // flag at t=3 is exactly zero
        let (trades, _) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        assert!(trades.is_empty());
    }

    #[test]
    fn upward_flag_goes_long_at_next_bar() {
        // hand-walk: spike at t=4, flag 110 - 100 = 10 > 0 -> long,
        // entry vwap[5] = 120, hold 1 -> exit vwap[6] = 125
        let vwap = vec![100.0, 100.0, 100.0, 100.0, 110.0, 120.0, 125.0];
        let mut preds = vec![false; 7];
        preds[4] = true;
        let cfg = StrategyConfig {
            hold: 1,
            ..StrategyConfig::default()
        };
        let (trades, equity) = run_strategy(&preds, &vwap, &cfg).unwrap();
        assert_eq!(trades.len(), 1);
        let t = &trades[0];
        assert_eq!(t.direction, TradeDirection::Long);
        assert_eq!((t.entry_idx, t.exit_idx), (5, 6));
        assert!((t.ret - (125.0 / 120.0 - 1.0)).abs() < 1e-12);
        assert!((equity[6] - (1.0 + t.ret)).abs() < 1e-12);
    }

    #[test]
    fn downward_flag_goes_short() {
        let vwap = vec![100.0, 100.0, 100.0, 100.0, 90.0, 85.0, 80.0];
        let mut preds = vec![false; 7];
        preds[4] = true;
        let cfg = StrategyConfig {
            hold: 1,
            ..StrategyConfig::default()
        };
        let (trades, _) = run_strategy(&preds, &vwap, &cfg).unwrap();
        assert_eq!(trades[0].direction, TradeDirection::Short);
        assert!((trades[0].ret - (-(80.0 / 85.0 - 1.0))).abs() < 1e-12);

        let cfg_inv = StrategyConfig {
            hold: 1,
            invert_direction: true,
            ..StrategyConfig::default()
        };
        let (trades_inv, _) = run_strategy(&preds, &vwap, &cfg_inv).unwrap();
        assert_eq!(trades_inv[0].direction, TradeDirection::Long);
    }

    #[test]
    fn single_position_rule_ignores_overlapping_spikes() {
        let vwap: Vec<f64> = (0..12).map(|i| 100.0 + i as f64).collect();
        let mut preds = vec![false; 12];
        preds[4] = true;
        preds[5] = true; // one bar later, position still open
        let (trades, _) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        assert_eq!(trades.len(), 1);
    }

    #[test]
    fn trade_intervals_never_overlap() {
        let mut rng = crate::seed::rng(8, "overlap");
        let mut vwap = vec![100.0];
        for _ in 0..500 {
            let last = *vwap.last().unwrap();
            vwap.push(last * (1.0 + 0.01 * (rng.random::<f64>() - 0.5)));
        }
        let preds: Vec<bool> = (0..vwap.len()).map(|_| rng.random::<f64>() < 0.4).collect();
        let (trades, _) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        assert!(!trades.is_empty());
        for w in trades.windows(2) {
            assert!(w[1].entry_idx > w[0].exit_idx);
        }
        for t in &trades {
            assert!(t.exit_idx > t.entry_idx);
        }
    }

    #[test]
    fn day_end_truncation_closes_at_last_bar() {
        let vwap: Vec<f64> = (0..8).map(|i| 100.0 + i as f64).collect();
        let mut preds = vec![false; 8];
        preds[5] = true; // entry 6, hold 3 would exit at 9 -> clamp to 7
        let (trades, _) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        assert_eq!(trades.len(), 1);
        assert_eq!(trades[0].exit_idx, 7);
    }

    #[test]
    fn no_look_ahead_beyond_last_exit() {
        let mut rng = crate::seed::rng(12, "lookahead");
        let mut vwap = vec![100.0];
        for _ in 0..200 {
            let last = *vwap.last().unwrap();
            vwap.push(last * (1.0 + 0.01 * (rng.random::<f64>() - 0.5)));
        }
        let mut preds = vec![false; vwap.len()];
        for t in (10..150).step_by(17) {
            preds[t] = true;
        }
        let (trades, _) = run_strategy(&preds, &vwap, &StrategyConfig::default()).unwrap();
        let last_exit = trades.iter().map(|t| t.exit_idx).max().unwrap();
        // shift all prices after the last exit; executed trades must not move
        let mut shifted = vwap.clone();
        for v in shifted[last_exit + 1..].iter_mut() {
            *v *= 1.37;
        }
        let mut preds2 = preds.clone();
        for p in preds2[last_exit + 1..].iter_mut() {
            *p = false;
        }
        let (trades2, _) = run_strategy(&preds2, &shifted, &StrategyConfig::default()).unwrap();
        let head: Vec<&Trade> = trades2.iter().take(trades.len()).collect();
        for (a, b) in trades.iter().zip(head) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn accounting_identity_and_drawdown_oracle() {
        let mut rng = crate::seed::rng(21, "acct");
        let trades: Vec<Trade> = (0..500)
            .map(|i| {
                let ret = 0.02 * (rng.random::<f64>() - 0.5);
                Trade {
                    entry_idx: i * 2,
                    exit_idx: i * 2 + 1,
                    direction: TradeDirection::Long,
                    entry_vwap: 100.0,
                    exit_vwap: 100.0 * (1.0 + ret),
                    ret,
                }
            })
            .collect();
        let mut equity = vec![1.0];
        for t in &trades {
            let last = *equity.last().unwrap();
            equity.push(last * (1.0 + t.ret));
        }
        let product: f64 = trades.iter().map(|t| 1.0 + t.ret).product();
        assert!((equity.last().unwrap() - product).abs() < 1e-12);

        // quadratic peak/trough scan
        let mut oracle = 0.0f64;
        for i in 0..equity.len() {
            for j in i..equity.len() {
                oracle = oracle.max((equity[i] - equity[j]) / equity[i]);
            }
        }
        assert!((max_drawdown(&equity) - oracle).abs() < 1e-12);
    }

    #[test]
    fn drawdown_properties() {
        let up: Vec<f64> = (1..50).map(|i| i as f64).collect();
        assert_eq!(max_drawdown(&up), 0.0);
        let curve = vec![1.0, 1.2, 0.9, 1.1, 0.8];
        let scaled: Vec<f64> = curve.iter().map(|v| v * 7.5).collect();
        assert!((max_drawdown(&curve) - max_drawdown(&scaled)).abs() < 1e-12);
    }

    #[test]
    fn two_trade_arithmetic() {
        let mk = |ret: f64| Trade {
            entry_idx: 0,
            exit_idx: 1,
            direction: TradeDirection::Long,
            entry_vwap: 100.0,
            exit_vwap: 100.0 * (1.0 + ret),
            ret,
        };
        let trades = vec![mk(0.01), mk(-0.005)];
        let r = trading_metrics(&trades, &[1.0, 1.01, 1.004950], &[]);
        assert_eq!(r.win_rate, Some(0.5));
        assert!((r.profit_factor.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.expectancy.unwrap() - 0.0025).abs() < 1e-12);
        assert!((r.profit_loss_ratio.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.n_trades, 2);
    }

    #[test]
    fn published_scaling_identities() {
        // expectancy scaled by 1000 trades/day over 19 days
        let cases = [(8.15e-6, 15.49), (9.18e-6, 17.44), (0.0, 0.0)];
        for (expectancy, pct) in cases {
            let scaled = scale_report(expectancy, 1000, 19) * 100.0;
            assert!(
                (scaled - pct).abs() <= 0.01,
                "expectancy {expectancy} -> {scaled}% vs {pct}%"
            );
        }
    }

    #[test]
    fn run_days_chains_capital() {
        let day = |trend: f64| {
            let vwap: Vec<f64> = (0..40).map(|i| 100.0 * (1.0 + trend * i as f64)).collect();
            let mut predictions = vec![false; 40];
            predictions[10] = true;
            StrategyDay {
                date: "d".into(),
                vwap,
                predictions,
            }
        };
        let days = vec![day(0.001), day(-0.001)];
        let out = run_days(&days, &StrategyConfig::default()).unwrap();
        assert_eq!(out.daily_returns.len(), 2);
        assert_eq!(out.trades.len(), 2);
        let product: f64 = out.daily_returns.iter().map(|r| 1.0 + r).product();
        assert!((out.equity.last().unwrap() - product).abs() < 1e-12);
        assert!((out.aggregate.cumulative_return - (product - 1.0)).abs() < 1e-12);
    }
}
