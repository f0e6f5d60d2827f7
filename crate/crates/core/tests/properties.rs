//! Property tests over the pipeline invariants.

use proptest::prelude::*;

use tickspike::backtest::{max_drawdown, run_strategy, StrategyConfig};
use tickspike::engine::{Raster, SynapseSign};
use tickspike::market::{aggregate_vwap, make_difference_features, normalize, Tick};
use tickspike::metrics::psa;
use tickspike::plasticity::{apply_deltas, homeostasis, stdp_deltas, StdpParams};

fn tick_strategy() -> impl Strategy<Value = Tick> {
    (1.0f64..1000.0, 1u64..10_000).prop_map(|(price, volume)| Tick {
        timestamp_us: 0,
        price,
        volume,
    })
}

proptest! {
    /// VWAP of every window lies between the window's price extremes.
    #[test]
    fn vwap_bounded_by_window(ticks in prop::collection::vec(tick_strategy(), 1..200),
                              window in 1usize..20) {
        let bars = aggregate_vwap(&ticks, window).unwrap();
        for (bar, chunk) in bars.iter().zip(ticks.chunks(window)) {
            let lo = chunk.iter().map(|t| t.price).fold(f64::INFINITY, f64::min);
            let hi = chunk.iter().map(|t| t.price).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(bar.vwap >= lo - 1e-9 && bar.vwap <= hi + 1e-9);
        }
    }

    /// Positive minus negative channel reconstructs every signed difference
    /// exactly, and the two halves are never simultaneously nonzero.
    #[test]
    fn channel_split_is_bijective(prices in prop::collection::vec(1.0f64..500.0, 8..120),
                                  lags in 1usize..5) {
        prop_assume!(prices.len() > lags);
        let bars: Vec<_> = prices
            .iter()
            .enumerate()
            .map(|(index, &vwap)| tickspike::market::VwapBar { index, vwap, total_volume: 1 })
            .collect();
        let m = make_difference_features(&bars, lags).unwrap();
        for r in 0..m.n_rows() {
            let n = r + lags;
            for lag in 1..=lags {
                let pos = m.get(r, lag - 1);
                let neg = m.get(r, lags + lag - 1);
                prop_assert!(pos == 0.0 || neg == 0.0);
                prop_assert!((pos - neg - (prices[n] - prices[n - lag])).abs() < 1e-9);
            }
        }
    }

    /// Normalized values never escape [0, upper_bound].
    #[test]
    fn normalization_respects_upper_bound(prices in prop::collection::vec(1.0f64..500.0, 10..100),
                                          ub in 0.05f64..1.0) {
        let bars: Vec<_> = prices
            .iter()
            .enumerate()
            .map(|(index, &vwap)| tickspike::market::VwapBar { index, vwap, total_volume: 1 })
            .collect();
        let m = make_difference_features(&bars, 2).unwrap();
        let (out, _) = normalize(&m, 0.1, 0.9, ub).unwrap();
        for r in 0..out.n_rows() {
            for c in 0..out.n_channels() {
                let v = out.get(r, c);
                prop_assert!((0.0..=ub + 1e-12).contains(&v));
            }
        }
    }

    /// Sign bounds survive arbitrary update sequences with adversarially
    /// large learning rates.
    #[test]
    fn weight_bounds_invariant(pre_bits in prop::collection::vec(0u32..(1 << 20), 1..4),
                               post_bits in prop::collection::vec(0u32..(1 << 20), 1..4),
                               inhibitory in any::<bool>()) {
        let sign = if inhibitory { SynapseSign::Inhibitory } else { SynapseSign::Excitatory };
        let params = StdpParams::new(0.9, 0.8, 2.0, 2.0, 0.9, 0.8, 2.0, 2.0, 1.0).unwrap();
        let mut pre = Raster::new(pre_bits.len(), 20);
        let mut post = Raster::new(post_bits.len(), 20);
        for (n, bits) in pre_bits.iter().enumerate() {
            for t in 0..20 {
                if bits & (1 << t) != 0 {
                    pre.set(n, t);
                }
            }
        }
        for (n, bits) in post_bits.iter().enumerate() {
            for t in 0..20 {
                if bits & (1 << t) != 0 {
                    post.set(n, t);
                }
            }
        }
        let (lo, hi) = sign.bounds();
        let start = if inhibitory { -0.5 } else { 0.5 };
        let mut weights = vec![start; pre_bits.len() * post_bits.len()];
        for _ in 0..4 {
            let deltas = stdp_deltas(&pre, &post, &params, sign).unwrap();
            apply_deltas(&mut weights, &deltas, sign);
            homeostasis(&mut weights, sign);
            prop_assert!(weights.iter().all(|w| *w >= lo && *w <= hi));
        }
    }

    /// Penalised accuracy never exceeds raw accuracy; equality holds inside
    /// the tolerance band.
    #[test]
    fn psa_dominated_by_accuracy(sa in 0.0f64..1.0, rate in 0.0f64..1.0, real in 1e-6f64..1.0) {
        let (p, srd) = psa(sa, rate, real, 0.05).unwrap();
        prop_assert!(p <= sa + 1e-15);
        if srd.abs() <= 0.05 {
            prop_assert!(p == sa);
        }
    }

    /// Strategy execution: trade intervals never overlap, every exit is
    /// after its entry, and the equity curve's compounded end equals the
    /// trade product.
    #[test]
    fn strategy_invariants(seeds in prop::collection::vec(0.0f64..1.0, 40..200),
                           hold in 1usize..6) {
        let mut vwap = vec![100.0f64];
        for s in &seeds {
            let last = *vwap.last().unwrap();
            vwap.push(last * (1.0 + 0.01 * (s - 0.5)));
        }
        let preds: Vec<bool> = seeds.iter().map(|s| *s > 0.6).chain([false]).collect();
        let cfg = StrategyConfig { hold, ..StrategyConfig::default() };
        let (trades, equity) = run_strategy(&preds, &vwap, &cfg).unwrap();
        for w in trades.windows(2) {
            prop_assert!(w[1].entry_idx > w[0].exit_idx);
        }
        let product: f64 = trades.iter().map(|t| 1.0 + t.ret).product();
        prop_assert!((equity.last().unwrap() - product).abs() < 1e-10);
        for t in &trades {
            prop_assert!(t.exit_idx > t.entry_idx);
        }
        prop_assert!((0.0..=1.0).contains(&max_drawdown(&equity)));
    }
}
