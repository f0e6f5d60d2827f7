//! Tree-structured Parzen estimator sampler.
//!
//! Per-parameter univariate TPE: history splits at the gamma quantile of
//! scores into good and bad sets, kernel densities are fitted on each
//! (over the unit coordinate of the parameter's resolved range, so
//! dependent ranges stay satisfied by construction), and the candidate
//! maximizing the good/bad density ratio wins. The first `n_startup`
//! trials draw uniformly.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::space::{ParamSpec, Scale, SearchSpace};
use super::Trial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TpeConfig {
    /// Fraction of history treated as the good set.
    pub gamma: f64,
    /// Uniform trials before the density model engages.
    pub n_startup: usize,
    /// Candidates drawn from the good density per parameter.
    pub n_candidates: usize,
    /// Cap on the good-set size.
    pub good_cap: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
            good_cap: 10,
        }
    }
}

/// Map a value into the unit coordinate of its resolved range.
fn to_unit(spec: &ParamSpec, value: f64, lo: f64, hi: f64) -> f64 {
    let u = match spec.scale {
        Scale::Log => {
            if hi <= lo {
                0.5
            } else {
                (value.ln() - lo.ln()) / (hi.ln() - lo.ln())
            }
        }
        Scale::Linear | Scale::Int | Scale::Stepped(_) => {
            if hi <= lo {
                0.5
            } else {
                (value - lo) / (hi - lo)
            }
        }
        Scale::Categorical => value,
    };
    u.clamp(0.0, 1.0)
}

/// Map a unit coordinate back onto the parameter grid.
fn from_unit(spec: &ParamSpec, u: f64, lo: f64, hi: f64) -> f64 {
    match spec.scale {
        Scale::Linear => (lo + u * (hi - lo)).clamp(lo, hi),
        Scale::Log => (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(lo, hi),
        Scale::Int => {
            let span = hi - lo;
            (lo + (u * span).round()).clamp(lo, hi)
        }
        Scale::Stepped(step) => {
            let n_steps = ((hi - lo) / step).round();
            let k = (u * n_steps).round();
            (lo + k * step).clamp(lo, hi)
        }
        Scale::Categorical => u,
    }
}

fn uniform_draw(spec: &ParamSpec, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    match spec.scale {
        Scale::Categorical => {
            let idx = rng.random_range(0..spec.choices.len());
            spec.choices[idx]
        }
        _ => from_unit(spec, rng.random::<f64>(), lo, hi),
    }
}

/// Gaussian KDE over unit coordinates with a uniform prior component.
struct UnitKde {
    points: Vec<f64>,
    bandwidth: f64,
}

impl UnitKde {
    fn fit(points: Vec<f64>) -> Self {
        let n = points.len().max(1) as f64;
        let mean = points.iter().sum::<f64>() / n;
        let var = points.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
        let bandwidth = (1.06 * var.sqrt().max(0.05) * n.powf(-0.2)).max(1e-3);
        Self { points, bandwidth }
    }

    fn log_density(&self, u: f64) -> f64 {
        // mixture of the point kernels and one uniform prior on [0, 1]
        let mut acc = 1.0;
        let inv = 1.0 / self.bandwidth;
        for &p in &self.points {
            let z = (u - p) * inv;
            acc += (-0.5 * z * z).exp() * inv * 0.398_942_280_401_432_7;
        }
        (acc / (self.points.len() + 1) as f64).ln()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let idx = rng.random_range(0..=self.points.len());
        if idx == self.points.len() {
            rng.random::<f64>()
        } else {
            let z: f64 = StandardNormal.sample(rng);
            (self.points[idx] + z * self.bandwidth).clamp(0.0, 1.0)
        }
    }
}

/// Split scored history into good/bad index sets (maximization).
fn split_history(history: &[&Trial], cfg: &TpeConfig) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..history.len()).collect();
    order.sort_by(|&a, &b| {
        history[b]
            .score
            .partial_cmp(&history[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n_good = ((cfg.gamma * history.len() as f64).ceil() as usize)
        .clamp(1, cfg.good_cap.min(history.len()));
    (order[..n_good].to_vec(), order[n_good..].to_vec())
}

fn tpe_draw(
    spec: &ParamSpec,
    lo: f64,
    hi: f64,
    history: &[&Trial],
    cfg: &TpeConfig,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let (good_idx, bad_idx) = split_history(history, cfg);
    match spec.scale {
        Scale::Categorical => {
            let n_choices = spec.choices.len();
            let count = |idxs: &[usize]| -> Vec<f64> {
                let mut c = vec![1.0f64; n_choices]; // add-one smoothing
                for &i in idxs {
                    if let Some(v) = history[i].params.get(&spec.name) {
                        if let Some(pos) = spec.choices.iter().position(|ch| ch == v) {
                            c[pos] += 1.0;
                        }
                    }
                }
                let total: f64 = c.iter().sum();
                c.into_iter().map(|x| x / total).collect()
            };
            let p_good = count(&good_idx);
            let p_bad = count(&bad_idx);
            // draw candidates from the good distribution, keep the best ratio
            let mut best = (f64::NEG_INFINITY, 0usize);
            for _ in 0..cfg.n_candidates {
                let r: f64 = rng.random();
                let mut acc = 0.0;
                let mut cand = n_choices - 1;
                for (i, &p) in p_good.iter().enumerate() {
                    acc += p;
                    if r < acc {
                        cand = i;
                        break;
                    }
                }
                let ratio = p_good[cand].ln() - p_bad[cand].ln();
                if ratio > best.0 {
                    best = (ratio, cand);
                }
            }
            spec.choices[best.1]
        }
        _ => {
            let units = |idxs: &[usize]| -> Vec<f64> {
                idxs.iter()
                    .filter_map(|&i| {
                        let t = history[i];
                        let v = t.params.get(&spec.name)?;
                        let (tlo, thi) = spec.resolve_range(&t.params).ok()?;
                        Some(to_unit(spec, *v, tlo, thi))
                    })
                    .collect()
            };
            let good = UnitKde::fit(units(&good_idx));
            let bad = UnitKde::fit(units(&bad_idx));
            let mut best = (f64::NEG_INFINITY, 0.5);
            for _ in 0..cfg.n_candidates {
                let u = good.sample(rng);
                let ratio = good.log_density(u) - bad.log_density(u);
                if ratio > best.0 {
                    best = (ratio, u);
                }
            }
            from_unit(spec, best.1, lo, hi)
        }
    }
}

/// Draw a complete configuration.
///
/// Dependent ranges that become empty after clamping trigger a full
/// redraw (up to 10 attempts) before the trial fails.
pub fn sample(
    space: &SearchSpace,
    history: &[Trial],
    cfg: &TpeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<String, f64>> {
    let ok_trials: Vec<&Trial> = history
        .iter()
        .filter(|t| !t.failed && t.score.is_finite())
        .collect();
    let mut last_err = None;
    for _attempt in 0..10 {
        let mut drawn = BTreeMap::new();
        let mut ok = true;
        for p in &space.params {
            let (lo, hi) = match p.resolve_range(&drawn) {
                Ok(r) => r,
                Err(e) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
            };
            let v = if ok_trials.len() < cfg.n_startup {
                uniform_draw(p, lo, hi, rng)
            } else {
                tpe_draw(p, lo, hi, &ok_trials, cfg, rng)
            };
            drawn.insert(p.name.clone(), v);
        }
        if ok {
            return Ok(drawn);
        }
    }
    Err(last_err.unwrap_or(Error::UnsatisfiableRange("draw".into())))
}

/// Uniform draw over the whole space (random-search baseline).
pub fn sample_uniform(space: &SearchSpace, rng: &mut ChaCha8Rng) -> Result<BTreeMap<String, f64>> {
    let empty: [Trial; 0] = [];
    let cfg = TpeConfig {
        n_startup: usize::MAX,
        ..TpeConfig::default()
    };
    sample(space, &empty, &cfg, rng)
}
