//! Unsupervised STDP training.
//!
//! Weight changes follow the exponential pairing window, realized with
//! exponential traces for all-to-all pairing inside each timestamp's T-step
//! window; traces never carry across timestamps. Inhibitory groups subtract
//! the window value instead of adding it. A homeostasis sweep contracts any
//! group whose mean absolute weight drifts above 0.5.

use serde::{Deserialize, Serialize};

use crate::engine::{NetworkState, Raster, SimOutput, SynapseSign};
use crate::error::{Error, Result};
use crate::tensor::SpikeTensor;

/// Learning-window parameters: excitatory (a/tau) and inhibitory
/// (b/theta) rates and time constants, plus the global learning-rate
/// multiplier eta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub eta: f64,
}

impl StdpParams {
    /// Excitatory-only parameters; inhibitory values mirror the excitatory
    /// ones for models without inhibitory synapses.
    pub fn excitatory(a_plus: f64, a_minus: f64, tau_plus: f64, tau_minus: f64) -> Result<Self> {
        Self::new(
            a_plus, a_minus, tau_plus, tau_minus, a_plus, a_minus, tau_plus, tau_minus, 1.0,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a_plus: f64,
        a_minus: f64,
        tau_plus: f64,
        tau_minus: f64,
        b_plus: f64,
        b_minus: f64,
        theta_plus: f64,
        theta_minus: f64,
        eta: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("a_plus", a_plus),
            ("a_minus", a_minus),
            ("b_plus", b_plus),
            ("b_minus", b_minus),
            ("eta", eta),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("tau_plus", tau_plus),
            ("tau_minus", tau_minus),
            ("theta_plus", theta_plus),
            ("theta_minus", theta_minus),
        ] {
            if !(v >= 1.0) {
                return Err(Error::InvalidParam(format!("{name} must be >= 1, got {v}")));
            }
        }
        if a_minus > a_plus {
            return Err(Error::InvalidParam(format!(
                "depression rate {a_minus} must not exceed potentiation rate {a_plus}"
            )));
        }
        if b_minus > b_plus {
            return Err(Error::InvalidParam(format!(
                "inhibitory depression rate {b_minus} must not exceed {b_plus}"
            )));
        }
        Ok(Self {
            a_plus,
            a_minus,
            tau_plus,
            tau_minus,
            b_plus,
            b_minus,
            theta_plus,
            theta_minus,
            eta,
        })
    }

    fn rates_for(&self, sign: SynapseSign) -> (f64, f64, f64, f64) {
        match sign {
            SynapseSign::Inhibitory => {
                (self.b_plus, self.b_minus, self.theta_plus, self.theta_minus)
            }
            _ => (self.a_plus, self.a_minus, self.tau_plus, self.tau_minus),
        }
    }
}

/// Exponential pairing window for one spike pair, dt = t_post - t_pre in
/// timesteps. Simultaneous spikes contribute nothing.
pub fn stdp_window(dt: i64, params: &StdpParams, sign: SynapseSign) -> f64 {
    let (plus, minus, tau_p, tau_m) = params.rates_for(sign);
    let w = match dt {
        0 => 0.0,
        d if d > 0 => plus * (-(d as f64) / tau_p).exp(),
        d => -minus * ((d as f64) / tau_m).exp(),
    };
    params.eta * w
}

/// Accumulated weight deltas for one synapse group over one timestamp
/// window, using exponential traces (all-to-all pairing, same-step pairs
/// excluded). Inhibitory groups negate the total so the update is
/// subtracted from the weight.
pub fn stdp_deltas(
    pre: &Raster,
    post: &Raster,
    params: &StdpParams,
    sign: SynapseSign,
) -> Result<Vec<f64>> {
    let mut deltas = vec![0.0; pre.n_neurons * post.n_neurons];
    stdp_deltas_into(pre, post, params, sign, &mut deltas)?;
    Ok(deltas)
}

fn stdp_deltas_into(
    pre: &Raster,
    post: &Raster,
    params: &StdpParams,
    sign: SynapseSign,
    deltas: &mut [f64],
) -> Result<()> {
    if pre.timesteps != post.timesteps {
        return Err(Error::ShapeMismatch(format!(
            "pre raster has {} steps, post has {}",
            pre.timesteps, post.timesteps
        )));
    }
    let n_pre = pre.n_neurons;
    let n_post = post.n_neurons;
    debug_assert_eq!(deltas.len(), n_pre * n_post);
    deltas.fill(0.0);

    let (plus, minus, tau_p, tau_m) = params.rates_for(sign);
    let decay_pre = (-1.0 / tau_p).exp();
    let decay_post = (-1.0 / tau_m).exp();
    let mut x_pre = vec![0.0; n_pre];
    let mut x_post = vec![0.0; n_post];

    for t in 0..pre.timesteps {
        for x in x_pre.iter_mut() {
            *x *= decay_pre;
        }
        for x in x_post.iter_mut() {
            *x *= decay_post;
        }
        // pair accumulation before the traces absorb this step's spikes, so
        // dt = 0 pairs contribute nothing
        for j in 0..n_post {
            if post.get(j, t) {
                for (i, &xp) in x_pre.iter().enumerate() {
                    deltas[i * n_post + j] += plus * xp;
                }
            }
        }
        for i in 0..n_pre {
            if pre.get(i, t) {
                for (j, &xq) in x_post.iter().enumerate() {
                    deltas[i * n_post + j] -= minus * xq;
                }
            }
        }
        for (i, x) in x_pre.iter_mut().enumerate() {
            if pre.get(i, t) {
                *x += 1.0;
            }
        }
        for (j, x) in x_post.iter_mut().enumerate() {
            if post.get(j, t) {
                *x += 1.0;
            }
        }
    }

    let flip = if sign == SynapseSign::Inhibitory {
        -1.0
    } else {
        1.0
    };
    for d in deltas.iter_mut() {
        *d *= params.eta * flip;
    }
    Ok(())
}

/// Add deltas to a group's weights and clamp to the sign bounds.
pub fn apply_deltas(weights: &mut [f64], deltas: &[f64], sign: SynapseSign) {
    let (lo, hi) = sign.bounds();
    for (w, d) in weights.iter_mut().zip(deltas) {
        *w = (*w + d).clamp(lo, hi);
    }
}

/// Contract a group by 5% when its mean absolute weight exceeds 0.5;
/// returns whether the reduction fired. Never increases a magnitude or
/// flips a sign.
pub fn homeostasis(weights: &mut [f64], sign: SynapseSign) -> bool {
    if weights.is_empty() {
        return false;
    }
    let mean_abs = weights.iter().map(|w| w.abs()).sum::<f64>() / weights.len() as f64;
    if mean_abs > 0.5 {
        let (lo, hi) = sign.bounds();
        for w in weights.iter_mut() {
            *w = (*w * 0.95).clamp(lo, hi);
        }
        true
    } else {
        false
    }
}

/// One row of the training log, emitted per group every `log_every`
/// timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct TrainLogRow {
    pub timestamp_index: usize,
    pub group: String,
    pub mean_weight: f64,
    /// Whether homeostasis fired for this group since the previous row.
    pub homeostasis_applied: bool,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub rows: Vec<TrainLogRow>,
}

impl TrainingLog {
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "timestamp_index,group,mean_weight,homeostasis_applied")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.timestamp_index, r.group, r.mean_weight, r.homeostasis_applied
            )?;
        }
        Ok(())
    }
}

/// Train a network on a row range of a spike tensor: simulate each
/// timestamp, apply the accumulated STDP deltas per synapse group, then run
/// the homeostasis sweep.
pub fn train_unsupervised(
    net: &mut NetworkState,
    tensor: &SpikeTensor,
    rows: std::ops::Range<usize>,
    params: &StdpParams,
    log_every: usize,
) -> Result<TrainingLog> {
    if rows.end > tensor.n_timestamps() {
        return Err(Error::ShapeMismatch(format!(
            "rows {}..{} exceed tensor with {} timestamps",
            rows.start,
            rows.end,
            tensor.n_timestamps()
        )));
    }
    let n_groups = net.topology.groups.len();
    let mut delta_bufs: Vec<Vec<f64>> = net
        .topology
        .groups
        .iter()
        .map(|g| vec![0.0; g.n_weights()])
        .collect();
    let mut out = SimOutput {
        rasters: net
            .topology
            .layer_sizes
            .iter()
            .map(|&n| Raster::new(n, tensor.timesteps()))
            .collect(),
        output_counts: vec![0; net.topology.n_outputs()],
    };
    let mut log = TrainingLog::default();
    let mut homeo_since_log = vec![false; n_groups];
    let log_every = log_every.max(1);

    for (step, row) in rows.clone().enumerate() {
        net.simulate_timestamp_into(tensor, row, &mut out)?;
        for gi in 0..n_groups {
            let g = &net.topology.groups[gi];
            let pre = slice_raster(&out.rasters[g.src_layer], g.src_range.clone());
            let post = slice_raster(&out.rasters[g.dst_layer], g.dst_range.clone());
            stdp_deltas_into(&pre, &post, params, g.sign, &mut delta_bufs[gi])?;
        }
        for gi in 0..n_groups {
            let sign = net.topology.groups[gi].sign;
            apply_deltas(&mut net.weights[gi], &delta_bufs[gi], sign);
        }
        for gi in 0..n_groups {
            let sign = net.topology.groups[gi].sign;
            if homeostasis(&mut net.weights[gi], sign) {
                homeo_since_log[gi] = true;
            }
        }
        if (step + 1) % log_every == 0 || step + 1 == rows.len() {
            for gi in 0..n_groups {
                log.rows.push(TrainLogRow {
                    timestamp_index: step + 1,
                    group: net.topology.groups[gi].name.clone(),
                    mean_weight: net.mean_weight(gi),
                    homeostasis_applied: homeo_since_log[gi],
                });
                homeo_since_log[gi] = false;
            }
        }
    }
    Ok(log)
}

/// Copy a neuron range out of a layer raster.
fn slice_raster(raster: &Raster, range: std::ops::Range<usize>) -> Raster {
    let mut out = Raster::new(range.len(), raster.timesteps);
    for (local, neuron) in range.enumerate() {
        for t in 0..raster.timesteps {
            if raster.get(neuron, t) {
                out.set(local, t);
            }
        }
    }
    out
}
