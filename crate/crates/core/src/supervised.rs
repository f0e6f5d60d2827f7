//! Supervised training: backpropagation through time with a fast-sigmoid
//! surrogate gradient, Adam updates, and a spike-count MSE loss.
//!
//! The forward pass replays the engine's LIF semantics step for step. The
//! backward pass walks a recorded tape; the spike nonlinearity contributes
//! the surrogate derivative, the reset subtraction is detached, and the
//! one-step refractory gate is treated as a recorded constant. A soft mode
//! swaps the hard threshold for the differentiable fast sigmoid (and lets
//! gradients flow through the reset), which makes the identical backward
//! code checkable against central finite differences.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::engine::{LifParams, ModelVariant, NetworkState, Topology};
use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::SpikeTensor;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub n_hidden: usize,
    pub v_thresh: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub target_hi: f64,
    pub target_lo: f64,
    pub surrogate_slope: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            n_hidden: 128,
            v_thresh: 1.0,
            beta: 0.9,
            epochs: 10,
            batch_size: 64,
            target_hi: 0.8,
            target_lo: 0.2,
            surrogate_slope: 25.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::InvalidParam("learning rate must be >= 0".into()));
        }
        if !(0.0 < self.target_lo && self.target_lo < self.target_hi && self.target_hi <= 1.0) {
            return Err(Error::InvalidParam(
                "targets must satisfy 0 < lo < hi <= 1".into(),
            ));
        }
        if !(self.surrogate_slope > 0.0) {
            return Err(Error::InvalidParam("surrogate slope must be > 0".into()));
        }
        Ok(())
    }
}

/// Fast-sigmoid derivative used in place of the spike Heaviside on the
/// backward pass.
#[inline]
pub fn surrogate_grad(v_minus_thresh: f64, slope: f64) -> f64 {
    let d = 1.0 + slope * v_minus_thresh.abs();
    1.0 / (d * d)
}

/// Differentiable stand-in spike whose derivative is `surrogate_grad`.
#[inline]
fn soft_spike(v_minus_thresh: f64, slope: f64) -> f64 {
    v_minus_thresh / (1.0 + slope * v_minus_thresh.abs())
}

/// Count-target MSE for one timestamp: the correct class aims at
/// `target_hi * T` spikes, the other at `target_lo * T`.
pub fn count_mse_loss(
    counts: [f64; 2],
    label: usize,
    timesteps: usize,
    target_hi: f64,
    target_lo: f64,
) -> f64 {
    let t = timesteps as f64;
    let target = |j: usize| {
        if j == label {
            target_hi * t
        } else {
            target_lo * t
        }
    };
    (counts[0] - target(0)).powi(2) + (counts[1] - target(1)).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeMode {
    /// Binary spikes, refractory gates, detached reset (production).
    Hard,
    /// Fast-sigmoid spikes, no refractory, reset gradient flows
    /// (finite-difference checks).
    Soft,
}

/// Recorded forward pass of one timestamp window.
struct Tape {
    timesteps: usize,
    /// Per layer: spike values, flattened t * n + i. Layer 0 is the input.
    spikes: Vec<Vec<f64>>,
    /// Per non-input layer (index shifted by one): v before reset.
    v_pre: Vec<Vec<f64>>,
    /// Per non-input layer: refractory gate (1 = integrating).
    gates: Vec<Vec<f64>>,
}

/// Forward pass; returns the tape and the output spike counts.
fn forward_tape(
    topo: &Topology,
    weights: &[Vec<f64>],
    lif: &LifParams,
    slope: f64,
    tensor: &SpikeTensor,
    row: usize,
    mode: SpikeMode,
) -> Result<(Tape, Vec<f64>)> {
    if tensor.n_channels() != topo.n_inputs() {
        return Err(Error::ShapeMismatch(format!(
            "tensor has {} channels, topology expects {}",
            tensor.n_channels(),
            topo.n_inputs()
        )));
    }
    let timesteps = tensor.timesteps();
    let n_layers = topo.layer_sizes.len();
    let mut tape = Tape {
        timesteps,
        spikes: topo
            .layer_sizes
            .iter()
            .map(|&n| vec![0.0; n * timesteps])
            .collect(),
        v_pre: topo.layer_sizes[1..]
            .iter()
            .map(|&n| vec![0.0; n * timesteps])
            .collect(),
        gates: topo.layer_sizes[1..]
            .iter()
            .map(|&n| vec![1.0; n * timesteps])
            .collect(),
    };

    let mut v_post: Vec<Vec<f64>> = topo.layer_sizes[1..]
        .iter()
        .map(|&n| vec![0.0; n])
        .collect();
    let mut currents: Vec<Vec<f64>> = topo.layer_sizes.iter().map(|&n| vec![0.0; n]).collect();

    for t in 0..timesteps {
        for c in 0..topo.n_inputs() {
            tape.spikes[0][t * topo.n_inputs() + c] = f64::from(tensor.spike(row, c, t));
        }
        for layer in 1..n_layers {
            currents[layer].fill(0.0);
        }
        if t > 0 {
            for (g, w) in topo.groups.iter().zip(weights) {
                let n_src_layer = topo.layer_sizes[g.src_layer];
                let n_dst = g.n_dst();
                let prev = &tape.spikes[g.src_layer][(t - 1) * n_src_layer..t * n_src_layer];
                let dst = &mut currents[g.dst_layer][g.dst_range.clone()];
                for (src_local, src) in g.src_range.clone().enumerate() {
                    let s = prev[src];
                    if s != 0.0 {
                        let row_w = &w[src_local * n_dst..(src_local + 1) * n_dst];
                        for (c, wv) in dst.iter_mut().zip(row_w) {
                            *c += wv * s;
                        }
                    }
                }
            }
        }
        for layer in 1..n_layers {
            let n = topo.layer_sizes[layer];
            for i in 0..n {
                let idx = t * n + i;
                let gate = match mode {
                    SpikeMode::Soft => 1.0,
                    SpikeMode::Hard => {
                        if t > 0 && tape.spikes[layer][(t - 1) * n + i] != 0.0 {
                            0.0
                        } else {
                            1.0
                        }
                    }
                };
                tape.gates[layer - 1][idx] = gate;
                let v = lif.beta * v_post[layer - 1][i] + gate * currents[layer][i];
                tape.v_pre[layer - 1][idx] = v;
                let s = match mode {
                    SpikeMode::Hard => {
                        if gate != 0.0 && v >= lif.v_thresh {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    SpikeMode::Soft => soft_spike(v - lif.v_thresh, slope),
                };
                tape.spikes[layer][idx] = s;
                v_post[layer - 1][i] = v - s * lif.v_thresh;
            }
        }
    }

    let out_layer = n_layers - 1;
    let n_out = topo.layer_sizes[out_layer];
    let counts = (0..n_out)
        .map(|j| {
            (0..timesteps)
                .map(|t| tape.spikes[out_layer][t * n_out + j])
                .sum()
        })
        .collect();
    Ok((tape, counts))
}

/// Backward pass over a recorded tape; accumulates per-group weight
/// gradients.
#[allow(clippy::too_many_arguments)]
fn backward_tape(
    topo: &Topology,
    weights: &[Vec<f64>],
    lif: &LifParams,
    slope: f64,
    tape: &Tape,
    counts: &[f64],
    label: usize,
    cfg: &TrainConfig,
    mode: SpikeMode,
    grads: &mut [Vec<f64>],
) {
    let timesteps = tape.timesteps;
    let n_layers = topo.layer_sizes.len();
    let out_layer = n_layers - 1;
    let n_out = topo.layer_sizes[out_layer];
    let t_f = timesteps as f64;
    let reset_flows = matches!(mode, SpikeMode::Soft);

    // dL/ds per layer and step, filled top-down as the walk proceeds
    let mut ds: Vec<Vec<f64>> = topo
        .layer_sizes
        .iter()
        .map(|&n| vec![0.0; n * timesteps])
        .collect();
    for j in 0..n_out {
        let target = if j == label {
            cfg.target_hi * t_f
        } else {
            cfg.target_lo * t_f
        };
        let d = 2.0 * (counts[j] - target);
        for t in 0..timesteps {
            ds[out_layer][t * n_out + j] = d;
        }
    }
    let mut dv_next: Vec<Vec<f64>> = topo.layer_sizes[1..]
        .iter()
        .map(|&n| vec![0.0; n])
        .collect();

    for t in (0..timesteps).rev() {
        for layer in (1..n_layers).rev() {
            let n = topo.layer_sizes[layer];
            for i in 0..n {
                let idx = t * n + i;
                let gate = tape.gates[layer - 1][idx];
                let sg = surrogate_grad(tape.v_pre[layer - 1][idx] - lif.v_thresh, slope);
                let ds_dv = gate * sg;
                let dpost_dpre = 1.0
                    - if reset_flows {
                        lif.v_thresh * ds_dv
                    } else {
                        0.0
                    };
                let dv = ds[layer][idx] * ds_dv + lif.beta * dv_next[layer - 1][i] * dpost_dpre;
                dv_next[layer - 1][i] = dv;
                let di = dv * gate;
                if di == 0.0 || t == 0 {
                    continue;
                }
                // distribute through every group feeding this neuron
                for (gi, g) in topo.groups.iter().enumerate() {
                    if g.dst_layer != layer || !g.dst_range.contains(&i) {
                        continue;
                    }
                    let i_local = i - g.dst_range.start;
                    let n_dst = g.n_dst();
                    let n_src_layer = topo.layer_sizes[g.src_layer];
                    for (src_local, src) in g.src_range.clone().enumerate() {
                        let s_prev = tape.spikes[g.src_layer][(t - 1) * n_src_layer + src];
                        grads[gi][src_local * n_dst + i_local] += di * s_prev;
                        ds[g.src_layer][(t - 1) * n_src_layer + src] +=
                            weights[gi][src_local * n_dst + i_local] * di;
                    }
                }
            }
        }
    }
}

/// Adam optimizer state, one moment pair per weight.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(shapes: &[usize]) -> Self {
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn apply(&mut self, weights: &mut [Vec<f64>], grads: &[Vec<f64>], lr: f64) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((w, g), (m, v)) in weights
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for k in 0..w.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                w[k] -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

/// Write the loss history as `epoch,mean_loss,train_accuracy`.
pub fn write_loss_history(history: &[EpochStats], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "epoch,mean_loss,train_accuracy")?;
    for e in history {
        writeln!(w, "{},{},{}", e.epoch, e.mean_loss, e.train_accuracy)?;
    }
    Ok(())
}

/// Train a two-output network with BPTT; labels are per-timestamp
/// real-spike flags, unlabeled rows are skipped.
pub fn train_supervised(
    net: &mut NetworkState,
    tensor: &SpikeTensor,
    labels: &[Option<bool>],
    cfg: &TrainConfig,
    train_seed: u64,
) -> Result<Vec<EpochStats>> {
    cfg.validate()?;
    if net.topology.variant != ModelVariant::Model3 {
        return Err(Error::InvalidConfig(
            "supervised training targets the dense two-output model".into(),
        ));
    }
    if labels.len() != tensor.n_timestamps() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels vs {} tensor rows",
            labels.len(),
            tensor.n_timestamps()
        )));
    }
    let usable: Vec<(usize, usize)> = labels
        .iter()
        .enumerate()
        .filter_map(|(r, l)| l.map(|real| (r, usize::from(real))))
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientHistory { needed: 1, got: 0 });
    }

    let shapes: Vec<usize> = net.weights.iter().map(Vec::len).collect();
    let mut adam = AdamState::new(&shapes);
    let mut grads: Vec<Vec<f64>> = shapes.iter().map(|&n| vec![0.0; n]).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order = usable.clone();
        let mut rng = seed::rng_indexed(train_seed, "epoch-shuffle", epoch as u64);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(cfg.batch_size.max(1)) {
            for g in grads.iter_mut() {
                g.fill(0.0);
            }
            for &(row, label) in batch {
                let (tape, counts) = forward_tape(
                    &net.topology,
                    &net.weights,
                    &net.lif,
                    cfg.surrogate_slope,
                    tensor,
                    row,
                    SpikeMode::Hard,
                )?;
                loss_sum += count_mse_loss(
                    [counts[0], counts[1]],
                    label,
                    tensor.timesteps(),
                    cfg.target_hi,
                    cfg.target_lo,
                );
                let predicted = usize::from(counts[1] > counts[0]);
                if predicted == label {
                    correct += 1;
                }
                backward_tape(
                    &net.topology,
                    &net.weights,
                    &net.lif,
                    cfg.surrogate_slope,
                    &tape,
                    &counts,
                    label,
                    cfg,
                    SpikeMode::Hard,
                    &mut grads,
                );
            }
            let scale = 1.0 / batch.len() as f64;
            for g in grads.iter_mut() {
                for v in g.iter_mut() {
                    *v *= scale;
                }
            }
            adam.apply(&mut net.weights, &grads, cfg.learning_rate);
        }
        history.push(EpochStats {
            epoch,
            mean_loss: loss_sum / usable.len() as f64,
            train_accuracy: correct as f64 / usable.len() as f64,
        });
    }
    Ok(history)
}

/// Spike counts of one row under the trainer's forward pass (hard mode).
pub fn forward_counts(net: &NetworkState, tensor: &SpikeTensor, row: usize) -> Result<Vec<f64>> {
    let (_, counts) = forward_tape(
        &net.topology,
        &net.weights,
        &net.lif,
        TrainConfig::default().surrogate_slope,
        tensor,
        row,
        SpikeMode::Hard,
    )?;
    Ok(counts)
}

/// Loss of one sample for explicit weight values (gradient-check hook).
#[allow(clippy::too_many_arguments)]
pub fn sample_loss(
    topo: &Topology,
    weights: &[Vec<f64>],
    lif: &LifParams,
    cfg: &TrainConfig,
    tensor: &SpikeTensor,
    row: usize,
    label: usize,
    mode: SpikeMode,
) -> Result<f64> {
    let (_, counts) = forward_tape(topo, weights, lif, cfg.surrogate_slope, tensor, row, mode)?;
    Ok(count_mse_loss(
        [counts[0], counts[1]],
        label,
        tensor.timesteps(),
        cfg.target_hi,
        cfg.target_lo,
    ))
}

/// Analytic gradients of one sample's loss (gradient-check hook).
#[allow(clippy::too_many_arguments)]
pub fn sample_gradients(
    topo: &Topology,
    weights: &[Vec<f64>],
    lif: &LifParams,
    cfg: &TrainConfig,
    tensor: &SpikeTensor,
    row: usize,
    label: usize,
    mode: SpikeMode,
) -> Result<Vec<Vec<f64>>> {
    let (tape, counts) = forward_tape(topo, weights, lif, cfg.surrogate_slope, tensor, row, mode)?;
    let mut grads: Vec<Vec<f64>> = weights.iter().map(|w| vec![0.0; w.len()]).collect();
    backward_tape(
        topo,
        weights,
        lif,
        cfg.surrogate_slope,
        &tape,
        &counts,
        label,
        cfg,
        mode,
        &mut grads,
    );
    Ok(grads)
}
