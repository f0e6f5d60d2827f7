//! Network state, initialization, per-timestamp simulation and checkpoints.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lif::{step_lif, LifParams};
use super::topology::{SynapseSign, Topology};
use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::SpikeTensor;

/// Bit-packed spike raster of one layer over one timestamp window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub n_neurons: usize,
    pub timesteps: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Raster {
    pub fn new(n_neurons: usize, timesteps: usize) -> Self {
        let words = timesteps.div_ceil(64).max(1);
        Self {
            n_neurons,
            timesteps,
            words,
            bits: vec![0; n_neurons * words],
        }
    }

    fn clear(&mut self) {
        self.bits.fill(0);
    }

    #[inline]
    pub fn set(&mut self, neuron: usize, t: usize) {
        self.bits[neuron * self.words + t / 64] |= 1u64 << (t % 64);
    }

    #[inline]
    pub fn get(&self, neuron: usize, t: usize) -> bool {
        self.bits[neuron * self.words + t / 64] & (1u64 << (t % 64)) != 0
    }

    pub fn count(&self, neuron: usize) -> u32 {
        self.bits[neuron * self.words..(neuron + 1) * self.words]
            .iter()
            .map(|w| w.count_ones())
            .sum()
    }
}

/// Simulation result for one timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutput {
    /// One raster per layer, input included.
    pub rasters: Vec<Raster>,
    /// Spike count of each output neuron.
    pub output_counts: Vec<u32>,
}

/// Weight-initialization band for sign-constrained groups (magnitudes drawn
/// uniformly inside it). Unconstrained groups use a 1/sqrt(fan_in) band.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InitConfig {
    pub lo: f64,
    pub hi: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { lo: 0.3, hi: 0.7 }
    }
}

/// Topology, weights and transient neuron state.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub topology: Topology,
    pub lif: LifParams,
    /// One row-major weight matrix per synapse group.
    pub weights: Vec<Vec<f64>>,
    potentials: Vec<Vec<f64>>,
    refractory: Vec<Vec<u8>>,
    spikes_prev: Vec<Vec<bool>>,
    spikes_now: Vec<Vec<bool>>,
    currents: Vec<Vec<f64>>,
    pub init_seed: u64,
}

impl NetworkState {
    fn with_weights(
        topology: Topology,
        lif: LifParams,
        weights: Vec<Vec<f64>>,
        init_seed: u64,
    ) -> Self {
        let sizes = topology.layer_sizes.clone();
        Self {
            topology,
            lif,
            weights,
            potentials: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            refractory: sizes.iter().map(|&n| vec![0u8; n]).collect(),
            spikes_prev: sizes.iter().map(|&n| vec![false; n]).collect(),
            spikes_now: sizes.iter().map(|&n| vec![false; n]).collect(),
            currents: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            init_seed,
        }
    }

    /// Clamp every group's weights to its sign bounds.
    pub fn clamp_weights(&mut self) {
        for (g, w) in self.topology.groups.iter().zip(self.weights.iter_mut()) {
            let (lo, hi) = g.sign.bounds();
            for v in w.iter_mut() {
                *v = v.clamp(lo, hi);
            }
        }
    }

    /// True when every weight respects its group's sign bounds.
    pub fn weights_in_bounds(&self) -> bool {
        self.topology
            .groups
            .iter()
            .zip(&self.weights)
            .all(|(g, w)| {
                let (lo, hi) = g.sign.bounds();
                w.iter().all(|v| v.is_finite() && *v >= lo && *v <= hi)
            })
    }

    pub fn mean_weight(&self, group: usize) -> f64 {
        let w = &self.weights[group];
        w.iter().sum::<f64>() / w.len() as f64
    }

    fn reset_transients(&mut self) {
        for layer in 0..self.topology.layer_sizes.len() {
            self.potentials[layer].fill(0.0);
            self.refractory[layer].fill(0);
            self.spikes_prev[layer].fill(false);
            self.spikes_now[layer].fill(false);
        }
    }

    /// Present one tensor row for its full T-step window.
    ///
    /// State resets first, so the call is a pure function of (weights,
    /// input, params). Input currents at step t come from spikes emitted at
    /// t-1: one timestep of delay per layer.
    pub fn simulate_timestamp(&mut self, tensor: &SpikeTensor, row: usize) -> Result<SimOutput> {
        let timesteps = tensor.timesteps();
        let mut out = SimOutput {
            rasters: self
                .topology
                .layer_sizes
                .iter()
                .map(|&n| Raster::new(n, timesteps))
                .collect(),
            output_counts: vec![0; self.topology.n_outputs()],
        };
        self.simulate_timestamp_into(tensor, row, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant for training loops.
    pub fn simulate_timestamp_into(
        &mut self,
        tensor: &SpikeTensor,
        row: usize,
        out: &mut SimOutput,
    ) -> Result<()> {
        let n_layers = self.topology.layer_sizes.len();
        let k = self.topology.n_inputs();
        if tensor.n_channels() != k {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} channels, topology expects {k}",
                tensor.n_channels()
            )));
        }
        if out.rasters.len() != n_layers
            || out
                .rasters
                .iter()
                .zip(&self.topology.layer_sizes)
                .any(|(r, &n)| r.n_neurons != n || r.timesteps != tensor.timesteps())
        {
            return Err(Error::ShapeMismatch("sim output buffers".into()));
        }
        self.reset_transients();
        for r in out.rasters.iter_mut() {
            r.clear();
        }

        let timesteps = tensor.timesteps();
        for t in 0..timesteps {
            // currents from last step's spikes
            for layer in 1..n_layers {
                self.currents[layer].fill(0.0);
            }
            for (g, w) in self.topology.groups.iter().zip(&self.weights) {
                let n_dst = g.n_dst();
                let src_spikes = &self.spikes_prev[g.src_layer];
                let dst_currents = &mut self.currents[g.dst_layer][g.dst_range.clone()];
                for (src_local, src) in g.src_range.clone().enumerate() {
                    if src_spikes[src] {
                        let row_w = &w[src_local * n_dst..(src_local + 1) * n_dst];
                        for (c, wv) in dst_currents.iter_mut().zip(row_w) {
                            *c += wv;
                        }
                    }
                }
            }

            // input layer replays the encoded train
            for c in 0..k {
                let s = tensor.spike(row, c, t);
                self.spikes_now[0][c] = s;
                if s {
                    out.rasters[0].set(c, t);
                }
            }

            // LIF layers
            for layer in 1..n_layers {
                for i in 0..self.topology.layer_sizes[layer] {
                    let spiked = step_lif(
                        &self.lif,
                        &mut self.potentials[layer][i],
                        &mut self.refractory[layer][i],
                        self.currents[layer][i],
                    );
                    self.spikes_now[layer][i] = spiked;
                    if spiked {
                        out.rasters[layer].set(i, t);
                    }
                }
            }

            std::mem::swap(&mut self.spikes_prev, &mut self.spikes_now);
        }

        let out_layer = n_layers - 1;
        for (i, c) in out.output_counts.iter_mut().enumerate() {
            *c = out.rasters[out_layer].count(i);
        }
        Ok(())
    }

    /// Boolean price-spike prediction from output counts.
    ///
    /// Single-output models compare against the decoding threshold; the
    /// two-output supervised model takes the argmax with ties resolved to
    /// the no-spike class.
    pub fn predict_from_counts(&self, counts: &[u32], d_thresh: u32) -> bool {
        match counts.len() {
            1 => decode(counts[0], d_thresh),
            2 => counts[1] > counts[0],
            _ => unreachable!("models have one or two output neurons"),
        }
    }
}

/// Strict decoding: a price spike is predicted only when the output count
/// exceeds the threshold.
#[inline]
pub fn decode(output_count: u32, d_thresh: u32) -> bool {
    output_count > d_thresh
}

/// Fresh network with uniformly drawn weights, deterministic per seed.
pub fn init_network(
    topology: &Topology,
    lif: LifParams,
    init_seed: u64,
    init: InitConfig,
) -> Result<NetworkState> {
    if !(0.0 <= init.lo && init.lo <= init.hi && init.hi <= 1.0) {
        return Err(Error::InvalidParam(
            "init band must satisfy 0 <= lo <= hi <= 1".into(),
        ));
    }
    let mut weights = Vec::with_capacity(topology.groups.len());
    for (gi, g) in topology.groups.iter().enumerate() {
        let mut rng = seed::rng_indexed(init_seed, "init-group", gi as u64);
        let w: Vec<f64> = match g.sign {
            SynapseSign::Excitatory => (0..g.n_weights())
                .map(|_| rng.random_range(init.lo..=init.hi))
                .collect(),
            SynapseSign::Inhibitory => (0..g.n_weights())
                .map(|_| -rng.random_range(init.lo..=init.hi))
                .collect(),
            SynapseSign::Unconstrained => {
                let bound = 1.0 / (g.n_src() as f64).sqrt();
                (0..g.n_weights())
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect()
            }
        };
        weights.push(w);
    }
    Ok(NetworkState::with_weights(
        topology.clone(),
        lif,
        weights,
        init_seed,
    ))
}

/// Serializable snapshot of a trained network plus its decoding threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub topology: Topology,
    pub lif: LifParams,
    pub d_thresh: u32,
    pub weights: Vec<Vec<f64>>,
    pub init_seed: u64,
}

impl Checkpoint {
    pub fn from_network(net: &NetworkState, d_thresh: u32) -> Self {
        Self {
            version: 1,
            topology: net.topology.clone(),
            lif: net.lif,
            d_thresh,
            weights: net.weights.clone(),
            init_seed: net.init_seed,
        }
    }

    pub fn into_network(self) -> Result<(NetworkState, u32)> {
        if self.version != 1 {
            return Err(Error::Container(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        for (g, w) in self.topology.groups.iter().zip(&self.weights) {
            if g.n_weights() != w.len() {
                return Err(Error::ShapeMismatch(format!(
                    "group {} expects {} weights, checkpoint has {}",
                    g.name,
                    g.n_weights(),
                    w.len()
                )));
            }
        }
        let d = self.d_thresh;
        Ok((
            NetworkState::with_weights(self.topology, self.lif, self.weights, self.init_seed),
            d,
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
    }
}
