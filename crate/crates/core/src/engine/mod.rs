//! Discrete-time LIF network simulation.
//!
//! Each VWAP timestamp is presented as a T-step spike-train window. Membrane
//! potentials and refractory flags reset before every timestamp, so each
//! presentation is an independent trial; spikes take one timestep per layer
//! to propagate.

mod lif;
mod network;
mod topology;

pub use lif::{step_lif, LifParams};
pub use network::{decode, init_network, Checkpoint, InitConfig, NetworkState, Raster, SimOutput};
pub use topology::{ModelVariant, SynapseGroup, SynapseSign, Topology};
