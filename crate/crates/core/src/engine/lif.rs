//! Leaky integrate-and-fire unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neuron dynamics: `V <- beta * V + I` per step, spike at `V >= v_thresh`,
/// reset by subtracting the threshold, then one refractory step during which
/// input is ignored and no spike can fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    pub beta: f64,
    pub v_thresh: f64,
    pub refractory_steps: u8,
}

impl LifParams {
    pub fn new(beta: f64, v_thresh: f64) -> Result<Self> {
        if !(0.0 < beta && beta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "beta must be in (0, 1), got {beta}"
            )));
        }
        if !(v_thresh > 0.0) {
            return Err(Error::InvalidParam(format!(
                "v_thresh must be > 0, got {v_thresh}"
            )));
        }
        Ok(Self {
            beta,
            v_thresh,
            refractory_steps: 1,
        })
    }
}

/// Advance one neuron one step; returns whether it spiked.
#[inline]
pub fn step_lif(
    params: &LifParams,
    potential: &mut f64,
    refractory: &mut u8,
    current: f64,
) -> bool {
    if *refractory > 0 {
        *refractory -= 1;
        *potential *= params.beta;
        return false;
    }
    *potential = params.beta * *potential + current;
    if *potential >= params.v_thresh {
        *potential -= params.v_thresh;
        *refractory = params.refractory_steps;
        true
    } else {
        false
    }
}
