//! Poisson rate encoding of normalized features into spike trains.

use rand::Rng;
use rayon::prelude::*;

use super::features::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::SpikeTensor;

/// Encode each (timestamp, channel) value into a `timesteps`-long binary
/// train with an independent Bernoulli(value) draw per timestep.
///
/// Each train uses its own counter-derived RNG stream, so encoding is
/// deterministic for a fixed seed and independent of traversal order.
pub fn encode_poisson(
    features: &FeatureMatrix,
    timesteps: usize,
    encode_seed: u64,
) -> Result<SpikeTensor> {
    if timesteps == 0 {
        return Err(Error::InvalidParam("timesteps must be >= 1".into()));
    }
    let n = features.n_rows();
    let k = features.n_channels();
    for r in 0..n {
        for c in 0..k {
            let v = features.get(r, c);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::UnnormalizedInput {
                    row: r,
                    channel: c,
                    value: v,
                });
            }
        }
    }

    let mut tensor = SpikeTensor::zeros(n, k, timesteps);
    // rows are independent; encode them in parallel into per-row buffers
    let rows: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let words_per_train = timesteps.div_ceil(64);
            let mut row_bits = vec![0u64; k * words_per_train];
            for c in 0..k {
                let p = features.get(r, c);
                let mut rng = seed::rng_indexed(encode_seed, "train", (r * k + c) as u64);
                for t in 0..timesteps {
                    let u: f64 = rng.random();
                    if u < p {
                        row_bits[c * words_per_train + t / 64] |= 1u64 << (t % 64);
                    }
                }
            }
            row_bits
        })
        .collect();
    let words_per_train = timesteps.div_ceil(64);
    for (r, row_bits) in rows.into_iter().enumerate() {
        for c in 0..k {
            tensor.copy_train_words(
                r,
                c,
                &row_bits[c * words_per_train..(c + 1) * words_per_train],
            );
        }
    }
    Ok(tensor)
}
