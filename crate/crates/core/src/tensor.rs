//! Spike tensors: binary trains indexed by (timestamp, channel, timestep).
//!
//! A tensor is the lingua franca between the preprocessing pipeline and the
//! networks. Trains are bit-packed, one little-endian u64 word block per
//! (timestamp, channel) pair, which keeps the full 19-day encoded stream in
//! tens of megabytes.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"SPKT";
const VERSION: u16 = 1;

/// Bit-packed binary spike trains with shape (timestamps, channels, timesteps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTensor {
    n_timestamps: usize,
    n_channels: usize,
    timesteps: usize,
    words_per_train: usize,
    bits: Vec<u64>,
}

impl SpikeTensor {
    pub fn zeros(n_timestamps: usize, n_channels: usize, timesteps: usize) -> Self {
        assert!(timesteps > 0, "timesteps must be positive");
        let words_per_train = timesteps.div_ceil(64);
        Self {
            n_timestamps,
            n_channels,
            timesteps,
            words_per_train,
            bits: vec![0; n_timestamps * n_channels * words_per_train],
        }
    }

    pub fn n_timestamps(&self) -> usize {
        self.n_timestamps
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    #[inline]
    fn train_offset(&self, timestamp: usize, channel: usize) -> usize {
        debug_assert!(timestamp < self.n_timestamps && channel < self.n_channels);
        (timestamp * self.n_channels + channel) * self.words_per_train
    }

    #[inline]
    pub fn set_spike(&mut self, timestamp: usize, channel: usize, timestep: usize) {
        debug_assert!(timestep < self.timesteps);
        let off = self.train_offset(timestamp, channel);
        self.bits[off + timestep / 64] |= 1u64 << (timestep % 64);
    }

    #[inline]
    pub fn spike(&self, timestamp: usize, channel: usize, timestep: usize) -> bool {
        debug_assert!(timestep < self.timesteps);
        let off = self.train_offset(timestamp, channel);
        self.bits[off + timestep / 64] & (1u64 << (timestep % 64)) != 0
    }

    /// Packed words of one (timestamp, channel) train.
    #[inline]
    pub fn train(&self, timestamp: usize, channel: usize) -> &[u64] {
        let off = self.train_offset(timestamp, channel);
        &self.bits[off..off + self.words_per_train]
    }

    /// Overwrite one train from packed words.
    pub(crate) fn copy_train_words(&mut self, timestamp: usize, channel: usize, words: &[u64]) {
        debug_assert_eq!(words.len(), self.words_per_train);
        let off = self.train_offset(timestamp, channel);
        self.bits[off..off + self.words_per_train].copy_from_slice(words);
    }

    /// Number of spikes in one train.
    pub fn count(&self, timestamp: usize, channel: usize) -> u32 {
        self.train(timestamp, channel)
            .iter()
            .map(|w| w.count_ones())
            .sum()
    }

    /// Total spikes in the tensor.
    pub fn total_spikes(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Copy a row range and channel subset into a new tensor.
    pub fn select(&self, rows: std::ops::Range<usize>, channels: &[usize]) -> Result<Self> {
        if rows.end > self.n_timestamps {
            return Err(Error::ShapeMismatch(format!(
                "row range {}..{} exceeds {} timestamps",
                rows.start, rows.end, self.n_timestamps
            )));
        }
        if let Some(&c) = channels.iter().find(|&&c| c >= self.n_channels) {
            return Err(Error::ShapeMismatch(format!(
                "channel {c} exceeds {} channels",
                self.n_channels
            )));
        }
        let mut out = Self::zeros(rows.len(), channels.len(), self.timesteps);
        for (rn, r) in rows.enumerate() {
            for (cn, &c) in channels.iter().enumerate() {
                let dst = out.train_offset(rn, cn);
                let src = self.train_offset(r, c);
                out.bits[dst..dst + self.words_per_train]
                    .copy_from_slice(&self.bits[src..src + self.words_per_train]);
            }
        }
        Ok(out)
    }

    /// Stack tensors along the timestamp axis. Shapes must agree.
    pub fn concat(parts: &[&SpikeTensor]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyDay)?;
        let mut out = Self::zeros(
            parts.iter().map(|p| p.n_timestamps).sum(),
            first.n_channels,
            first.timesteps,
        );
        let mut cursor = 0usize;
        for p in parts {
            if p.n_channels != first.n_channels || p.timesteps != first.timesteps {
                return Err(Error::ShapeMismatch(
                    "concat requires identical channel count and timesteps".into(),
                ));
            }
            let words = p.bits.len();
            out.bits[cursor..cursor + words].copy_from_slice(&p.bits);
            cursor += words;
        }
        Ok(out)
    }

    /// Write the documented binary container: magic, version, shape triple,
    /// then ceil(T/8) bytes per train (timestamp-major, then channel), bits
    /// little-endian within each byte.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.timesteps as u16).to_le_bytes())?;
        w.write_all(&(self.n_timestamps as u64).to_le_bytes())?;
        w.write_all(&(self.n_channels as u64).to_le_bytes())?;
        let bytes_per_train = self.timesteps.div_ceil(8);
        let mut buf = vec![0u8; bytes_per_train];
        for n in 0..self.n_timestamps {
            for k in 0..self.n_channels {
                let words = self.train(n, k);
                buf.fill(0);
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = (words[i / 8] >> ((i % 8) * 8)) as u8;
                }
                w.write_all(&buf)?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::Container("bad magic, not a spike tensor".into()));
        }
        let mut u16b = [0u8; 2];
        r.read_exact(&mut u16b)?;
        let version = u16::from_le_bytes(u16b);
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        r.read_exact(&mut u16b)?;
        let timesteps = u16::from_le_bytes(u16b) as usize;
        if timesteps == 0 {
            return Err(Error::Container("zero timesteps".into()));
        }
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)?;
        let n_timestamps = u64::from_le_bytes(u64b) as usize;
        r.read_exact(&mut u64b)?;
        let n_channels = u64::from_le_bytes(u64b) as usize;
        let mut out = Self::zeros(n_timestamps, n_channels, timesteps);
        let bytes_per_train = timesteps.div_ceil(8);
        let mut buf = vec![0u8; bytes_per_train];
        for n in 0..n_timestamps {
            for k in 0..n_channels {
                r.read_exact(&mut buf)?;
                let off = out.train_offset(n, k);
                for (i, &b) in buf.iter().enumerate() {
                    out.bits[off + i / 8] |= u64::from(b) << ((i % 8) * 8);
                }
            }
        }
        // trailing garbage means a corrupt file
        let mut one = [0u8; 1];
        if r.read(&mut one)? != 0 {
            return Err(Error::Container("trailing bytes after payload".into()));
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
