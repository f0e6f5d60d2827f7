//! Market data: tick ingestion/synthesis, VWAP aggregation, feature
//! construction, robust normalization and Poisson encoding.

mod csv_io;
mod encode;
mod features;
mod normalize;
mod synth;
mod tick;

pub use csv_io::{load_ticks, write_ticks_csv, DayTicks};
pub use encode::encode_poisson;
pub use features::{
    make_difference_features, make_supervised_features, ChannelLabel, FeatureMatrix, Sign,
};
pub use normalize::{apply_normalization, normalize, quantile, ChannelScale, NormalizationSpec};
pub use synth::{generate_synthetic_ticks, SyntheticConfig, SyntheticDay};
pub use tick::{aggregate_vwap, Tick, VwapBar};
