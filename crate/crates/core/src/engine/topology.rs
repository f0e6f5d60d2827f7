//! Network topologies for the three architectures.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Model1,
    Model2,
    Model3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynapseSign {
    /// Weights bounded to [0, 1].
    Excitatory,
    /// Weights bounded to [-1, 0].
    Inhibitory,
    /// No sign constraint (supervised model).
    Unconstrained,
}

impl SynapseSign {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            SynapseSign::Excitatory => (0.0, 1.0),
            SynapseSign::Inhibitory => (-1.0, 0.0),
            SynapseSign::Unconstrained => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Dense connection block between a slice of one layer and a slice of the
/// next. Weights are stored row-major as `[src_local * n_dst + dst_local]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynapseGroup {
    pub name: String,
    pub src_layer: usize,
    pub dst_layer: usize,
    pub src_range: Range<usize>,
    pub dst_range: Range<usize>,
    pub sign: SynapseSign,
}

impl SynapseGroup {
    pub fn n_src(&self) -> usize {
        self.src_range.len()
    }

    pub fn n_dst(&self) -> usize {
        self.dst_range.len()
    }

    pub fn n_weights(&self) -> usize {
        self.n_src() * self.n_dst()
    }
}

/// Layer sizes plus the synapse groups connecting them. Layer 0 is the
/// input; the last layer is the output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub variant: ModelVariant,
    pub layer_sizes: Vec<usize>,
    pub groups: Vec<SynapseGroup>,
}

impl Topology {
    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Segregated two-pathway model: positive and negative difference
    /// channels each drive their own hidden sub-layer; both halves project
    /// to a single output neuron. `lags` of 1 gives the original two-input
    /// form.
    pub fn model1(lags: usize, n_hidden: usize) -> Result<Self> {
        Self::segregated(ModelVariant::Model1, lags, n_hidden, false)
    }

    /// Model 1 plus crossed inhibitory pathways for input competition.
    pub fn model2(lags: usize, n_hidden: usize) -> Result<Self> {
        Self::segregated(ModelVariant::Model2, lags, n_hidden, true)
    }

    fn segregated(
        variant: ModelVariant,
        lags: usize,
        n_hidden: usize,
        inhibitory_cross: bool,
    ) -> Result<Self> {
        if lags == 0 {
            return Err(Error::InvalidConfig("lags must be >= 1".into()));
        }
        if n_hidden < 2 || n_hidden % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "hidden layer must be even to split into two pathways, got {n_hidden}"
            )));
        }
        let half = n_hidden / 2;
        let x1 = 0..lags;
        let x2 = lags..2 * lags;
        let h1 = 0..half;
        let h2 = half..n_hidden;
        let mut groups = vec![
            SynapseGroup {
                name: "x1_h1".into(),
                src_layer: 0,
                dst_layer: 1,
                src_range: x1.clone(),
                dst_range: h1.clone(),
                sign: SynapseSign::Excitatory,
            },
            SynapseGroup {
                name: "x2_h2".into(),
                src_layer: 0,
                dst_layer: 1,
                src_range: x2.clone(),
                dst_range: h2.clone(),
                sign: SynapseSign::Excitatory,
            },
            SynapseGroup {
                name: "h_out".into(),
                src_layer: 1,
                dst_layer: 2,
                src_range: 0..n_hidden,
                dst_range: 0..1,
                sign: SynapseSign::Excitatory,
            },
        ];
        if inhibitory_cross {
            groups.push(SynapseGroup {
                name: "x1_h2".into(),
                src_layer: 0,
                dst_layer: 1,
                src_range: x1,
                dst_range: h2,
                sign: SynapseSign::Inhibitory,
            });
            groups.push(SynapseGroup {
                name: "x2_h1".into(),
                src_layer: 0,
                dst_layer: 1,
                src_range: x2,
                dst_range: h1,
                sign: SynapseSign::Inhibitory,
            });
        }
        Ok(Self {
            variant,
            layer_sizes: vec![2 * lags, n_hidden, 1],
            groups,
        })
    }

    /// Dense feedforward network with two hidden layers and two output
    /// neurons for supervised binary classification.
    pub fn model3(n_inputs: usize, n_hidden: usize) -> Result<Self> {
        if n_inputs == 0 || n_hidden == 0 {
            return Err(Error::InvalidConfig(
                "model3 needs at least one input and hidden neuron".into(),
            ));
        }
        let dense = |name: &str, src_layer: usize, n_src: usize, n_dst: usize| SynapseGroup {
            name: name.into(),
            src_layer,
            dst_layer: src_layer + 1,
            src_range: 0..n_src,
            dst_range: 0..n_dst,
            sign: SynapseSign::Unconstrained,
        };
        Ok(Self {
            variant: ModelVariant::Model3,
            layer_sizes: vec![n_inputs, n_hidden, n_hidden, 2],
            groups: vec![
                dense("in_h1", 0, n_inputs, n_hidden),
                dense("h1_h2", 1, n_hidden, n_hidden),
                dense("h2_out", 2, n_hidden, 2),
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_shapes_respect_pathway_split() {
        let t = Topology::model1(1, 16).unwrap();
        assert_eq!(t.layer_sizes, vec![2, 16, 1]);
        assert_eq!(t.groups.len(), 3);
        assert_eq!((t.groups[0].n_src(), t.groups[0].n_dst()), (1, 8));
        assert_eq!((t.groups[1].n_src(), t.groups[1].n_dst()), (1, 8));
        assert_eq!((t.groups[2].n_src(), t.groups[2].n_dst()), (16, 1));
        assert_eq!(t.groups[1].src_range, 1..2);
        assert_eq!(t.groups[1].dst_range, 8..16);
    }

    #[test]
    fn model2_adds_crossed_inhibition() {
        let t = Topology::model2(3, 32).unwrap();
        assert_eq!(t.layer_sizes, vec![6, 32, 1]);
        let inhibitory: Vec<&SynapseGroup> = t
            .groups
            .iter()
            .filter(|g| g.sign == SynapseSign::Inhibitory)
            .collect();
        assert_eq!(inhibitory.len(), 2);
        assert_eq!(inhibitory[0].src_range, 0..3);
        assert_eq!(inhibitory[0].dst_range, 16..32);
        assert_eq!(inhibitory[1].src_range, 3..6);
        assert_eq!(inhibitory[1].dst_range, 0..16);
    }

    #[test]
    fn odd_hidden_sizes_rejected() {
        assert!(Topology::model1(1, 15).is_err());
        assert!(Topology::model2(2, 7).is_err());
    }

    #[test]
    fn model3_is_dense_feedforward() {
        let t = Topology::model3(8, 128).unwrap();
        assert_eq!(t.layer_sizes, vec![8, 128, 128, 2]);
        assert!(t
            .groups
            .iter()
            .all(|g| g.sign == SynapseSign::Unconstrained));
    }
}
