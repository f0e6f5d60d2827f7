//! Search-space description with dependent ranges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Range endpoint: a constant, optionally shifted off a previously drawn
/// parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bound {
    pub parent: Option<String>,
    pub offset: f64,
}

impl Bound {
    pub fn fixed(v: f64) -> Self {
        Self {
            parent: None,
            offset: v,
        }
    }

    pub fn of(parent: &str, offset: f64) -> Self {
        Self {
            parent: Some(parent.to_string()),
            offset,
        }
    }

    fn resolve(&self, drawn: &BTreeMap<String, f64>) -> Result<f64> {
        match &self.parent {
            None => Ok(self.offset),
            Some(p) => drawn
                .get(p)
                .map(|v| v + self.offset)
                .ok_or_else(|| Error::InvalidConfig(format!("parameter depends on undrawn {p}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Scale {
    /// Uniform continuous.
    Linear,
    /// Log-uniform continuous.
    Log,
    /// Uniform integer grid (inclusive bounds).
    Int,
    /// Uniform grid with a fixed step.
    Stepped(f64),
    /// Finite unordered choices.
    Categorical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub scale: Scale,
    pub lo: Bound,
    pub hi: Bound,
    /// Choices for categorical parameters.
    pub choices: Vec<f64>,
    /// Hard lower clamp applied after dependency resolution.
    pub floor: Option<f64>,
}

impl ParamSpec {
    pub fn numeric(name: &str, scale: Scale, lo: Bound, hi: Bound, floor: Option<f64>) -> Self {
        Self {
            name: name.into(),
            scale,
            lo,
            hi,
            choices: Vec::new(),
            floor,
        }
    }

    pub fn categorical(name: &str, choices: &[f64]) -> Self {
        Self {
            name: name.into(),
            scale: Scale::Categorical,
            lo: Bound::fixed(0.0),
            hi: Bound::fixed(0.0),
            choices: choices.to_vec(),
            floor: None,
        }
    }

    /// Resolved (lo, hi) for the current draw.
    pub fn resolve_range(&self, drawn: &BTreeMap<String, f64>) -> Result<(f64, f64)> {
        let mut lo = self.lo.resolve(drawn)?;
        let hi = self.hi.resolve(drawn)?;
        if let Some(f) = self.floor {
            lo = lo.max(f);
        }
        if lo > hi {
            return Err(Error::UnsatisfiableRange(self.name.clone()));
        }
        Ok((lo, hi))
    }
}

/// Ordered parameter list; parents always precede dependents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.params {
            for b in [&p.lo, &p.hi] {
                if let Some(parent) = &b.parent {
                    if !seen.contains(parent.as_str()) {
                        return Err(Error::InvalidConfig(format!(
                            "{} depends on {parent}, which is drawn later or missing",
                            p.name
                        )));
                    }
                }
            }
            if matches!(p.scale, Scale::Categorical) && p.choices.is_empty() {
                return Err(Error::InvalidConfig(format!("{} has no choices", p.name)));
            }
            seen.insert(p.name.as_str());
        }
        Ok(())
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    fn stdp_block(
        prefix_plus: &str,
        prefix_minus: &str,
        tau_plus: &str,
        tau_minus: &str,
    ) -> Vec<ParamSpec> {
        vec![
            ParamSpec::numeric(
                prefix_plus,
                Scale::Log,
                Bound::fixed(1e-4),
                Bound::fixed(1e-2),
                None,
            ),
            ParamSpec::numeric(
                prefix_minus,
                Scale::Log,
                Bound::of(prefix_plus, -0.001),
                Bound::of(prefix_plus, 0.0),
                Some(1e-5),
            ),
            ParamSpec::numeric(
                tau_plus,
                Scale::Int,
                Bound::fixed(5.0),
                Bound::fixed(100.0),
                None,
            ),
            ParamSpec::numeric(
                tau_minus,
                Scale::Int,
                Bound::of(tau_plus, -5.0),
                Bound::of(tau_plus, 5.0),
                Some(1.0),
            ),
        ]
    }

    fn shared_tail() -> Vec<ParamSpec> {
        vec![
            ParamSpec::numeric(
                "beta",
                Scale::Stepped(0.01),
                Bound::fixed(0.5),
                Bound::fixed(0.99),
                None,
            ),
            ParamSpec::numeric(
                "v_thresh",
                Scale::Stepped(0.1),
                Bound::fixed(0.8),
                Bound::fixed(2.5),
                None,
            ),
            ParamSpec::numeric(
                "d_thresh",
                Scale::Int,
                Bound::fixed(4.0),
                Bound::fixed(16.0),
                None,
            ),
            ParamSpec::categorical("n_hidden", &[16.0, 32.0, 64.0, 128.0]),
        ]
    }

    /// Search space for the two-input model (single lag, no inhibition).
    pub fn model1() -> Self {
        let mut params = Self::stdp_block("a_plus", "a_minus", "tau_plus", "tau_minus");
        params.extend(Self::shared_tail());
        Self { params }
    }

    /// Search space for the extended model: inhibitory window parameters
    /// plus the input lag count.
    pub fn model2() -> Self {
        let mut params = Self::stdp_block("a_plus", "a_minus", "tau_plus", "tau_minus");
        params.extend(Self::stdp_block(
            "b_plus",
            "b_minus",
            "theta_plus",
            "theta_minus",
        ));
        params.push(ParamSpec::numeric(
            "n_input",
            Scale::Int,
            Bound::fixed(1.0),
            Bound::fixed(10.0),
            None,
        ));
        params.extend(Self::shared_tail());
        Self { params }
    }
}
