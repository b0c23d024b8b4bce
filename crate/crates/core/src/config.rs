//! JSON model description.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "energies": [1.0, -1.0],
//!   "terms": [
//!     { "shift_map": 1, "factors": [ { "lambda": [0.0, 0.2], "d": 0.5 } ] },
//!     { "mapping": [1, 0], "factors": [ { "lambda": 0.0, "d": [[0.5, 0.0], [0.25, 0.0]] } ] }
//!   ]
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. A `lambda` or `d` field is either a
//! scalar (a bare real number or one `[re, im]` pair) broadcast to every
//! state, or an array of exactly `dimension` pairs. A term uses either
//! `shift_map` (`z -> z + shift`, partial at the edges) or `mapping`
//! (image of each state, `null` for none).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExpSumFactor, FreeSpectrum, HamiltonianModel, PermutationMap, Term};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub energies: Vec<f64>,
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_map: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Vec<Option<usize>>>,
    pub factors: Vec<FactorConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub lambda: ComplexField,
    pub d: ComplexField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexField {
    Real(f64),
    Pair([f64; 2]),
    PerState(Vec<[f64; 2]>),
}

impl ComplexField {
    fn expand(&self, dimension: usize, what: &str) -> Result<Vec<C64>> {
        match self {
            ComplexField::Real(x) => Ok(vec![C64::new(*x, 0.0); dimension]),
            ComplexField::Pair([re, im]) => Ok(vec![C64::new(*re, *im); dimension]),
            ComplexField::PerState(values) => {
                if values.len() != dimension {
                    return Err(Error::Model(format!("{what} has {} entries, expected {dimension}", values.len())));
                }
                Ok(values.iter().map(|[re, im]| C64::new(*re, *im)).collect())
            }
        }
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model config serializes")
    }

    pub fn build(&self) -> Result<HamiltonianModel> {
        let dimension = self.dimension;
        if self.energies.len() != dimension {
            return Err(Error::Model(format!(
                "energies has {} entries, dimension is {dimension}",
                self.energies.len()
            )));
        }
        let spectrum = FreeSpectrum::new(self.energies.clone())?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, term) in self.terms.iter().enumerate() {
            let permutation = match (&term.shift_map, &term.mapping) {
                (Some(shift), None) => PermutationMap::shift(dimension, *shift),
                (None, Some(mapping)) => {
                    if mapping.len() != dimension {
                        return Err(Error::Model(format!(
                            "term {i}: mapping has {} entries, dimension is {dimension}",
                            mapping.len()
                        )));
                    }
                    PermutationMap::from_mapping(mapping.clone()).map_err(|e| Error::Model(format!("term {i}: {e}")))?
                }
                _ => return Err(Error::Model(format!("term {i}: give exactly one of `shift_map` or `mapping`"))),
            };
            let factors = term
                .factors
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let lambda = f.lambda.expand(dimension, &format!("term {i} factor {k} lambda"))?;
                    let d = f.d.expand(dimension, &format!("term {i} factor {k} d"))?;
                    ExpSumFactor::new(lambda, d)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut built = Term::new(permutation, factors);
            built.label = term.label.clone();
            terms.push(built);
        }
        HamiltonianModel::new(spectrum, terms)
    }

    /// Lossless description of a model, with per-state arrays throughout.
    pub fn from_model(model: &HamiltonianModel) -> Self {
        let pairs = |values: &[C64]| ComplexField::PerState(values.iter().map(|z| [z.re, z.im]).collect());
        let terms = model
            .terms()
            .iter()
            .map(|term| TermConfig {
                label: term.label.clone(),
                shift_map: None,
                mapping: Some(term.permutation.mapping().to_vec()),
                factors: term
                    .factors
                    .iter()
                    .map(|f| FactorConfig { lambda: pairs(f.lambdas()), d: pairs(f.ds()) })
                    .collect(),
            })
            .collect();
        Self { dimension: model.dimension(), energies: model.spectrum().energies().to_vec(), terms }
    }
}

/// Parse and validate a JSON model description.
pub fn parse_model(text: &str) -> Result<HamiltonianModel> {
    ModelConfig::from_json(text)?.build()
}

pub fn model_to_json(model: &HamiltonianModel) -> String {
    ModelConfig::from_model(model).to_json()
}
