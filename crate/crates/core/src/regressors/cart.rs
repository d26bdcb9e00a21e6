use serde::{Deserialize, Serialize};

use super::tree::{Criterion, GrowParams, Node, TreeGrower};
use super::TrainingData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartParams {
    /// `None` grows until the other stopping rules fire.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: Some(12),
            min_samples_split: 2,
        }
    }
}

impl CartParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::domain("min_samples_split must be >= 2"));
        }
        Ok(())
    }

    pub(crate) fn grow_params(&self, max_features: Option<usize>) -> GrowParams {
        GrowParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            max_features,
            criterion: Criterion::Variance,
        }
    }
}

pub fn cart_fit(data: &TrainingData, params: &CartParams) -> Result<Node> {
    params.validate()?;
    let ones = vec![1.0; data.len()];
    let mut grower = TreeGrower::new(&data.x, &data.y, &ones, params.grow_params(None), None);
    Ok(grower.grow(data.canonical_order()))
}

pub fn cart_predict(tree: &Node, x: &[f64]) -> f64 {
    tree.predict(x)
}
