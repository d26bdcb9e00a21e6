use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cart::CartParams;
use super::tree::{Node, TreeGrower};
use super::TrainingData;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// ⌈√d⌉ features per split.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_depth: Some(12),
            min_samples_split: 2,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Node>,
}

impl Forest {
    pub fn tree_predictions(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }
}

/// Tree `t` draws its bootstrap and its per-split feature subsets from
/// `indexed_seed(seed, [t])` alone.
pub fn rf_fit(data: &TrainingData, params: &RfParams, seed: u64) -> Result<Forest> {
    if params.n_trees == 0 {
        return Err(Error::domain("n_trees must be >= 1"));
    }
    let cart = CartParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };
    cart.validate()?;
    let n = data.len();
    let m = params.max_features.resolve(data.width());
    let grow = cart.grow_params(Some(m));
    let ones = vec![1.0; n];
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = seed::rng(seed::indexed_seed(seed, &[t as u64]));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            TreeGrower::new(&data.x, &data.y, &ones, grow, Some(&mut rng)).grow(rows)
        })
        .collect();
    Ok(Forest { trees })
}

pub fn rf_predict(forest: &Forest, x: &[f64]) -> f64 {
    forest.trees.iter().map(|t| t.predict(x)).sum::<f64>() / forest.trees.len() as f64
}
