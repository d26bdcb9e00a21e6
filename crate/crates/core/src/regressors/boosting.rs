//! Stagewise tree boosting on squared loss.
//!
//! `gb_fit` fits plain CART trees to residuals. `xgb_fit` grows each tree
//! from first and second loss derivatives with an L2 penalty `λ` on leaf
//! weights and a per-split cost `γ`.

use serde::{Deserialize, Serialize};

use super::tree::{Criterion, GrowParams, Node, TreeGrower};
use super::TrainingData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Node>,
}

impl BoostedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams {
            n_estimators: 200,
            learning_rate: 0.1,
            max_depth: Some(3),
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XgbParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for XgbParams {
    fn default() -> Self {
        XgbParams {
            n_estimators: 200,
            learning_rate: 0.1,
            max_depth: Some(3),
            min_samples_split: 2,
            lambda: 1.0,
            gamma: 0.0,
        }
    }
}

fn check_common(learning_rate: f64, min_samples_split: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&learning_rate) {
        return Err(Error::domain(format!(
            "learning_rate must lie in [0, 1], got {learning_rate}"
        )));
    }
    if min_samples_split < 2 {
        return Err(Error::domain("min_samples_split must be >= 2"));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sse(y: &[f64], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Training SSE after each stage; entry 0 is the constant base model.
pub type SseTrace = Vec<f64>;

fn boost<F>(
    data: &TrainingData,
    n_rounds: usize,
    learning_rate: f64,
    mut grow_round: F,
) -> (BoostedModel, SseTrace)
where
    F: FnMut(&[f64]) -> Node,
{
    let base = mean(&data.y);
    let mut f = vec![base; data.len()];
    let mut trace = vec![sse(&data.y, &f)];
    let mut trees = Vec::with_capacity(n_rounds);
    for _ in 0..n_rounds {
        let tree = grow_round(&f);
        for (fi, xi) in f.iter_mut().zip(&data.x) {
            *fi += learning_rate * tree.predict(xi);
        }
        trace.push(sse(&data.y, &f));
        trees.push(tree);
    }
    let model = BoostedModel {
        base_score: base,
        learning_rate,
        trees,
    };
    (model, trace)
}

pub fn gb_fit_traced(data: &TrainingData, params: &GbParams) -> Result<(BoostedModel, SseTrace)> {
    check_common(params.learning_rate, params.min_samples_split)?;
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: None,
        criterion: Criterion::Variance,
    };
    let ones = vec![1.0; data.len()];
    let rows: Vec<usize> = (0..data.len()).collect();
    Ok(boost(
        data,
        params.n_estimators,
        params.learning_rate,
        |f| {
            let residual: Vec<f64> = data.y.iter().zip(f).map(|(y, fi)| y - fi).collect();
            TreeGrower::new(&data.x, &residual, &ones, grow, None).grow(rows.clone())
        },
    ))
}

pub fn gb_fit(data: &TrainingData, params: &GbParams) -> Result<BoostedModel> {
    Ok(gb_fit_traced(data, params)?.0)
}

pub fn xgb_fit_traced(data: &TrainingData, params: &XgbParams) -> Result<(BoostedModel, SseTrace)> {
    check_common(params.learning_rate, params.min_samples_split)?;
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::domain("lambda must be finite and >= 0"));
    }
    if !(params.gamma >= 0.0 && params.gamma.is_finite()) {
        return Err(Error::domain("gamma must be finite and >= 0"));
    }
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: None,
        criterion: Criterion::SecondOrder {
            lambda: params.lambda,
            gamma: params.gamma,
        },
    };
    let hess = vec![2.0; data.len()];
    let rows: Vec<usize> = (0..data.len()).collect();
    Ok(boost(
        data,
        params.n_estimators,
        params.learning_rate,
        |f| {
            let grad: Vec<f64> = data.y.iter().zip(f).map(|(y, fi)| 2.0 * (fi - y)).collect();
            TreeGrower::new(&data.x, &grad, &hess, grow, None).grow(rows.clone())
        },
    ))
}

pub fn xgb_fit(data: &TrainingData, params: &XgbParams) -> Result<BoostedModel> {
    Ok(xgb_fit_traced(data, params)?.0)
}
