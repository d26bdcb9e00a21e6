use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    /// Training rows in canonical order (lexicographic on features, then
    /// label), so distance ties do not depend on input order.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub fn knn_fit(data: &TrainingData, params: &KnnParams) -> Result<KnnModel> {
    if params.k == 0 {
        return Err(Error::domain("k must be >= 1"));
    }
    if params.k > data.len() {
        return Err(Error::domain(format!(
            "k = {} exceeds the {} training samples",
            params.k,
            data.len()
        )));
    }
    let order = data.canonical_order();
    Ok(KnnModel {
        k: params.k,
        x: order.iter().map(|&i| data.x[i].clone()).collect(),
        y: order.iter().map(|&i| data.y[i]).collect(),
    })
}

pub fn knn_predict(model: &KnnModel, query: &[f64]) -> f64 {
    let mut dist: Vec<(f64, usize)> = model
        .x
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let d2: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    let by_dist_then_index =
        |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = model.k.min(dist.len());
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, by_dist_then_index);
        dist.truncate(k);
    }
    dist.sort_by(by_dist_then_index);
    dist.iter().map(|&(_, i)| model.y[i]).sum::<f64>() / k as f64
}
