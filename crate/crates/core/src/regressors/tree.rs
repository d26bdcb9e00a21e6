//! Binary regression trees grown by exhaustive split search.
//!
//! One grower serves both split criteria used in this crate: plain
//! variance reduction (CART, random forest, gradient boosting) and the
//! regularized second-order gain of the XGBoost-style booster.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Leaf values in left-to-right order.
    pub fn leaf_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<f64>) {
        match self {
            Node::Leaf { value } => out.push(*value),
            Node::Split { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }
}

/// How node statistics `(Σg, Σh)` turn into leaf values and split gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Criterion {
    /// `g` = target, `h` = 1. Leaf = mean; gain = SSE reduction.
    Variance,
    /// `g`, `h` = loss derivatives. Leaf = −G/(H+λ);
    /// gain = ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ.
    SecondOrder { lambda: f64, gamma: f64 },
}

impl Criterion {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        match *self {
            Criterion::Variance => g / h,
            Criterion::SecondOrder { lambda, .. } => -g / (h + lambda),
        }
    }

    fn gain(&self, left: (f64, f64), right: (f64, f64), parent: (f64, f64)) -> f64 {
        match *self {
            Criterion::Variance => {
                // Centering on the parent mean keeps the sums small and the
                // parent term zero.
                let mean = parent.0 / parent.1;
                let cl = left.0 - left.1 * mean;
                let cr = right.0 - right.1 * mean;
                cl * cl / left.1 + cr * cr / right.1
            }
            Criterion::SecondOrder { lambda, gamma } => {
                let score = |(g, h): (f64, f64)| g * g / (h + lambda);
                0.5 * (score(left) + score(right) - score(parent)) - gamma
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features drawn per split; `None` considers all of them.
    pub max_features: Option<usize>,
    pub criterion: Criterion,
}

pub(crate) struct TreeGrower<'a> {
    x: &'a [Vec<f64>],
    g: &'a [f64],
    h: &'a [f64],
    params: GrowParams,
    n_features: usize,
    rng: Option<&'a mut ChaCha8Rng>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BestSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

impl<'a> TreeGrower<'a> {
    /// `x` rows must all have the same width. `rng` is required when
    /// `params.max_features` is set.
    pub fn new(
        x: &'a [Vec<f64>],
        g: &'a [f64],
        h: &'a [f64],
        params: GrowParams,
        rng: Option<&'a mut ChaCha8Rng>,
    ) -> Self {
        let n_features = x.first().map_or(0, Vec::len);
        TreeGrower {
            x,
            g,
            h,
            params,
            n_features,
            rng,
        }
    }

    /// Grows a tree over the samples in `rows` (duplicates allowed, which is
    /// how bootstrap resamples are expressed).
    pub fn grow(&mut self, rows: Vec<usize>) -> Node {
        self.grow_node(rows, 0)
    }

    fn stats(&self, rows: &[usize]) -> (f64, f64) {
        rows.iter()
            .fold((0.0, 0.0), |(g, h), &i| (g + self.g[i], h + self.h[i]))
    }

    fn grow_node(&mut self, rows: Vec<usize>, depth: usize) -> Node {
        let (g, h) = self.stats(&rows);
        let leaf = Node::Leaf {
            value: self.params.criterion.leaf_value(g, h),
        };
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        let first = self.g[rows[0]];
        let pure = rows.iter().all(|&i| self.g[i] == first);
        if depth_reached || rows.len() < self.params.min_samples_split || pure {
            return leaf;
        }
        let features = self.candidate_features();
        let Some(best) = self.best_split(&rows, &features) else {
            return leaf;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow_node(left_rows, depth + 1)),
            right: Box::new(self.grow_node(right_rows, depth + 1)),
        }
    }

    /// Ascending feature indices to search at this node.
    fn candidate_features(&mut self) -> Vec<usize> {
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < self.n_features => {
                let mut picked = index::sample(rng, self.n_features, m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..self.n_features).collect(),
        }
    }

    /// Highest-gain split with positive gain. Ties keep the earlier
    /// candidate, i.e. the lower feature index, then the lower threshold.
    pub(crate) fn best_split(&self, rows: &[usize], features: &[usize]) -> Option<BestSplit> {
        let parent = self.stats(rows);
        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        for &f in features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let (mut gl, mut hl) = (0.0, 0.0);
            for w in 0..sorted.len() - 1 {
                let i = sorted[w];
                gl += self.g[i];
                hl += self.h[i];
                let (lo, hi) = (self.x[i][f], self.x[sorted[w + 1]][f]);
                if lo == hi {
                    continue;
                }
                let left = (gl, hl);
                let right = (parent.0 - gl, parent.1 - hl);
                let gain = self.params.criterion.gain(left, right, parent);
                if gain > 0.0 && best.map_or(true, |b| beats(gain, b.gain)) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: midpoint(lo, hi),
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Relative margin below which two gains count as tied. Candidates that
/// produce the same partition differ only by summation rounding.
const TIE_RTOL: f64 = 1e-12;

fn beats(gain: f64, incumbent: f64) -> bool {
    gain - incumbent > TIE_RTOL * incumbent.abs()
}

/// Midpoint that still separates `lo` from `hi` under `<=`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}
