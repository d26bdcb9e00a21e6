//! Independent reference implementations used as test oracles. None of
//! these call into the code paths they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risloc::physics::{PhaseProfile, RisConfig, SPEED_OF_LIGHT};
use risloc::regressors::Node;

/// Plain double-loop array factor with real arithmetic.
pub fn direct_array_factor(
    cfg: &RisConfig,
    profile: &PhaseProfile,
    theta_deg: f64,
    phi_deg: f64,
) -> (f64, f64) {
    let k = 2.0 * std::f64::consts::PI * cfg.freq_hz / SPEED_OF_LIGHT;
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    let (ux, uy) = (t.sin() * p.cos(), t.sin() * p.sin());
    let (mut re, mut im) = (0.0, 0.0);
    for m in 0..cfg.m_rows {
        for n in 0..cfg.n_cols {
            let mc = m as f64 - (cfg.m_rows as f64 - 1.0) / 2.0;
            let nc = n as f64 - (cfg.n_cols as f64 - 1.0) / 2.0;
            let arg = profile.phase(m, n) - k * (cfg.d_x * mc * ux + cfg.d_y * nc * uy);
            re += cfg.gamma_amp * arg.cos();
            im += cfg.gamma_amp * arg.sin();
        }
    }
    (re, im)
}

pub fn random_dataset(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-80.0..-40.0)).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..90.0)).collect();
    (x, y)
}

/// Mean label of the `k` nearest rows, ties to the lower index.
pub fn knn_bruteforce(x: &[Vec<f64>], y: &[f64], q: &[f64], k: usize) -> f64 {
    let mut all: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| {
            (
                r.iter()
                    .zip(q)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                i,
            )
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64
}

fn sse(vals: &[f64]) -> f64 {
    if vals.is_empty() {
        return 0.0;
    }
    let m = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - m).powi(2)).sum()
}

/// CART by brute force: every (feature, midpoint) pair is tried and the
/// children's SSE recomputed from scratch.
pub fn oracle_tree(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    depth: usize,
    max_depth: usize,
) -> Node {
    let labels: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let leaf = Node::Leaf {
        value: labels.iter().sum::<f64>() / labels.len() as f64,
    };
    let parent_sse = sse(&labels);
    if depth >= max_depth || rows.len() < 2 || labels.iter().all(|&v| v == labels[0]) {
        return leaf;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<f64> = rows
                .iter()
                .filter(|&&i| x[i][f] <= t)
                .map(|&i| y[i])
                .collect();
            let right: Vec<f64> = rows
                .iter()
                .filter(|&&i| x[i][f] > t)
                .map(|&i| y[i])
                .collect();
            let total = sse(&left) + sse(&right);
            if total < parent_sse && best.map_or(true, |b| total < b.0) {
                best = Some((total, f, t));
            }
        }
    }
    let Some((_, f, t)) = best else {
        return leaf;
    };
    let l: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] <= t).collect();
    let r: Vec<usize> = rows.iter().copied().filter(|&i| x[i][f] > t).collect();
    Node::Split {
        feature: f,
        threshold: t,
        left: Box::new(oracle_tree(x, y, &l, depth + 1, max_depth)),
        right: Box::new(oracle_tree(x, y, &r, depth + 1, max_depth)),
    }
}

/// Structural equality with float tolerance on thresholds and leaves.
pub fn trees_match(a: &Node, b: &Node, tol: f64) -> bool {
    match (a, b) {
        (Node::Leaf { value: x }, Node::Leaf { value: y }) => {
            (x - y).abs() <= tol * (1.0 + x.abs())
        }
        (
            Node::Split {
                feature: fa,
                threshold: ta,
                left: la,
                right: ra,
            },
            Node::Split {
                feature: fb,
                threshold: tb,
                left: lb,
                right: rb,
            },
        ) => {
            fa == fb
                && (ta - tb).abs() <= tol * (1.0 + ta.abs())
                && trees_match(la, lb, tol)
                && trees_match(ra, rb, tol)
        }
        _ => false,
    }
}

/// Six points whose best depth-1 split is between x = 3 and x = 4.
/// Base score 26; g = 2(26 − y) = [32, 28, 30, −28, −32, −30], h = 2.
/// Left G = 90, H = 6; right G = −90, H = 6. With λ = 1 the leaves are
/// −90/7 and +90/7.
pub fn xgb_hand_dataset() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        (1..=6).map(|i| vec![i as f64]).collect(),
        vec![10.0, 12.0, 11.0, 40.0, 42.0, 41.0],
    )
}

pub fn smooth_dataset(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    let y = x
        .iter()
        .map(|r| 45.0 + 15.0 * r[0] + 5.0 * (2.0 * r[1]).sin())
        .collect();
    (x, y)
}
