//! ε-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved in its 2n-variable form: `β = [α; α*]` minimizes
//! `½βᵀQβ + pᵀβ` subject to `sᵀβ = 0`, `0 ≤ β ≤ C`, where `s = [1ₙ; −1ₙ]`,
//! `Q_tu = s_t·s_u·K(x_t mod n, x_u mod n)` and `p = [ε − y; ε + y]`. Each
//! iteration updates one maximal-violating pair chosen with second-order
//! information, then clips analytically to the box.

use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::error::{Error, Result};

/// Substitute curvature for non-positive pair curvature.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrParams {
    pub c: f64,
    /// Half-width of the insensitive tube, in label units (degrees).
    pub epsilon: f64,
    /// RBF width on standardized features; `None` uses `1 / (d·var)`.
    pub gamma: Option<f64>,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    /// Pair-update budget; `None` means `1000·n`.
    pub max_iter: Option<usize>,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 100.0,
            epsilon: 0.5,
            gamma: None,
            tol: 1e-3,
            max_iter: None,
        }
    }
}

impl SvrParams {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::domain("C must be finite and > 0"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain("epsilon must be finite and >= 0"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::domain("gamma must be finite and > 0"));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Per-feature standardization `(x − mean) / scale`.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub gamma: f64,
    /// Standardized support vectors and their coefficients `α − α*`.
    pub support: Vec<Vec<f64>>,
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = standardize(x, &self.mean, &self.scale);
        self.bias
            + self
                .support
                .iter()
                .zip(&self.coef)
                .map(|(sv, c)| c * rbf(self.gamma, sv, &z))
                .sum::<f64>()
    }
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d2).exp()
}

fn standardize(x: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(mean)
        .zip(scale)
        .map(|((v, m), s)| (v - m) / s)
        .collect()
}

/// Column means and population standard deviations; constant columns get
/// scale 1.
fn fit_standardizer(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; d];
    for row in x {
        for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    (mean, scale)
}

struct Solution {
    beta: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
}

/// Minimal SMO solver over a dense kernel matrix.
struct Smo<'a> {
    n: usize,
    kernel: &'a [f64],
    c: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
    p: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(kernel: &'a [f64], y: &[f64], c: f64, epsilon: f64) -> Self {
        let n = y.len();
        let p: Vec<f64> = y
            .iter()
            .map(|yi| epsilon - yi)
            .chain(y.iter().map(|yi| epsilon + yi))
            .collect();
        Smo {
            n,
            kernel,
            c,
            beta: vec![0.0; 2 * n],
            grad: p.clone(),
            p,
        }
    }

    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn k(&self, t: usize, u: usize) -> f64 {
        self.kernel[(t % self.n) * self.n + u % self.n]
    }

    fn q(&self, t: usize, u: usize) -> f64 {
        self.sign(t) * self.sign(u) * self.k(t, u)
    }

    /// `−(½βᵀQβ + pᵀβ)`, the dual objective in maximization form.
    fn dual_objective(&self) -> f64 {
        -0.5 * self
            .beta
            .iter()
            .zip(&self.grad)
            .zip(&self.p)
            .map(|((b, g), p)| b * (g + p))
            .sum::<f64>()
    }

    /// Second-order working-set selection. Returns the pair and the current
    /// maximal KKT violation.
    fn select_pair(&self) -> (Option<(usize, usize)>, f64) {
        let l = 2 * self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i = None;
        for t in 0..l {
            let up = if self.sign(t) > 0.0 {
                self.beta[t] < self.c
            } else {
                self.beta[t] > 0.0
            };
            let v = -self.sign(t) * self.grad[t];
            if up && v >= gmax {
                gmax = v;
                i = Some(t);
            }
        }
        let Some(i) = i else {
            return (None, 0.0);
        };
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = None;
        let mut best = f64::INFINITY;
        for t in 0..l {
            let low = if self.sign(t) > 0.0 {
                self.beta[t] > 0.0
            } else {
                self.beta[t] < self.c
            };
            if !low {
                continue;
            }
            let v = self.sign(t) * self.grad[t];
            gmax2 = gmax2.max(v);
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let mut quad = self.k(i, i) + self.k(t, t) - 2.0 * self.k(i, t);
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -grad_diff * grad_diff / quad;
                if obj <= best {
                    best = obj;
                    j = Some(t);
                }
            }
        }
        (j.map(|j| (i, j)), gmax + gmax2)
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        let qij = self.q(i, j);
        let (gi, gj) = (self.grad[i], self.grad[j]);
        if self.sign(i) != self.sign(j) {
            let mut quad = self.k(i, i) + self.k(j, j) + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = self.k(i, i) + self.k(j, j) - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.beta[i] = ai;
        self.beta[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..2 * self.n {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
    }

    /// Bias term: mean of `s_t·G_t` over free variables, or the midpoint of
    /// the feasible interval when none are free.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut n_free, mut sum_free) = (0usize, 0.0);
        for t in 0..2 * self.n {
            let s = self.sign(t);
            let yg = s * self.grad[t];
            if self.beta[t] >= self.c {
                if s < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.beta[t] <= 0.0 {
                if s > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            0.5 * (ub + lb)
        }
    }

    fn solve(mut self, tol: f64, max_iter: usize, mut trace: Option<&mut Vec<f64>>) -> Solution {
        if let Some(t) = trace.as_deref_mut() {
            t.push(self.dual_objective());
        }
        let mut iterations = 0;
        let mut converged = false;
        loop {
            let (pair, violation) = self.select_pair();
            let Some((i, j)) = pair.filter(|_| violation >= tol) else {
                converged = true;
                break;
            };
            if iterations >= max_iter {
                break;
            }
            self.update_pair(i, j);
            iterations += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.dual_objective());
            }
        }
        Solution {
            rho: self.rho(),
            beta: self.beta,
            iterations,
            converged,
        }
    }
}

/// Fits the model and returns the dual objective after every pair update
/// (entry 0 is the all-zero starting point).
pub fn svr_fit_traced(data: &TrainingData, params: &SvrParams) -> Result<(SvrModel, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = fit_inner(data, params, Some(&mut trace))?;
    Ok((model, trace))
}

pub fn svr_fit(data: &TrainingData, params: &SvrParams) -> Result<SvrModel> {
    fit_inner(data, params, None)
}

fn fit_inner(
    data: &TrainingData,
    params: &SvrParams,
    trace: Option<&mut Vec<f64>>,
) -> Result<SvrModel> {
    params.validate()?;
    let n = data.len();
    let d = data.width();
    let (mean, scale) = fit_standardizer(&data.x);
    let z: Vec<Vec<f64>> = data
        .x
        .iter()
        .map(|r| standardize(r, &mean, &scale))
        .collect();
    let gamma = params.gamma.unwrap_or_else(|| {
        let count = (n * d) as f64;
        let mu = z.iter().flatten().sum::<f64>() / count;
        let var = z.iter().flatten().map(|v| (v - mu) * (v - mu)).sum::<f64>() / count;
        if var > 0.0 {
            1.0 / (d as f64 * var)
        } else {
            1.0 / d as f64
        }
    });
    let mut kernel = vec![0.0; n * n];
    for a in 0..n {
        for b in a..n {
            let v = rbf(gamma, &z[a], &z[b]);
            kernel[a * n + b] = v;
            kernel[b * n + a] = v;
        }
    }
    let max_iter = params.max_iter.unwrap_or(1000 * n);
    let sol =
        Smo::new(&kernel, &data.y, params.c, params.epsilon).solve(params.tol, max_iter, trace);
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for (i, zi) in z.into_iter().enumerate() {
        let c = sol.beta[i] - sol.beta[i + n];
        if c != 0.0 {
            support.push(zi);
            coef.push(c);
        }
    }
    Ok(SvrModel {
        mean,
        scale,
        gamma,
        support,
        coef,
        bias: -sol.rho,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}
