//! Six angle regressors behind one fit/predict interface.
//!
//! Every model maps a per-sector power vector (dBm) to an angle in degrees.
//! Predictions are clamped to `[0, 90]`.

pub mod boosting;
pub mod cart;
pub mod forest;
pub mod knn;
pub mod svr;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::probing::FeatureVector;

pub use boosting::{BoostedModel, GbParams, XgbParams};
pub use cart::CartParams;
pub use forest::{Forest, MaxFeatures, RfParams};
pub use knn::{KnnModel, KnnParams};
pub use svr::{SvrModel, SvrParams};
pub use tree::Node;

pub const ANGLE_MIN_DEG: f64 = 0.0;
pub const ANGLE_MAX_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegressorKind {
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "SVR")]
    Svr,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "XGB")]
    Xgb,
    #[serde(rename = "GB")]
    Gb,
    #[serde(rename = "RF")]
    Rf,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 6] = [
        RegressorKind::Dt,
        RegressorKind::Svr,
        RegressorKind::Knn,
        RegressorKind::Xgb,
        RegressorKind::Gb,
        RegressorKind::Rf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegressorKind::Dt => "DT",
            RegressorKind::Svr => "SVR",
            RegressorKind::Knn => "KNN",
            RegressorKind::Xgb => "XGB",
            RegressorKind::Gb => "GB",
            RegressorKind::Rf => "RF",
        }
    }
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegressorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Model(format!(
                    "unknown model kind `{s}` (expected one of DT, SVR, KNN, XGB, GB, RF)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum Hyperparams {
    #[serde(rename = "DT")]
    Dt(CartParams),
    #[serde(rename = "SVR")]
    Svr(SvrParams),
    #[serde(rename = "KNN")]
    Knn(KnnParams),
    #[serde(rename = "XGB")]
    Xgb(XgbParams),
    #[serde(rename = "GB")]
    Gb(GbParams),
    #[serde(rename = "RF")]
    Rf(RfParams),
}

impl Hyperparams {
    pub fn default_for(kind: RegressorKind) -> Self {
        match kind {
            RegressorKind::Dt => Hyperparams::Dt(CartParams::default()),
            RegressorKind::Svr => Hyperparams::Svr(SvrParams::default()),
            RegressorKind::Knn => Hyperparams::Knn(KnnParams::default()),
            RegressorKind::Xgb => Hyperparams::Xgb(XgbParams::default()),
            RegressorKind::Gb => Hyperparams::Gb(GbParams::default()),
            RegressorKind::Rf => Hyperparams::Rf(RfParams::default()),
        }
    }

    /// Parses the kind-specific parameter object; omitted keys keep their
    /// defaults, unknown keys are rejected.
    pub fn from_json(kind: RegressorKind, json: &str) -> Result<Self> {
        fn parse<T: serde::de::DeserializeOwned>(json: &str) -> Result<T> {
            serde_json::from_str(json).map_err(|e| Error::Json {
                context: "model parameters".into(),
                source: e,
            })
        }
        Ok(match kind {
            RegressorKind::Dt => Hyperparams::Dt(parse(json)?),
            RegressorKind::Svr => Hyperparams::Svr(parse(json)?),
            RegressorKind::Knn => Hyperparams::Knn(parse(json)?),
            RegressorKind::Xgb => Hyperparams::Xgb(parse(json)?),
            RegressorKind::Gb => Hyperparams::Gb(parse(json)?),
            RegressorKind::Rf => Hyperparams::Rf(parse(json)?),
        })
    }

    pub fn kind(&self) -> RegressorKind {
        match self {
            Hyperparams::Dt(_) => RegressorKind::Dt,
            Hyperparams::Svr(_) => RegressorKind::Svr,
            Hyperparams::Knn(_) => RegressorKind::Knn,
            Hyperparams::Xgb(_) => RegressorKind::Xgb,
            Hyperparams::Gb(_) => RegressorKind::Gb,
            Hyperparams::Rf(_) => RegressorKind::Rf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub hyperparameters: Hyperparams,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(hyperparameters: Hyperparams, seed: u64) -> Self {
        RegressorSpec {
            hyperparameters,
            seed,
        }
    }

    pub fn default_for(kind: RegressorKind, seed: u64) -> Self {
        Self::new(Hyperparams::default_for(kind), seed)
    }

    pub fn kind(&self) -> RegressorKind {
        self.hyperparameters.kind()
    }
}

/// Validated feature matrix and labels shared by all learners.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl TrainingData {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::domain("empty training set"));
        }
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        let d = x[0].len();
        if d == 0 {
            return Err(Error::invalid("zero-width feature vectors"));
        }
        if x.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged feature rows"));
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite training value"));
        }
        Ok(TrainingData { x, y })
    }

    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        Self::new(ds.features(), ds.labels())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x[0].len()
    }

    /// Row indices sorted lexicographically by features, then label, so
    /// order-sensitive fitting does not depend on input order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let lexicographic = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            lexicographic(&self.x[a], &self.x[b]).then(self.y[a].total_cmp(&self.y[b]))
        });
        order
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelState {
    #[serde(rename = "DT")]
    Dt(Node),
    #[serde(rename = "SVR")]
    Svr(SvrModel),
    #[serde(rename = "KNN")]
    Knn(KnnModel),
    #[serde(rename = "XGB")]
    Xgb(BoostedModel),
    #[serde(rename = "GB")]
    Gb(BoostedModel),
    #[serde(rename = "RF")]
    Rf(Forest),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub n_samples: usize,
    pub n_features: usize,
}

/// Immutable fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: RegressorSpec,
    pub state: ModelState,
    pub summary: TrainingSummary,
}

pub fn fit(train: &Dataset, spec: &RegressorSpec) -> Result<TrainedModel> {
    fit_data(&TrainingData::from_dataset(train)?, spec)
}

pub fn fit_data(data: &TrainingData, spec: &RegressorSpec) -> Result<TrainedModel> {
    let state = match &spec.hyperparameters {
        Hyperparams::Dt(p) => ModelState::Dt(cart::cart_fit(data, p)?),
        Hyperparams::Svr(p) => ModelState::Svr(svr::svr_fit(data, p)?),
        Hyperparams::Knn(p) => ModelState::Knn(knn::knn_fit(data, p)?),
        Hyperparams::Xgb(p) => ModelState::Xgb(boosting::xgb_fit(data, p)?),
        Hyperparams::Gb(p) => ModelState::Gb(boosting::gb_fit(data, p)?),
        Hyperparams::Rf(p) => ModelState::Rf(forest::rf_fit(data, p, spec.seed)?),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        state,
        summary: TrainingSummary {
            n_samples: data.len(),
            n_features: data.width(),
        },
    })
}

impl TrainedModel {
    pub fn kind(&self) -> RegressorKind {
        self.spec.kind()
    }

    /// Raw model output before clamping.
    pub fn predict_unclamped(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.summary.n_features {
            return Err(Error::invalid(format!(
                "model expects {} features, got {}",
                self.summary.n_features,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature"));
        }
        Ok(match &self.state {
            ModelState::Dt(t) => cart::cart_predict(t, x),
            ModelState::Svr(m) => m.predict(x),
            ModelState::Knn(m) => knn::knn_predict(m, x),
            ModelState::Xgb(m) | ModelState::Gb(m) => m.predict(x),
            ModelState::Rf(f) => forest::rf_predict(f, x),
        })
    }

    pub fn predict_slice(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .predict_unclamped(x)?
            .clamp(ANGLE_MIN_DEG, ANGLE_MAX_DEG))
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<f64> {
        self.predict_slice(&features.powers_dbm)
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        ds.samples
            .iter()
            .map(|s| self.predict(&s.features))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            context: format!("{} model", self.kind()),
            source: e,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)
            .map_err(|e| Error::Model(format!("cannot decode model: {e}")))?;
        if model.spec.kind() != model.state_kind() {
            return Err(Error::Model(format!(
                "spec kind {} does not match stored state {}",
                model.spec.kind(),
                model.state_kind()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fsutil::write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn state_kind(&self) -> RegressorKind {
        match self.state {
            ModelState::Dt(_) => RegressorKind::Dt,
            ModelState::Svr(_) => RegressorKind::Svr,
            ModelState::Knn(_) => RegressorKind::Knn,
            ModelState::Xgb(_) => RegressorKind::Xgb,
            ModelState::Gb(_) => RegressorKind::Gb,
            ModelState::Rf(_) => RegressorKind::Rf,
        }
    }
}
