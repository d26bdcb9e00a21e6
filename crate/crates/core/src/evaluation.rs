//! Held-out metrics, the per-model comparison table and predicted-vs-true
//! radiation patterns.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::physics::{self, AngleGrid, PatternTrace, RisConfig};
use crate::probing::{self, FeatureVector, SectorCodebook};
use crate::regressors::TrainedModel;

/// Anything that turns a feature vector into an angle estimate.
pub trait AnglePredictor {
    fn name(&self) -> String;
    fn predict_angle(&self, features: &FeatureVector) -> Result<f64>;
}

impl AnglePredictor for TrainedModel {
    fn name(&self) -> String {
        self.kind().to_string()
    }

    fn predict_angle(&self, features: &FeatureVector) -> Result<f64> {
        self.predict(features)
    }
}

fn check_pair(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::invalid("metric over empty vectors"));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "metric length mismatch: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    Ok(())
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let total: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b).abs()).sum();
    Ok(total / y_true.len() as f64)
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let total: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((total / y_true.len() as f64).sqrt())
}

/// Coefficient of determination `1 − SSE/SST`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    if y_true.len() < 2 {
        return Err(Error::invalid("r2 needs at least two samples"));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let sst: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if sst == 0.0 {
        return Err(Error::domain("r2 is undefined for zero-variance truth"));
    }
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(1.0 - sse / sst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub model: String,
    pub mae_deg: f64,
    pub rmse_deg: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Ascending MAE; equal MAE keeps input order.
    pub rows: Vec<EvalRow>,
    pub n_test: usize,
    pub dataset_meta: Option<DatasetMeta>,
    /// Only set when the caller supplies one, so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl EvalReport {
    pub fn best(&self) -> Option<&EvalRow> {
        self.rows.first()
    }

    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<8}{:>10}{:>10}{:>8}",
            "Model", "MAE(deg)", "RMSE", "R2"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<8}{:>10.3}{:>10.3}{:>8.3}",
                r.model, r.mae_deg, r.rmse_deg, r.r2
            )
            .unwrap();
        }
        out
    }
}

pub fn evaluate_all<P: AnglePredictor>(models: &[P], test: &Dataset) -> Result<EvalReport> {
    if models.is_empty() {
        return Err(Error::invalid("no models to evaluate"));
    }
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let truth = test.labels();
    let mut rows = Vec::with_capacity(models.len());
    for m in models {
        let pred = test
            .samples
            .iter()
            .map(|s| m.predict_angle(&s.features))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(EvalRow {
            model: m.name(),
            mae_deg: mae(&truth, &pred)?,
            rmse_deg: rmse(&truth, &pred)?,
            r2: r2(&truth, &pred)?,
        });
    }
    rows.sort_by(|a, b| a.mae_deg.total_cmp(&b.mae_deg));
    Ok(EvalReport {
        rows,
        n_test: test.len(),
        dataset_meta: test.meta.clone(),
        timestamp: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPattern {
    pub model: String,
    pub predicted_theta_deg: f64,
    pub trace: PatternTrace,
    pub peak_deg: f64,
    /// `peak_deg` minus the ground-truth peak.
    pub peak_delta_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternComparison {
    pub theta_true_deg: f64,
    pub grid: AngleGrid,
    pub ground_truth: PatternTrace,
    pub ground_truth_peak_deg: f64,
    pub predictions: Vec<ModelPattern>,
}

/// Steers a beam at the true angle and at each model's estimate (from
/// noiseless probing at the true angle) and compares the resulting patterns.
pub fn pattern_comparison<P: AnglePredictor>(
    cfg: &RisConfig,
    theta_true_deg: f64,
    models: &[P],
    codebook: &SectorCodebook,
    grid: &AngleGrid,
) -> Result<PatternComparison> {
    if !(0.0..=90.0).contains(&theta_true_deg) {
        return Err(Error::domain(format!(
            "true angle out of [0,90]: {theta_true_deg}"
        )));
    }
    let steer = |theta: f64, label: String| -> Result<PatternTrace> {
        let profile = physics::steering_phase_profile(cfg, theta, cfg.phi_r_deg)?;
        let mut trace = physics::radiation_pattern(cfg, &profile, grid)?;
        trace.label = label;
        Ok(trace)
    };
    let ground_truth = steer(theta_true_deg, "GT".into())?;
    let gt_peak = physics::peak_angle(&ground_truth)?;
    let features = probing::probe_features(cfg, codebook, theta_true_deg, 0.0, None)?;
    let predictions = models
        .iter()
        .map(|m| {
            let predicted = m.predict_angle(&features)?;
            let trace = steer(predicted, m.name())?;
            let peak = physics::peak_angle(&trace)?;
            Ok(ModelPattern {
                model: m.name(),
                predicted_theta_deg: predicted,
                trace,
                peak_deg: peak,
                peak_delta_deg: peak - gt_peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatternComparison {
        theta_true_deg,
        grid: *grid,
        ground_truth,
        ground_truth_peak_deg: gt_peak,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub model: String,
    pub predicted_theta_deg: f64,
    pub peak_deg: f64,
    pub peak_delta_deg: f64,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeaksFile {
    pub theta_true_deg: f64,
    pub grid: String,
    pub ground_truth_peak_deg: f64,
    pub ground_truth_csv: String,
    pub models: Vec<PeakSummary>,
}

impl PatternComparison {
    /// Writes `ground_truth.csv`, one `pattern_<model>.csv` per prediction
    /// and `peaks.json`. Returns every file written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::new();
        let gt_name = "ground_truth.csv".to_string();
        let gt_path = dir.join(&gt_name);
        fsutil::write_atomic(&gt_path, self.ground_truth.to_csv_string().as_bytes())?;
        written.push(gt_path);
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut models = Vec::new();
        for p in &self.predictions {
            let count = seen.entry(p.model.clone()).or_insert(0);
            *count += 1;
            let name = if *count == 1 {
                format!("pattern_{}.csv", p.model)
            } else {
                format!("pattern_{}_{}.csv", p.model, count)
            };
            let path = dir.join(&name);
            fsutil::write_atomic(&path, p.trace.to_csv_string().as_bytes())?;
            written.push(path);
            models.push(PeakSummary {
                model: p.model.clone(),
                predicted_theta_deg: p.predicted_theta_deg,
                peak_deg: p.peak_deg,
                peak_delta_deg: p.peak_delta_deg,
                csv: name,
            });
        }
        let peaks = PeaksFile {
            theta_true_deg: self.theta_true_deg,
            grid: self.grid.to_string(),
            ground_truth_peak_deg: self.ground_truth_peak_deg,
            ground_truth_csv: gt_name,
            models,
        };
        let peaks_path = dir.join("peaks.json");
        fsutil::write_json(&peaks_path, &peaks)?;
        written.push(peaks_path);
        Ok(written)
    }
}
