//! Labeled (per-sector powers, angle) datasets and their CSV form.
//!
//! CSV layout: header `p_s0_dbm,…,p_s{n-1}_dbm,theta_deg`, one sample per
//! row, six decimals, `\n` line endings, no quoting. Generation parameters
//! live in a `<name>.meta.json` sidecar next to the CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::physics::{AngleGrid, RisConfig};
use crate::probing::{self, CodebookSpec, FeatureVector, SectorCodebook};
use crate::seed;

pub const DEFAULT_STEP_DEG: f64 = 0.5;
pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_SIGMA_DB: f64 = 1.0;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: FeatureVector,
    pub theta_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub grid_step_deg: f64,
    pub repeats_per_angle: usize,
    pub noise_sigma_db: f64,
    pub seed: u64,
    pub codebook: CodebookSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub meta: Option<DatasetMeta>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Dataset {
            samples,
            meta: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature width, from the first sample.
    pub fn width(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.features.powers_dbm.clone())
            .collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta_deg).collect()
    }

    pub fn to_csv_string(&self, n_sectors: usize) -> String {
        let mut out = csv_header(n_sectors);
        out.push('\n');
        for s in &self.samples {
            for p in &s.features.powers_dbm {
                write!(out, "{p:.6},").unwrap();
            }
            writeln!(out, "{:.6}", s.theta_deg).unwrap();
        }
        out
    }
}

pub fn csv_header(n_sectors: usize) -> String {
    let mut cols: Vec<String> = (0..n_sectors).map(|i| format!("p_s{i}_dbm")).collect();
    cols.push("theta_deg".into());
    cols.join(",")
}

/// `data.csv` → `data.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Probes the codebook at every grid angle in `[0, 90]`, `repeats_per_angle`
/// times each. Sample `(angle i, repeat r)` draws its noise from
/// `indexed_seed(seed, [i, r])`, so output order is `(i, r)` and does not
/// depend on evaluation order.
pub fn generate_dataset(
    cfg: &RisConfig,
    codebook: &SectorCodebook,
    step_deg: f64,
    repeats_per_angle: usize,
    noise_sigma_db: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(step_deg.is_finite() && step_deg > 0.0) {
        return Err(Error::domain(format!("degenerate grid step {step_deg}")));
    }
    if repeats_per_angle == 0 {
        return Err(Error::domain("repeats per angle must be >= 1"));
    }
    if !(noise_sigma_db.is_finite() && noise_sigma_db >= 0.0) {
        return Err(Error::domain(format!(
            "noise sigma must be finite and >= 0, got {noise_sigma_db}"
        )));
    }
    let grid = AngleGrid::new(0.0, 90.0, step_deg)?;
    let mut samples = Vec::with_capacity(grid.len() * repeats_per_angle);
    for (i, theta) in grid.points().into_iter().enumerate() {
        let clean = probing::probe_features(cfg, codebook, theta, 0.0, None)?;
        for r in 0..repeats_per_angle {
            let features = if noise_sigma_db > 0.0 {
                let s = seed::indexed_seed(seed, &[i as u64, r as u64]);
                probing::probe_features(cfg, codebook, theta, noise_sigma_db, Some(s))?
            } else {
                clean.clone()
            };
            samples.push(Sample {
                features,
                theta_deg: theta,
            });
        }
    }
    Ok(Dataset {
        samples,
        meta: Some(DatasetMeta {
            grid_step_deg: step_deg,
            repeats_per_angle,
            noise_sigma_db,
            seed,
            codebook: codebook.spec(),
        }),
    })
}

/// Seeded shuffle then partition into `(train, test)`.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::domain(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::domain(format!("cannot split {n} samples")));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let pick = |idx: &[usize]| Dataset {
        samples: idx.iter().map(|&i| ds.samples[i].clone()).collect(),
        meta: ds.meta.clone(),
    };
    let (test_idx, train_idx) = order.split_at(n_test);
    Ok((pick(train_idx), pick(test_idx)))
}

/// Writes the CSV and, when `ds.meta` is set, its sidecar.
pub fn save_csv(ds: &Dataset, path: &Path, n_sectors: usize) -> Result<()> {
    if let Some(w) = ds
        .samples
        .iter()
        .map(|s| s.features.len())
        .find(|&w| w != n_sectors)
    {
        return Err(Error::invalid(format!(
            "sample has {w} features but {n_sectors} sectors were declared"
        )));
    }
    fsutil::write_atomic(path, ds.to_csv_string(n_sectors).as_bytes())?;
    if let Some(meta) = &ds.meta {
        fsutil::write_json(&meta_path(path), meta)?;
    }
    Ok(())
}

pub fn load_csv(path: &Path, expected_sectors: usize) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_csv(&text, expected_sectors, path)?;
    if samples.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no samples".into(),
        });
    }
    let sidecar = meta_path(path);
    let meta = if sidecar.exists() {
        Some(fsutil::read_json(&sidecar)?)
    } else {
        None
    };
    Ok(Dataset { samples, meta })
}

fn parse_csv(text: &str, n_sectors: usize, path: &Path) -> Result<Vec<Sample>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let expected = csv_header(n_sectors);
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == expected => {}
        Some((_, h)) => return Err(err(1, format!("header `{h}` does not match `{expected}`"))),
        None => return Err(err(1, "empty file, no header".into())),
    }
    let mut samples = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_sectors + 1 {
            return Err(err(
                line_no,
                format!("expected {} columns, found {}", n_sectors + 1, cells.len()),
            ));
        }
        let mut values = Vec::with_capacity(cells.len());
        for c in cells {
            let v: f64 = c
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("non-numeric cell `{c}`")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("non-finite cell `{c}`")));
            }
            values.push(v);
        }
        let theta = values.pop().expect("n_sectors + 1 >= 1 cells");
        if !(0.0..=90.0).contains(&theta) {
            return Err(err(line_no, format!("theta_deg {theta} outside [0, 90]")));
        }
        samples.push(Sample {
            features: FeatureVector::new(values),
            theta_deg: theta,
        });
    }
    Ok(samples)
}
