//! Sector codebook and per-user probing.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{self, PhaseProfile, RisConfig};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub lower_deg: f64,
    pub upper_deg: f64,
    pub center_deg: f64,
}

/// One steered profile per sector of an equal-width partition of a span.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorCodebook {
    sectors: Vec<Sector>,
    profiles: Vec<PhaseProfile>,
}

/// Serializable description of a codebook; enough to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    pub n_sectors: usize,
    pub span_deg: (f64, f64),
    pub steer_angles_deg: Vec<f64>,
}

pub const DEFAULT_SECTORS: usize = 4;
pub const DEFAULT_SPAN: (f64, f64) = (0.0, 90.0);

impl SectorCodebook {
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn profiles(&self) -> &[PhaseProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    /// Sector containing `theta`. Intervals are half-open except the last,
    /// which also owns the upper span edge.
    pub fn sector_of(&self, theta_deg: f64) -> Option<usize> {
        let last = self.sectors.len().checked_sub(1)?;
        self.sectors.iter().enumerate().position(|(i, s)| {
            theta_deg >= s.lower_deg
                && (theta_deg < s.upper_deg || (i == last && theta_deg == s.upper_deg))
        })
    }

    pub fn spec(&self) -> CodebookSpec {
        CodebookSpec {
            n_sectors: self.sectors.len(),
            span_deg: (
                self.sectors.first().map_or(0.0, |s| s.lower_deg),
                self.sectors.last().map_or(0.0, |s| s.upper_deg),
            ),
            steer_angles_deg: self.sectors.iter().map(|s| s.center_deg).collect(),
        }
    }
}

pub fn build_sector_codebook(
    cfg: &RisConfig,
    n_sectors: usize,
    span: (f64, f64),
) -> Result<SectorCodebook> {
    if n_sectors == 0 {
        return Err(Error::domain("codebook needs at least one sector"));
    }
    let (lo, hi) = span;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0 && hi <= 90.0) {
        return Err(Error::domain(format!(
            "sector span must satisfy 0 <= lo < hi <= 90, got ({lo}, {hi})"
        )));
    }
    let width = (hi - lo) / n_sectors as f64;
    let mut sectors = Vec::with_capacity(n_sectors);
    let mut profiles = Vec::with_capacity(n_sectors);
    for i in 0..n_sectors {
        let lower = lo + i as f64 * width;
        let upper = if i + 1 == n_sectors {
            hi
        } else {
            lo + (i + 1) as f64 * width
        };
        let center = 0.5 * (lower + upper);
        profiles.push(physics::steering_phase_profile(cfg, center, cfg.phi_r_deg)?);
        sectors.push(Sector {
            lower_deg: lower,
            upper_deg: upper,
            center_deg: center,
        });
    }
    Ok(SectorCodebook { sectors, profiles })
}

/// Per-sector received powers reported by one user, in sector order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub powers_dbm: Vec<f64>,
}

impl FeatureVector {
    pub fn new(powers_dbm: Vec<f64>) -> Self {
        FeatureVector { powers_dbm }
    }

    pub fn len(&self) -> usize {
        self.powers_dbm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers_dbm.is_empty()
    }

    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.powers_dbm.iter().enumerate() {
            if best.map_or(true, |b| p > self.powers_dbm[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Probes every codebook beam at the user angle. With `noise_sigma_db > 0`,
/// adds i.i.d. Gaussian noise in dB drawn from a generator seeded by
/// `rng_seed` (0 when absent). Zero sigma never touches a generator.
pub fn probe_features(
    cfg: &RisConfig,
    codebook: &SectorCodebook,
    theta_user_deg: f64,
    noise_sigma_db: f64,
    rng_seed: Option<u64>,
) -> Result<FeatureVector> {
    if !(noise_sigma_db >= 0.0 && noise_sigma_db.is_finite()) {
        return Err(Error::domain(format!(
            "noise sigma must be finite and >= 0, got {noise_sigma_db}"
        )));
    }
    let mut powers = codebook
        .profiles
        .iter()
        .map(|p| physics::received_power_dbm(cfg, p, theta_user_deg))
        .collect::<Result<Vec<f64>>>()?;
    if noise_sigma_db > 0.0 {
        let mut rng = seed::rng(rng_seed.unwrap_or(0));
        let normal = Normal::new(0.0, noise_sigma_db).expect("sigma validated above");
        for p in &mut powers {
            *p += normal.sample(&mut rng);
        }
    }
    Ok(FeatureVector::new(powers))
}
