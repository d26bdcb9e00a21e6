//! RIS reflection physics: steering profiles, the array factor and the
//! cascaded BS → RIS → user link budget.
//!
//! Angles follow one convention throughout: `theta` is the polar angle from
//! the RIS broadside normal, `phi` the azimuth in the RIS plane. Element
//! `(m, n)` sits at `(d_x·m̄, d_y·n̄, 0)` with centered indices
//! `m̄ = m − (M−1)/2`, `n̄ = n − (N−1)/2`.
//!
//! Propagation phase accumulates as `+k·(excess path)`. In the far field the
//! excess path towards direction `u` is `−r·u`, so a plane wave contributes
//! `−k·r·u` at element `r` and a steering profile of `+k·r·u_s` cancels it.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Stand-in for zero linear power, in dBm.
pub const POWER_FLOOR_DBM: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PropagationMode {
    /// Far-field linear phase across the aperture.
    #[default]
    PlaneWave,
    /// Exact per-element path lengths to Tx at `d1_m` and Rx at `d2_m`.
    SphericalWave,
}

/// Physical parameters of the BS → RIS → user link.
///
/// Deserialization takes defaults for missing keys and rejects unknown keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisConfig {
    pub m_rows: usize,
    pub n_cols: usize,
    /// Element spacing along x, meters.
    pub d_x: f64,
    /// Element spacing along y, meters.
    pub d_y: f64,
    pub freq_hz: f64,
    pub p_t_dbm: f64,
    pub g_t_dbi: f64,
    pub g_r_dbi: f64,
    /// Per-element reflection amplitude, identical for all elements.
    pub gamma_amp: f64,
    /// Tx to RIS distance, meters.
    pub d1_m: f64,
    /// RIS to Rx distance, meters.
    pub d2_m: f64,
    pub theta_t_deg: f64,
    pub phi_t_deg: f64,
    pub phi_r_deg: f64,
    pub propagation_mode: PropagationMode,
}

impl Default for RisConfig {
    fn default() -> Self {
        RisConfig {
            m_rows: 20,
            n_cols: 20,
            d_x: 4.6e-3,
            d_y: 4.6e-3,
            freq_hz: 27e9,
            p_t_dbm: 10.0,
            g_t_dbi: 15.0,
            g_r_dbi: 15.0,
            gamma_amp: 0.7,
            d1_m: 2.3,
            d2_m: 2.3,
            theta_t_deg: 0.0,
            phi_t_deg: 0.0,
            phi_r_deg: 180.0,
            propagation_mode: PropagationMode::PlaneWave,
        }
    }
}

impl RisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_rows == 0 {
            return Err(Error::config("m_rows", "must be at least 1"));
        }
        if self.n_cols == 0 {
            return Err(Error::config("n_cols", "must be at least 1"));
        }
        let positive = [
            ("d_x", self.d_x),
            ("d_y", self.d_y),
            ("freq_hz", self.freq_hz),
            ("d1_m", self.d1_m),
            ("d2_m", self.d2_m),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma_amp) {
            return Err(Error::config(
                "gamma_amp",
                format!("must lie in [0, 1], got {}", self.gamma_amp),
            ));
        }
        let finite = [
            ("p_t_dbm", self.p_t_dbm),
            ("g_t_dbi", self.g_t_dbi),
            ("g_r_dbi", self.g_r_dbi),
            ("theta_t_deg", self.theta_t_deg),
            ("phi_t_deg", self.phi_t_deg),
            ("phi_r_deg", self.phi_r_deg),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Parses a JSON config and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: RisConfig = serde_json::from_str(text).map_err(|e| {
            // serde names the offending key in its message ("unknown field `x`").
            Error::InvalidConfig {
                key: offending_key(&e.to_string()).unwrap_or_else(|| "<document>".into()),
                reason: e.to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn wavelength(&self) -> Result<f64> {
        wavelength(self.freq_hz)
    }

    fn wavenumber(&self) -> f64 {
        TAU * self.freq_hz / SPEED_OF_LIGHT
    }

    fn centered_row(&self, m: usize) -> f64 {
        m as f64 - (self.m_rows as f64 - 1.0) / 2.0
    }

    fn centered_col(&self, n: usize) -> f64 {
        n as f64 - (self.n_cols as f64 - 1.0) / 2.0
    }

    /// Linear factor multiplying `|AF|²` in the received power, watts.
    pub fn link_budget_factor(&self) -> f64 {
        let lambda = SPEED_OF_LIGHT / self.freq_hz;
        let p_t = dbm_to_watts(self.p_t_dbm);
        let g_t = db_to_linear(self.g_t_dbi);
        let g_r = db_to_linear(self.g_r_dbi);
        p_t * g_t * g_r * self.d_x * self.d_y * lambda * lambda
            / (64.0 * PI.powi(3) * self.d1_m.powi(2) * self.d2_m.powi(2))
    }
}

fn offending_key(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    Some(msg[start..end].to_string())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm, mapping zero power to [`POWER_FLOOR_DBM`].
pub fn watts_to_dbm(watts: f64) -> f64 {
    if watts > 0.0 {
        (10.0 * watts.log10() + 30.0).max(POWER_FLOOR_DBM)
    } else {
        POWER_FLOOR_DBM
    }
}

pub fn wavelength(freq_hz: f64) -> Result<f64> {
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::config(
            "freq_hz",
            format!("must be finite and > 0, got {freq_hz}"),
        ));
    }
    Ok(SPEED_OF_LIGHT / freq_hz)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// In-plane direction cosines `(sinθ·cosφ, sinθ·sinφ)`.
fn direction_cosines(theta_deg: f64, phi_deg: f64) -> (f64, f64) {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    (t.sin() * p.cos(), t.sin() * p.sin())
}

fn unit_vector(theta_deg: f64, phi_deg: f64) -> [f64; 3] {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

/// Per-element reflection phases realizing one steered beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    m_rows: usize,
    n_cols: usize,
    /// Row-major, wrapped into `[0, 2π)`.
    phases: Vec<f64>,
    pub steer_theta_deg: f64,
    pub steer_phi_deg: f64,
}

impl PhaseProfile {
    /// Builds a profile from raw row-major phases; entries are wrapped.
    pub fn from_phases(
        m_rows: usize,
        n_cols: usize,
        phases: Vec<f64>,
        steer_theta_deg: f64,
        steer_phi_deg: f64,
    ) -> Result<Self> {
        if phases.len() != m_rows * n_cols {
            return Err(Error::invalid(format!(
                "expected {}x{} = {} phases, got {}",
                m_rows,
                n_cols,
                m_rows * n_cols,
                phases.len()
            )));
        }
        Ok(PhaseProfile {
            m_rows,
            n_cols,
            phases: phases.into_iter().map(wrap_phase).collect(),
            steer_theta_deg,
            steer_phi_deg,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m_rows, self.n_cols)
    }

    pub fn phase(&self, m: usize, n: usize) -> f64 {
        self.phases[m * self.n_cols + n]
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Same profile with `offset` radians added to every element.
    pub fn with_phase_offset(&self, offset: f64) -> Self {
        PhaseProfile {
            phases: self.phases.iter().map(|p| wrap_phase(p + offset)).collect(),
            ..self.clone()
        }
    }

    fn check_matches(&self, cfg: &RisConfig) -> Result<()> {
        if (self.m_rows, self.n_cols) != (cfg.m_rows, cfg.n_cols) {
            return Err(Error::invalid(format!(
                "profile is {}x{} but config is {}x{}",
                self.m_rows, self.n_cols, cfg.m_rows, cfg.n_cols
            )));
        }
        Ok(())
    }
}

/// Incident phase at element `(m, n)` for a plane wave from `(θ_t, φ_t)`.
fn incident_phase(cfg: &RisConfig, m: usize, n: usize) -> f64 {
    let (ux, uy) = direction_cosines(cfg.theta_t_deg, cfg.phi_t_deg);
    -cfg.wavenumber() * (cfg.d_x * cfg.centered_row(m) * ux + cfg.d_y * cfg.centered_col(n) * uy)
}

pub fn steering_phase_profile(
    cfg: &RisConfig,
    theta_s_deg: f64,
    phi_s_deg: f64,
) -> Result<PhaseProfile> {
    cfg.validate()?;
    if !(0.0..=90.0).contains(&theta_s_deg) {
        return Err(Error::domain(format!("steer out of [0,90]: {theta_s_deg}")));
    }
    if !phi_s_deg.is_finite() {
        return Err(Error::domain("steer azimuth must be finite"));
    }
    let k = cfg.wavenumber();
    let (ux, uy) = direction_cosines(theta_s_deg, phi_s_deg);
    let mut phases = Vec::with_capacity(cfg.m_rows * cfg.n_cols);
    for m in 0..cfg.m_rows {
        for n in 0..cfg.n_cols {
            let steer =
                k * (cfg.d_x * cfg.centered_row(m) * ux + cfg.d_y * cfg.centered_col(n) * uy);
            phases.push(steer - incident_phase(cfg, m, n));
        }
    }
    PhaseProfile::from_phases(cfg.m_rows, cfg.n_cols, phases, theta_s_deg, phi_s_deg)
}

/// Precomputed per-profile state for evaluating many observation angles.
struct ArrayEvaluator<'a> {
    cfg: &'a RisConfig,
    /// `γ·exp(j(φ_mn + ψ_inc))`, row-major.
    weights: Vec<Complex64>,
}

impl<'a> ArrayEvaluator<'a> {
    fn new(cfg: &'a RisConfig, profile: &PhaseProfile) -> Result<Self> {
        cfg.validate()?;
        profile.check_matches(cfg)?;
        let plane = cfg.propagation_mode == PropagationMode::PlaneWave;
        let mut weights = Vec::with_capacity(profile.phases.len());
        for m in 0..cfg.m_rows {
            for n in 0..cfg.n_cols {
                // Spherical mode carries the incident leg in its exact path term.
                let inc = if plane {
                    incident_phase(cfg, m, n)
                } else {
                    0.0
                };
                weights.push(Complex64::from_polar(
                    cfg.gamma_amp,
                    profile.phase(m, n) + inc,
                ));
            }
        }
        Ok(ArrayEvaluator { cfg, weights })
    }

    fn evaluate(&self, theta_r_deg: f64, phi_r_deg: f64) -> Complex64 {
        match self.cfg.propagation_mode {
            PropagationMode::PlaneWave => self.evaluate_plane(theta_r_deg, phi_r_deg),
            PropagationMode::SphericalWave => self.evaluate_spherical(theta_r_deg, phi_r_deg),
        }
    }

    // The observation phase is separable in (m, n): M + N exponentials
    // instead of M·N.
    fn evaluate_plane(&self, theta_r_deg: f64, phi_r_deg: f64) -> Complex64 {
        let cfg = self.cfg;
        let k = cfg.wavenumber();
        let (ux, uy) = direction_cosines(theta_r_deg, phi_r_deg);
        let col: Vec<Complex64> = (0..cfg.n_cols)
            .map(|n| Complex64::from_polar(1.0, -k * cfg.d_y * cfg.centered_col(n) * uy))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..cfg.m_rows {
            let row = &self.weights[m * cfg.n_cols..(m + 1) * cfg.n_cols];
            let partial: Complex64 = row.iter().zip(&col).map(|(w, c)| w * c).sum();
            total += partial * Complex64::from_polar(1.0, -k * cfg.d_x * cfg.centered_row(m) * ux);
        }
        total
    }

    fn evaluate_spherical(&self, theta_r_deg: f64, phi_r_deg: f64) -> Complex64 {
        let cfg = self.cfg;
        let k = cfg.wavenumber();
        let ut = unit_vector(cfg.theta_t_deg, cfg.phi_t_deg);
        let ur = unit_vector(theta_r_deg, phi_r_deg);
        let tx = ut.map(|c| c * cfg.d1_m);
        let rx = ur.map(|c| c * cfg.d2_m);
        let dist = |p: &[f64; 3], x: f64, y: f64| {
            ((p[0] - x).powi(2) + (p[1] - y).powi(2) + p[2].powi(2)).sqrt()
        };
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..cfg.m_rows {
            let x = cfg.d_x * cfg.centered_row(m);
            for n in 0..cfg.n_cols {
                let y = cfg.d_y * cfg.centered_col(n);
                let excess = (dist(&tx, x, y) - cfg.d1_m) + (dist(&rx, x, y) - cfg.d2_m);
                total += self.weights[m * cfg.n_cols + n] * Complex64::from_polar(1.0, k * excess);
            }
        }
        total
    }

    fn power_dbm(&self, theta_r_deg: f64) -> f64 {
        let af = self.evaluate(theta_r_deg, self.cfg.phi_r_deg);
        watts_to_dbm(self.cfg.link_budget_factor() * af.norm_sqr())
    }
}

/// Complex array factor of `profile` observed from `(theta_r, phi_r)`.
pub fn array_factor(
    cfg: &RisConfig,
    profile: &PhaseProfile,
    theta_r_deg: f64,
    phi_r_deg: f64,
) -> Result<Complex64> {
    Ok(ArrayEvaluator::new(cfg, profile)?.evaluate(theta_r_deg, phi_r_deg))
}

fn check_user_angle(theta_r_deg: f64) -> Result<()> {
    if !(0.0..=90.0).contains(&theta_r_deg) {
        return Err(Error::domain(format!(
            "receiver angle out of [0,90]: {theta_r_deg}"
        )));
    }
    Ok(())
}

/// Received power at `theta_r` on the `cfg.phi_r_deg` cut, dBm.
pub fn received_power_dbm(
    cfg: &RisConfig,
    profile: &PhaseProfile,
    theta_r_deg: f64,
) -> Result<f64> {
    check_user_angle(theta_r_deg)?;
    Ok(ArrayEvaluator::new(cfg, profile)?.power_dbm(theta_r_deg))
}

/// Uniform angle grid `start, start+step, …` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl AngleGrid {
    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Self> {
        let grid = AngleGrid {
            start_deg,
            stop_deg,
            step_deg,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.start_deg, self.stop_deg, self.step_deg]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::domain("grid bounds must be finite"));
        }
        if !(self.step_deg > 0.0) {
            return Err(Error::domain(format!(
                "grid step must be > 0, got {}",
                self.step_deg
            )));
        }
        if !(self.start_deg < self.stop_deg) {
            return Err(Error::domain(format!(
                "empty grid: start {} is not below stop {}",
                self.start_deg, self.stop_deg
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        // Tolerate representation error so 0:90:0.5 has 181 points.
        ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.start_deg + i as f64 * self.step_deg)
            .collect()
    }
}

impl FromStr for AngleGrid {
    type Err = Error;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::domain(format!(
                "grid must be start:stop:step, got `{s}`"
            )));
        }
        let mut vals = [0.0; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("non-numeric grid value `{p}`")))?;
        }
        AngleGrid::new(vals[0], vals[1], vals[2])
    }
}

impl fmt::Display for AngleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start_deg, self.stop_deg, self.step_deg)
    }
}

/// Received power sampled over an angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTrace {
    pub angles_deg: Vec<f64>,
    pub power_dbm: Vec<f64>,
    pub label: String,
}

impl PatternTrace {
    pub fn new(
        angles_deg: Vec<f64>,
        power_dbm: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if angles_deg.len() != power_dbm.len() {
            return Err(Error::invalid("trace angle and power lengths differ"));
        }
        if angles_deg.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("trace angles must be strictly increasing"));
        }
        if power_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("trace powers must be finite"));
        }
        Ok(PatternTrace {
            angles_deg,
            power_dbm,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta_deg,pr_dbm")?;
        for (a, p) in self.angles_deg.iter().zip(&self.power_dbm) {
            writeln!(w, "{a:.6},{p:.6}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

pub fn radiation_pattern(
    cfg: &RisConfig,
    profile: &PhaseProfile,
    grid: &AngleGrid,
) -> Result<PatternTrace> {
    grid.validate()?;
    let points = grid.points();
    for &a in &points {
        check_user_angle(a)?;
    }
    let eval = ArrayEvaluator::new(cfg, profile)?;
    let power = points.iter().map(|&a| eval.power_dbm(a)).collect();
    let label = format!("steer_{}deg", profile.steer_theta_deg);
    PatternTrace::new(points, power, label)
}

/// Angle of maximum power; ties go to the smallest angle.
pub fn peak_angle(trace: &PatternTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::domain("peak of an empty trace"));
    }
    let mut best = 0;
    for i in 1..trace.len() {
        if trace.power_dbm[i] > trace.power_dbm[best] {
            best = i;
        }
    }
    Ok(trace.angles_deg[best])
}
