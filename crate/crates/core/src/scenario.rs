//! Experiment scenarios: physical constants, hyperparameters, validation and
//! TOML persistence.
//!
//! Scenario files mirror [`RawScenario`]: lengths in meters, powers in dBm.
//! [`validate`] turns a raw description into a [`Scenario`] with linear-watt
//! powers, the derived slot duration and concrete target positions.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tags};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_WAVELENGTH: f64 = 0.0107;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    /// Mission area edge lengths, meters.
    pub region_size: [f64; 2],
    #[serde(rename = "H")]
    pub altitude: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    #[serde(rename = "N")]
    pub slots: usize,
    #[serde(rename = "V_max")]
    pub max_speed: f64,
    #[serde(rename = "q_I")]
    pub start: [f64; 2],
    #[serde(rename = "q_F")]
    pub end: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RcsConfig {
    Uniform(f64),
    PerTarget(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetConfig {
    #[serde(rename = "K")]
    pub count: usize,
    /// `|α_k|²` in m².
    pub rcs_m2: RcsConfig,
    /// Explicit positions; drawn uniformly over the region from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    #[serde(rename = "M_t")]
    pub tx_antennas: usize,
    #[serde(rename = "M_r")]
    pub rx_antennas: usize,
    #[serde(rename = "lambda")]
    pub wavelength: f64,
    /// Movable region `[0, D]`, meters.
    #[serde(rename = "D")]
    pub aperture: f64,
    #[serde(rename = "D_min")]
    pub min_spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    #[serde(rename = "P_max_dBm")]
    pub max_power_dbm: f64,
    #[serde(rename = "sigma2_r_dBm")]
    pub noise_dbm: f64,
    #[serde(rename = "N_bar")]
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientDraws {
    /// One `r1` and one `r2` per velocity update.
    #[default]
    Scalar,
    /// Independent draws per coordinate.
    PerCoordinate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    #[serde(rename = "T_max")]
    pub iterations: usize,
    #[serde(rename = "P")]
    pub particles: usize,
    pub c1: f64,
    pub c2: f64,
    pub omega_max: f64,
    pub omega_min: f64,
    /// Penalty multiplier. The per-violation penalty is
    /// `eta * (1 + best initial feasible fitness)`.
    pub eta: f64,
    #[serde(default)]
    pub coefficient_draws: CoefficientDraws,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            iterations: 50,
            particles: 50,
            c1: 1.5,
            c2: 1.5,
            omega_max: 0.9,
            omega_min: 0.4,
            eta: 1e6,
            coefficient_draws: CoefficientDraws::Scalar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoParams {
    pub l_max: usize,
    /// Relative improvement threshold on the reciprocal objective.
    pub epsilon: f64,
}

impl Default for AoParams {
    fn default() -> Self {
        Self {
            l_max: 20,
            epsilon: 1e-4,
        }
    }
}

/// Fixed geometry of a uniform linear array used by the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiveGeometry {
    /// Spacing `D / (M - 1)`, spanning the whole region.
    #[default]
    Sula,
    /// Half-wavelength spacing anchored at 0.
    Dula,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineConfig {
    #[serde(default)]
    pub tfao_receive: ReceiveGeometry,
}

/// Scenario as written in a file, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScenario {
    pub seed: u64,
    pub mission: MissionConfig,
    pub targets: TargetConfig,
    pub array: ArrayConfig,
    pub radio: RadioConfig,
    #[serde(default)]
    pub pso: PsoParams,
    #[serde(default)]
    pub ao: AoParams,
    #[serde(default)]
    pub baselines: BaselineConfig,
}

impl Default for RawScenario {
    fn default() -> Self {
        let lambda = DEFAULT_WAVELENGTH;
        Self {
            seed: DEFAULT_SEED,
            mission: MissionConfig {
                region_size: [800.0, 800.0],
                altitude: 100.0,
                duration: 45.0,
                slots: 20,
                max_speed: 20.0,
                start: [0.0, 400.0],
                end: [800.0, 400.0],
            },
            targets: TargetConfig {
                count: 6,
                rcs_m2: RcsConfig::Uniform(1.0),
                positions: None,
            },
            array: ArrayConfig {
                tx_antennas: 12,
                rx_antennas: 12,
                wavelength: lambda,
                aperture: 20.0 * lambda,
                min_spacing: 0.5 * lambda,
            },
            radio: RadioConfig {
                max_power_dbm: 30.0,
                noise_dbm: -90.0,
                frames: 200,
            },
            pso: PsoParams::default(),
            ao: AoParams::default(),
            baselines: BaselineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub position: [f64; 2],
    /// `|α|²`, m².
    pub rcs_m2: f64,
}

impl Target {
    /// Complex RCS coefficient. The phase is zero; only `|α|²` enters the bound.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.rcs_m2.sqrt(), 0.0)
    }
}

/// A validated scenario. Immutable once built; share it freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub region_size: [f64; 2],
    pub targets: Vec<Target>,
    pub altitude: f64,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub duration: f64,
    pub slots: usize,
    /// `τ = T / N`.
    pub slot_duration: f64,
    pub max_speed: f64,
    pub max_power_dbm: f64,
    pub max_power_w: f64,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub wavelength: f64,
    pub aperture: f64,
    pub min_spacing: f64,
    pub noise_dbm: f64,
    pub noise_w: f64,
    pub frames: usize,
    pub pso: PsoParams,
    pub ao: AoParams,
    pub tfao_receive: ReceiveGeometry,
}

impl Scenario {
    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    /// Largest displacement per slot, `V_max · τ`.
    pub fn max_step(&self) -> f64 {
        self.max_speed * self.slot_duration
    }

    pub fn to_raw(&self) -> RawScenario {
        let first = self.targets.first().map(|t| t.rcs_m2);
        let uniform = first.filter(|&r| self.targets.iter().all(|t| t.rcs_m2 == r));
        RawScenario {
            seed: self.seed,
            mission: MissionConfig {
                region_size: self.region_size,
                altitude: self.altitude,
                duration: self.duration,
                slots: self.slots,
                max_speed: self.max_speed,
                start: self.start,
                end: self.end,
            },
            targets: TargetConfig {
                count: self.targets.len(),
                rcs_m2: match uniform {
                    Some(r) => RcsConfig::Uniform(r),
                    None => RcsConfig::PerTarget(self.targets.iter().map(|t| t.rcs_m2).collect()),
                },
                positions: Some(self.targets.iter().map(|t| t.position).collect()),
            },
            array: ArrayConfig {
                tx_antennas: self.tx_antennas,
                rx_antennas: self.rx_antennas,
                wavelength: self.wavelength,
                aperture: self.aperture,
                min_spacing: self.min_spacing,
            },
            radio: RadioConfig {
                max_power_dbm: self.max_power_dbm,
                noise_dbm: self.noise_dbm,
                frames: self.frames,
            },
            pso: self.pso.clone(),
            ao: self.ao.clone(),
            baselines: BaselineConfig {
                tfao_receive: self.tfao_receive,
            },
        }
    }

    /// Same scenario with a different transmit power.
    pub fn with_max_power_dbm(&self, dbm: f64) -> Scenario {
        let mut s = self.clone();
        s.max_power_dbm = dbm;
        s.max_power_w = dbm_to_watts(dbm);
        s
    }

    /// Same scenario with `count` targets redrawn from `seed`. The draws are
    /// nested: the first `k` targets are identical for every `count >= k`.
    pub fn with_random_targets(&self, count: usize, seed: u64) -> Scenario {
        let rcs = self.targets.first().map(|t| t.rcs_m2).unwrap_or(1.0);
        let mut s = self.clone();
        s.targets = generate_targets(seed, count, self.region_size)
            .into_iter()
            .map(|position| Target { position, rcs_m2: rcs })
            .collect();
        s
    }
}

/// Uniform target positions over `[0, w] x [0, h]`.
pub fn generate_targets(seed: u64, count: usize, region: [f64; 2]) -> Vec<[f64; 2]> {
    let mut rng = rng::stream(seed, &[tags::TARGETS]);
    (0..count)
        .map(|_| [rng.gen::<f64>() * region[0], rng.gen::<f64>() * region[1]])
        .collect()
}

/// The reference configuration: 800 m x 800 m area, six targets, 12 + 12
/// antennas over a 20λ region, 20 slots over 45 s.
pub fn default_scenario() -> Scenario {
    validate(&RawScenario::default()).expect("default scenario is valid")
}

/// One violated scenario invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    TooFewSlots(usize),
    NoTargets,
    TooFewAntennas { array: &'static str, count: usize },
    FramesNotAboveTransmit { frames: usize, tx_antennas: usize },
    ApertureTooSmall { array: &'static str, required: f64, aperture: f64 },
    EndpointsUnreachable { distance: f64, reach: f64 },
    NonPositive(&'static str),
    NonFinite(&'static str),
    TargetCountMismatch { count: usize, positions: usize },
    RcsCountMismatch { count: usize, values: usize },
    Pso(String),
    Ao(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScenarioError::*;
        match self {
            TooFewSlots(n) => write!(f, "N must be at least 2 (got {n})"),
            NoTargets => write!(f, "K must be at least 1"),
            TooFewAntennas { array, count } => {
                write!(f, "{array} array needs at least 2 antennas (got {count})")
            }
            FramesNotAboveTransmit { frames, tx_antennas } => write!(
                f,
                "N_bar ({frames}) must exceed M_t ({tx_antennas})"
            ),
            ApertureTooSmall { array, required, aperture } => write!(
                f,
                "aperture too small for spacing: {array} array needs {required} m, D = {aperture} m"
            ),
            EndpointsUnreachable { distance, reach } => write!(
                f,
                "endpoints unreachable: |q_F - q_I| = {distance} m exceeds (N-1) tau V_max = {reach} m"
            ),
            NonPositive(field) => write!(f, "{field} must be strictly positive"),
            NonFinite(field) => write!(f, "{field} must be finite"),
            TargetCountMismatch { count, positions } => {
                write!(f, "K = {count} but {positions} target positions given")
            }
            RcsCountMismatch { count, values } => {
                write!(f, "K = {count} but {values} RCS values given")
            }
            Pso(msg) => write!(f, "pso: {msg}"),
            Ao(msg) => write!(f, "ao: {msg}"),
        }
    }
}

/// Every invariant violated by a raw scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ScenarioError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario: ")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Checks every invariant of `raw` and builds the validated scenario.
pub fn validate(raw: &RawScenario) -> std::result::Result<Scenario, ValidationErrors> {
    let mut errs = Vec::new();
    let m = &raw.mission;
    let a = &raw.array;
    let r = &raw.radio;

    let positive = [
        ("region_size", m.region_size[0].min(m.region_size[1])),
        ("H", m.altitude),
        ("T", m.duration),
        ("V_max", m.max_speed),
        ("lambda", a.wavelength),
        ("D", a.aperture),
        ("D_min", a.min_spacing),
    ];
    for (name, v) in positive {
        if !v.is_finite() {
            errs.push(ScenarioError::NonFinite(name));
        } else if v <= 0.0 {
            errs.push(ScenarioError::NonPositive(name));
        }
    }
    for (name, v) in [
        ("P_max_dBm", r.max_power_dbm),
        ("sigma2_r_dBm", r.noise_dbm),
        ("q_I", m.start[0] + m.start[1]),
        ("q_F", m.end[0] + m.end[1]),
    ] {
        if !v.is_finite() {
            errs.push(ScenarioError::NonFinite(name));
        }
    }

    if m.slots < 2 {
        errs.push(ScenarioError::TooFewSlots(m.slots));
    }
    let k = raw.targets.count;
    if k == 0 {
        errs.push(ScenarioError::NoTargets);
    }
    for (array, count) in [("transmit", a.tx_antennas), ("receive", a.rx_antennas)] {
        if count < 2 {
            errs.push(ScenarioError::TooFewAntennas { array, count });
        }
    }
    if r.frames <= a.tx_antennas {
        errs.push(ScenarioError::FramesNotAboveTransmit {
            frames: r.frames,
            tx_antennas: a.tx_antennas,
        });
    }
    for (array, count) in [("transmit", a.tx_antennas), ("receive", a.rx_antennas)] {
        let required = count.saturating_sub(1) as f64 * a.min_spacing;
        if required > a.aperture * (1.0 + 1e-12) {
            errs.push(ScenarioError::ApertureTooSmall {
                array,
                required,
                aperture: a.aperture,
            });
        }
    }

    let slot_duration = m.duration / m.slots.max(1) as f64;
    let reach = m.slots.saturating_sub(1) as f64 * slot_duration * m.max_speed;
    let distance = (m.end[0] - m.start[0]).hypot(m.end[1] - m.start[1]);
    if distance > reach * (1.0 + 1e-12) {
        errs.push(ScenarioError::EndpointsUnreachable { distance, reach });
    }

    let rcs: Vec<f64> = match &raw.targets.rcs_m2 {
        RcsConfig::Uniform(v) => vec![*v; k],
        RcsConfig::PerTarget(vs) => {
            if vs.len() != k {
                errs.push(ScenarioError::RcsCountMismatch {
                    count: k,
                    values: vs.len(),
                });
            }
            vs.clone()
        }
    };
    if rcs.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        errs.push(ScenarioError::NonPositive("rcs_m2"));
    }
    let positions = match &raw.targets.positions {
        Some(p) => {
            if p.len() != k {
                errs.push(ScenarioError::TargetCountMismatch {
                    count: k,
                    positions: p.len(),
                });
            }
            if p.iter().flatten().any(|v| !v.is_finite()) {
                errs.push(ScenarioError::NonFinite("positions"));
            }
            p.clone()
        }
        None => generate_targets(raw.seed, k, m.region_size),
    };

    let p = &raw.pso;
    if p.particles == 0 {
        errs.push(ScenarioError::Pso("P must be at least 1".into()));
    }
    if !(p.c1 >= 0.0 && p.c2 >= 0.0) {
        errs.push(ScenarioError::Pso("c1 and c2 must be non-negative".into()));
    }
    if !(p.omega_min >= 0.0 && p.omega_min <= p.omega_max) {
        errs.push(ScenarioError::Pso("need 0 <= omega_min <= omega_max".into()));
    }
    if !(p.eta > 0.0 && p.eta.is_finite()) {
        errs.push(ScenarioError::Pso("eta must be positive".into()));
    }
    if raw.ao.l_max == 0 {
        errs.push(ScenarioError::Ao("l_max must be at least 1".into()));
    }
    if !(raw.ao.epsilon > 0.0) {
        errs.push(ScenarioError::Ao("epsilon must be positive".into()));
    }

    if !errs.is_empty() {
        return Err(ValidationErrors(errs));
    }

    Ok(Scenario {
        seed: raw.seed,
        region_size: m.region_size,
        targets: positions
            .into_iter()
            .zip(rcs)
            .map(|(position, rcs_m2)| Target { position, rcs_m2 })
            .collect(),
        altitude: m.altitude,
        start: m.start,
        end: m.end,
        duration: m.duration,
        slots: m.slots,
        slot_duration,
        max_speed: m.max_speed,
        max_power_dbm: r.max_power_dbm,
        max_power_w: dbm_to_watts(r.max_power_dbm),
        tx_antennas: a.tx_antennas,
        rx_antennas: a.rx_antennas,
        wavelength: a.wavelength,
        aperture: a.aperture,
        min_spacing: a.min_spacing,
        noise_dbm: r.noise_dbm,
        noise_w: dbm_to_watts(r.noise_dbm),
        frames: r.frames,
        pso: raw.pso.clone(),
        ao: raw.ao.clone(),
        tfao_receive: raw.baselines.tfao_receive,
    })
}

/// A parsed scenario together with the keys that were present but unknown.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub unknown_keys: Vec<String>,
}

/// Parses and validates scenario text. Unknown keys are returned, not rejected.
pub fn parse_scenario(text: &str) -> Result<LoadedScenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
        path: None,
        message: e.to_string(),
    })?;
    let document: toml::Value = toml::from_str(text).map_err(|e| Error::Parse {
        path: None,
        message: e.to_string(),
    })?;
    let known = toml::Value::try_from(&raw).map_err(|e| Error::Serialize(e.to_string()))?;
    let mut unknown_keys = Vec::new();
    collect_unknown(&document, &known, "", &mut unknown_keys);
    let scenario = validate(&raw)?;
    Ok(LoadedScenario {
        scenario,
        unknown_keys,
    })
}

fn collect_unknown(doc: &toml::Value, known: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    if let (toml::Value::Table(d), toml::Value::Table(k)) = (doc, known) {
        for (key, value) in d {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            match k.get(key) {
                None => out.push(path),
                Some(kv) => collect_unknown(value, kv, &path, out),
            }
        }
    }
}

/// Loads a scenario file, logging a warning for each unknown key.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let loaded = parse_scenario(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            message,
        },
        other => other,
    })?;
    for key in &loaded.unknown_keys {
        log::warn!("{}: ignoring unknown key `{key}`", path.display());
    }
    Ok(loaded.scenario)
}

pub fn scenario_to_toml(scenario: &Scenario) -> Result<String> {
    toml::to_string_pretty(&scenario.to_raw()).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario_to_toml(scenario)?).map_err(|e| Error::io(path, e))
}
