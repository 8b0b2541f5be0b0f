//! Experiment configuration (one TOML file per run).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sehs_cvae::{CvaeConfig, TrainConfig};
use sehs_optim::{KrigingOptions, Nsga2Config};
use sehs_peh::PehDesign;
use sehs_tf::WsstConfig;
use sehs_vbi::{BeamModel, CrackSpec, RoadClass, VehicleRanges};

use crate::{PipelineError, Result};

/// Design ranges accepted on the grid.
pub const LENGTH_RANGE: (f64, f64) = (0.15, 0.5);
pub const ASPECT_RANGE: (f64, f64) = (0.1, 1.0);

/// Bridge condition. Named states are cracks at mid-span (10 %, 20 %) or
/// quarter-span (10 %).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DamageState {
    Healthy,
    Dmn1,
    Dmn2,
    Dqn1,
    /// Crack at `position` (fraction of span) with depth ratio `severity`.
    Custom { position: f64, severity: f64 },
}

impl DamageState {
    pub fn label(&self) -> String {
        match self {
            DamageState::Healthy => "HN".into(),
            DamageState::Dmn1 => "DMN1".into(),
            DamageState::Dmn2 => "DMN2".into(),
            DamageState::Dqn1 => "DQN1".into(),
            DamageState::Custom { position, severity } => format!("C{position:.3}S{severity:.3}"),
        }
    }

    pub fn crack(&self, beam: &BeamModel) -> Option<CrackSpec> {
        let (pos, sev) = match *self {
            DamageState::Healthy => return None,
            DamageState::Dmn1 => (0.5, 0.1),
            DamageState::Dmn2 => (0.5, 0.2),
            DamageState::Dqn1 => (0.25, 0.1),
            DamageState::Custom { position, severity } => (position, severity),
        };
        Some(CrackSpec::new(pos * beam.span, sev))
    }
}

impl fmt::Display for DamageState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for DamageState {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        match t.as_str() {
            "HN" | "HEALTHY" => Ok(DamageState::Healthy),
            "DMN1" => Ok(DamageState::Dmn1),
            "DMN2" => Ok(DamageState::Dmn2),
            "DQN1" => Ok(DamageState::Dqn1),
            _ => {
                // custom:<position>:<severity>
                let parts: Vec<&str> = t.split(':').collect();
                if parts.len() == 3 && parts[0] == "CUSTOM" {
                    let p = parts[1].parse::<f64>();
                    let s = parts[2].parse::<f64>();
                    if let (Ok(position), Ok(severity)) = (p, s) {
                        return Ok(DamageState::Custom { position, severity });
                    }
                }
                Err(PipelineError::Config(format!(
                    "unknown damage state '{s}' (HN, DMN1, DMN2, DQN1 or custom:<position>:<severity>)"
                )))
            }
        }
    }
}

impl Serialize for DamageState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DamageState::Custom { position, severity } => s.serialize_str(&format!("custom:{position}:{severity}")),
            other => s.serialize_str(&other.label()),
        }
    }
}

impl<'de> Deserialize<'de> for DamageState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorLocation {
    MidSpan,
    QuarterSpan,
    /// Fraction of the span.
    Custom(f64),
}

impl SensorLocation {
    pub fn fraction(&self) -> f64 {
        match *self {
            SensorLocation::MidSpan => 0.5,
            SensorLocation::QuarterSpan => 0.25,
            SensorLocation::Custom(x) => x,
        }
    }
}

impl FromStr for SensorLocation {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mid-span" | "midspan" | "mid" => Ok(SensorLocation::MidSpan),
            "quarter-span" | "quarterspan" | "quarter" => Ok(SensorLocation::QuarterSpan),
            other => other
                .parse::<f64>()
                .map(SensorLocation::Custom)
                .map_err(|_| PipelineError::Config(format!("unknown sensor location '{s}'"))),
        }
    }
}

impl Serialize for SensorLocation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SensorLocation::MidSpan => s.serialize_str("mid-span"),
            SensorLocation::QuarterSpan => s.serialize_str("quarter-span"),
            SensorLocation::Custom(x) => s.serialize_str(&x.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SensorLocation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn road_to_str<S: serde::Serializer>(r: &RoadClass, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn road_from_str<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<RoadClass, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Damage state of the damaged test passages.
    pub damage: DamageState,
    /// Further damaged states scored only for DI distributions.
    #[serde(default)]
    pub compare_states: Vec<DamageState>,
    #[serde(serialize_with = "road_to_str", deserialize_with = "road_from_str")]
    pub road: RoadClass,
    /// Sensor and harvester position.
    pub sensor: SensorLocation,
    /// Simulation step [s].
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Road length beyond the span (approach) [m].
    #[serde(default = "default_approach")]
    pub approach: f64,
    #[serde(default)]
    pub vehicle_ranges: Option<VehicleRanges>,
}

fn default_dt() -> f64 {
    0.001
}

fn default_approach() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub lengths: Vec<f64>,
    #[serde(default = "default_ratios")]
    pub aspect_ratios: Vec<f64>,
    #[serde(default)]
    pub tip_mass: f64,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
    /// Plate elements `[along length, across width]`.
    #[serde(default = "default_mesh")]
    pub mesh: [usize; 2],
}

fn default_ratios() -> Vec<f64> {
    vec![1.0]
}

fn default_thickness() -> f64 {
    PehDesign::DEFAULT_THICKNESS
}

fn default_mesh() -> [usize; 2] {
    [16, 16]
}

impl DesignConfig {
    /// Grid points, length-major.
    pub fn designs(&self) -> Vec<PehDesign> {
        let mut out = Vec::new();
        for &l in &self.lengths {
            for &r in &self.aspect_ratios {
                out.push(
                    PehDesign::reference()
                        .with_length(l)
                        .with_aspect_ratio(r)
                        .with_tip_mass(self.tip_mass)
                        .with_thickness(self.thickness),
                );
            }
        }
        out
    }

    /// Whether the aspect ratio is a design variable.
    pub fn two_parameter(&self) -> bool {
        self.aspect_ratios.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Healthy passages for training and validation.
    pub healthy: usize,
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    /// Held-out healthy test passages.
    pub healthy_test: usize,
    /// Damaged test passages (per damaged state).
    pub damaged_test: usize,
    /// Largest tolerated share of failed passages.
    #[serde(default = "default_quarantine")]
    pub max_quarantine_fraction: f64,
}

fn default_validation() -> f64 {
    0.2
}

fn default_quarantine() -> f64 {
    0.01
}

impl DatasetConfig {
    pub fn n_validation(&self) -> usize {
        (self.healthy as f64 * self.validation_fraction).round() as usize
    }

    pub fn n_train(&self) -> usize {
        self.healthy - self.n_validation()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    /// Also score acceleration images as a benchmark.
    #[serde(default = "default_true")]
    pub acceleration_baseline: bool,
    /// A missing table means the default network with the KL term
    /// weighted by one over the pixel count.
    #[serde(default = "default_network")]
    pub network: CvaeConfig,
    #[serde(default)]
    pub training: TrainConfig,
}

/// KL weight equivalent to summing the squared error over pixels instead of
/// averaging it. With weight 1 the averaged error is too small next to the
/// KL term, the posterior collapses and mean-mode reconstructions are
/// unrelated to the input.
pub fn per_pixel_kl_weight(network: &CvaeConfig) -> f64 {
    1.0 / network.pixels() as f64
}

fn default_network() -> CvaeConfig {
    let mut n = CvaeConfig::default();
    n.beta_kl = per_pixel_kl_weight(&n);
    n
}

fn default_reps() -> usize {
    5
}

fn default_percentile() -> f64 {
    90.0
}

fn default_true() -> bool {
    true
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            repetitions: default_reps(),
            percentile: default_percentile(),
            acceleration_baseline: true,
            network: default_network(),
            training: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Mean harvested energy [μJ].
    Energy,
    /// Energy over plate area `L·W` [μJ/m²].
    EnergyPerArea,
}

/// Which passages the energy objective averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyState {
    Healthy,
    Damaged,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_objective")]
    pub objective: Objective,
    #[serde(default = "default_energy_state")]
    pub energy_state: EnergyState,
    #[serde(default)]
    pub nsga2: Nsga2Config,
    #[serde(default)]
    pub kriging: KrigingOptions,
}

fn default_objective() -> Objective {
    Objective::Energy
}

fn default_energy_state() -> EnergyState {
    EnergyState::Damaged
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            objective: default_objective(),
            energy_state: default_energy_state(),
            nsga2: Nsga2Config::default(),
            kriging: KrigingOptions::default(),
        }
    }
}

/// Every random stream of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub vehicles: u64,
    pub roads: u64,
    pub detector: u64,
    pub optimizer: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seeds: Seeds,
    pub scenario: ScenarioConfig,
    pub design: DesignConfig,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub imaging: WsstConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn beam(&self) -> BeamModel {
        BeamModel::reference()
    }

    pub fn vehicle_ranges(&self) -> VehicleRanges {
        self.scenario.vehicle_ranges.unwrap_or_default()
    }

    /// Damaged states in simulation order: the primary one first.
    pub fn damaged_states(&self) -> Vec<DamageState> {
        let mut v = vec![self.scenario.damage];
        for s in &self.scenario.compare_states {
            if !v.contains(s) {
                v.push(*s);
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if s.damage == DamageState::Healthy {
            return Err(config_err("scenario.damage must be a damaged state"));
        }
        if s.compare_states.contains(&DamageState::Healthy) {
            return Err(config_err("scenario.compare_states may not contain HN"));
        }
        let beam = self.beam();
        for st in self.damaged_states() {
            if let Some(c) = st.crack(&beam) {
                c.validate(&beam).map_err(|e| config_err(format!("damage state {st}: {e}")))?;
            }
        }
        let x = s.sensor.fraction();
        if !(x > 0.0 && x < 1.0) {
            return Err(config_err(format!("sensor position {x} must lie strictly inside the span")));
        }
        if !(s.dt > 0.0 && s.dt <= 0.01) {
            return Err(config_err(format!("dt {} outside (0, 0.01] s", s.dt)));
        }
        if !(s.approach >= 0.0) {
            return Err(config_err("approach length must be non-negative"));
        }
        self.vehicle_ranges().validate().map_err(|e| config_err(e.to_string()))?;

        let d = &self.design;
        if d.lengths.is_empty() || d.aspect_ratios.is_empty() {
            return Err(config_err("design grid is empty"));
        }
        let eps = 1e-9;
        for &l in &d.lengths {
            if !(l >= LENGTH_RANGE.0 - eps && l <= LENGTH_RANGE.1 + eps) {
                return Err(config_err(format!("length {l} outside {LENGTH_RANGE:?} m")));
            }
        }
        for &r in &d.aspect_ratios {
            if !(r >= ASPECT_RANGE.0 - eps && r <= ASPECT_RANGE.1 + eps) {
                return Err(config_err(format!("aspect ratio {r} outside {ASPECT_RANGE:?}")));
            }
        }
        if !(d.tip_mass >= 0.0) || !(d.thickness > 0.0) || d.mesh[0] < 4 || d.mesh[1] < 1 {
            return Err(config_err("tip mass ≥ 0, thickness > 0 and mesh ≥ [4, 1] required"));
        }

        let ds = &self.dataset;
        if !(ds.validation_fraction > 0.0 && ds.validation_fraction < 1.0) {
            return Err(config_err("validation_fraction must lie in (0, 1)"));
        }
        if ds.n_validation() < sehs_cvae::detect::MIN_CALIBRATION_IMAGES {
            return Err(config_err(format!(
                "{} validation images; at least {} needed for calibration",
                ds.n_validation(),
                sehs_cvae::detect::MIN_CALIBRATION_IMAGES
            )));
        }
        let batch = self.detector.training.batch_size.max(1);
        if ds.n_train().div_ceil(batch) < 2 {
            return Err(config_err(format!(
                "{} training images give fewer than 2 batches of {batch}",
                ds.n_train()
            )));
        }
        if ds.healthy_test == 0 || ds.damaged_test == 0 {
            return Err(config_err("test sets must be non-empty"));
        }
        if !(0.0..1.0).contains(&ds.max_quarantine_fraction) {
            return Err(config_err("max_quarantine_fraction must lie in [0, 1)"));
        }

        self.imaging.validate().map_err(|e| config_err(e.to_string()))?;
        let det = &self.detector;
        if det.repetitions == 0 {
            return Err(config_err("detector.repetitions must be ≥ 1"));
        }
        if !(0.0..=100.0).contains(&det.percentile) {
            return Err(config_err("detector.percentile must lie in [0, 100]"));
        }
        det.network.validate().map_err(|e| config_err(e.to_string()))?;
        if det.network.input != self.imaging.image_size {
            return Err(config_err(format!(
                "network input {:?} differs from image size {:?}",
                det.network.input, self.imaging.image_size
            )));
        }
        let n = &self.optimizer.nsga2;
        if n.population < 8 || n.population % 2 != 0 {
            return Err(config_err("optimizer population must be even and ≥ 8"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_network_table_uses_per_pixel_kl_weight() {
        let d = DetectorConfig::default();
        assert_eq!(d.network.beta_kl, 1.0 / (128.0 * 128.0));
        let parsed: DetectorConfig = toml::from_str("repetitions = 2").unwrap();
        assert_eq!(parsed.network, d.network);
    }

    #[test]
    fn damage_state_round_trip() {
        for s in ["HN", "DMN1", "dmn2", "DQN1", "custom:0.3:0.15"] {
            let d: DamageState = s.parse().unwrap();
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<DamageState>(&json).unwrap(), d);
        }
        assert!("DMN9".parse::<DamageState>().is_err());
    }

    #[test]
    fn named_cracks() {
        let beam = BeamModel::reference();
        assert_eq!(DamageState::Dmn2.crack(&beam).unwrap(), CrackSpec::new(12.5, 0.2));
        assert_eq!(DamageState::Dqn1.crack(&beam).unwrap(), CrackSpec::new(6.25, 0.1));
        assert!(DamageState::Healthy.crack(&beam).is_none());
    }

    #[test]
    fn sensor_parsing() {
        assert_eq!("quarter-span".parse::<SensorLocation>().unwrap(), SensorLocation::QuarterSpan);
        assert_eq!("0.3".parse::<SensorLocation>().unwrap().fraction(), 0.3);
        assert!("top".parse::<SensorLocation>().is_err());
    }
}
