//! Configurations shipped with the tool.

use crate::{ExperimentConfig, PipelineError, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("desk", include_str!("../../../configs/desk.toml")),
    ("full", include_str!("../../../configs/full.toml")),
    ("desk-road-b", include_str!("../../../configs/desk-road-b.toml")),
    ("desk-road-nr", include_str!("../../../configs/desk-road-nr.toml")),
    ("desk-quarter-dqn1", include_str!("../../../configs/desk-quarter-dqn1.toml")),
    ("desk-severity", include_str!("../../../configs/desk-severity.toml")),
    ("desk-quarter-sensor", include_str!("../../../configs/desk-quarter-sensor.toml")),
    ("desk-dqn1-road-b", include_str!("../../../configs/desk-dqn1-road-b.toml")),
    ("desk-two-parameter", include_str!("../../../configs/desk-two-parameter.toml")),
    ("desk-energy-per-area", include_str!("../../../configs/desk-energy-per-area.toml")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| PipelineError::Config(format!("unknown preset '{name}' (one of {})", names().join(", "))))?;
    ExperimentConfig::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::per_pixel_kl_weight;

    #[test]
    fn every_preset_parses() {
        for name in names() {
            let cfg = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(cfg, again, "{name}");
            assert_eq!(cfg.detector.network.beta_kl, per_pixel_kl_weight(&cfg.detector.network), "{name}");
        }
    }
}
