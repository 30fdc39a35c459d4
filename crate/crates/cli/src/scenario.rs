//! Built-in experiment configurations.

use crate::config::ExperimentConfig;
use crate::{CliError, Result};

const SCENARIOS: &[(&str, &str)] = &[
    ("comb2", include_str!("../scenarios/comb2.toml")),
    ("comb_kernels", include_str!("../scenarios/comb_kernels.toml")),
    ("comb_count", include_str!("../scenarios/comb_count.toml")),
    ("double_gaussian", include_str!("../scenarios/double_gaussian.toml")),
    ("ee_localized", include_str!("../scenarios/ee_localized.toml")),
    ("ee_delocalized", include_str!("../scenarios/ee_delocalized.toml")),
    ("gaussian_width", include_str!("../scenarios/gaussian_width.toml")),
    ("offset_localized", include_str!("../scenarios/offset_localized.toml")),
    ("offset_delocalized", include_str!("../scenarios/offset_delocalized.toml")),
    ("thermal", include_str!("../scenarios/thermal.toml")),
    ("squeezed", include_str!("../scenarios/squeezed.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(n, _)| *n)
}

/// Raw TOML of a built-in scenario.
pub fn source(name: &str) -> Result<&'static str> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| CliError::UnknownScenario(name.to_string()))
}

pub fn builtin(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(source(name)?)
}
