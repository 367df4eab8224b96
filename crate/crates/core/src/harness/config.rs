use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{SessionConfig, Technique, UnfoldMode};
use crate::geometry::{validate_layout, LayoutParams, Violation, MIN_LABEL_ZONE_DISTANCE};
use crate::menu::{MenuError, MenuSpec};
use crate::synth::NoiseProfile;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("layout {structure} at d3={size}: {violations:?}")]
    Layout { structure: String, size: f64, violations: Vec<Violation> },
    #[error(transparent)]
    Menu(#[from] MenuError),
}

/// A menu shape plus the number of target paths drawn per bent class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub breadth: usize,
    pub depth: usize,
    /// `path_mix[c]` paths with `c` bends are drawn per sampling unit.
    pub path_mix: Vec<usize>,
}

impl Structure {
    pub fn new(breadth: usize, depth: usize, path_mix: Vec<usize>) -> Self {
        Self { breadth, depth, path_mix }
    }

    /// The 16-path mixes used for the 4x4x4 and 6x6x6 grids.
    pub fn standard(breadth: usize) -> Self {
        let mix = if breadth == 6 { vec![1, 4, 11] } else { vec![1, 6, 9] };
        Self::new(breadth, 3, mix)
    }

    pub fn name(&self) -> String {
        vec![self.breadth.to_string(); self.depth].join("x")
    }

    pub fn paths_per_unit(&self) -> usize {
        self.path_mix.iter().sum()
    }

    pub fn mix_map(&self) -> BTreeMap<usize, usize> {
        self.path_mix.iter().copied().enumerate().filter(|&(_, n)| n > 0).collect()
    }

    /// Parses `BxBxB` (depth = number of factors).
    pub fn parse_name(s: &str) -> Option<(usize, usize)> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        let breadth: usize = parts.first()?.trim().parse().ok()?;
        if parts.iter().any(|p| p.trim().parse::<usize>().ok() != Some(breadth)) {
            return None;
        }
        Some((breadth, parts.len()))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn default_techniques() -> Vec<Technique> {
    vec![Technique::Lattice, Technique::BorderPie]
}

fn default_structures() -> Vec<Structure> {
    vec![Structure::standard(4), Structure::standard(6)]
}

fn default_sizes() -> Vec<f64> {
    vec![8.0, 10.0, 12.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub techniques: Vec<Technique>,
    pub sizes: Vec<f64>,
    pub repetitions: u32,
    /// Number of independent path samples (units) per structure.
    pub trials_scale: u32,
    pub mode: UnfoldMode,
    pub back_reserved: bool,
    pub exclude_reversals: bool,
    pub label_margin: f64,
    pub structures: Vec<Structure>,
    pub noise: NoiseProfile,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            techniques: default_techniques(),
            sizes: default_sizes(),
            repetitions: 4,
            trials_scale: 1,
            mode: UnfoldMode::Progressive,
            back_reserved: false,
            exclude_reversals: true,
            label_margin: MIN_LABEL_ZONE_DISTANCE,
            structures: default_structures(),
            noise: NoiseProfile::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn layout(&self, size: f64) -> LayoutParams<f64> {
        LayoutParams::for_size(size).with_label_margin(self.label_margin)
    }

    pub fn session_config(&self, technique: Technique, menu: MenuSpec, size: f64) -> SessionConfig<f64> {
        SessionConfig::new(technique, menu, self.layout(size)).with_mode(self.mode)
    }

    /// Trials per full run.
    pub fn trial_count(&self) -> usize {
        let per_structure: usize = self.structures.iter().map(Structure::paths_per_unit).sum();
        self.techniques.len() * self.sizes.len() * per_structure * self.trials_scale as usize * self.repetitions as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.repetitions < 2 {
            return invalid(format!("repetitions must be at least 2, got {}", self.repetitions));
        }
        if self.trials_scale == 0 {
            return invalid("trials_scale must be positive".into());
        }
        if self.techniques.is_empty() || self.structures.is_empty() || self.sizes.is_empty() {
            return invalid("techniques, structures and sizes must be non-empty".into());
        }
        self.noise.validate().map_err(ConfigError::Invalid)?;
        for structure in &self.structures {
            if structure.path_mix.len() > structure.depth {
                return invalid(format!("{structure}: path_mix has more classes than depth {}", structure.depth));
            }
            let menu = MenuSpec::build(structure.breadth, structure.depth, 0, self.back_reserved)?;
            menu.sample_target_paths(&structure.mix_map(), 0, self.exclude_reversals)?;
            for &size in &self.sizes {
                let violations: Vec<Violation> =
                    validate_layout(&self.layout(size), structure.breadth).into_iter().filter(Violation::is_fatal).collect();
                if !violations.is_empty() {
                    return Err(ConfigError::Layout { structure: structure.name(), size, violations });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_the_study_size() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.trial_count(), 2 * 2 * 3 * 16 * 4);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ExperimentConfig { master_seed: 7, trials_scale: 3, ..Default::default() };
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);

        let partial = ExperimentConfig::from_toml(
            "master_seed = 3\ntechniques = [\"lattice\"]\n[[structures]]\nbreadth = 4\ndepth = 2\npath_mix = [1, 3]\n[noise]\nnoise_scale = 0.0\n",
        )
        .unwrap();
        assert_eq!(partial.structures[0].name(), "4x4");
        assert_eq!(partial.noise.noise_scale, 0.0);
        assert_eq!(partial.sizes, vec![8.0, 10.0, 12.0]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("repetitions = 1").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("sizes = [3.0]").is_err());
        let exhausted = "[[structures]]\nbreadth = 4\ndepth = 3\npath_mix = [0, 0, 200]\n";
        assert!(matches!(ExperimentConfig::from_toml(exhausted), Err(ConfigError::Menu(_))));
    }

    #[test]
    fn structure_names_parse() {
        assert_eq!(Structure::parse_name("4x4x4"), Some((4, 3)));
        assert_eq!(Structure::parse_name("6X6"), Some((6, 2)));
        assert_eq!(Structure::parse_name("4x6"), None);
        assert_eq!(Structure::standard(6).mix_map(), BTreeMap::from([(0, 1), (1, 4), (2, 11)]));
    }
}
