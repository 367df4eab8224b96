//! Error rate of novice Lattice trials as a function of the distance between
//! labels and selection zones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig, Structure};
use super::experiment::{trial_seed, unit_paths};
use super::trial::run_trial;
use crate::engine::Technique;
use crate::menu::MenuSpec;
use crate::seed;
use crate::synth::{Expertise, NoiseProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub master_seed: u64,
    pub margins: Vec<f64>,
    pub size: f64,
    /// Path sampling units per margin; each unit draws one path mix.
    pub units: u32,
    pub structure: Structure,
    pub noise: NoiseProfile,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            margins: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            size: 10.0,
            units: 125,
            structure: Structure::standard(4),
            noise: NoiseProfile::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub margin: f64,
    pub trials: usize,
    pub errors: usize,
    pub er: f64,
}

/// Every margin sees the same targets and noise seeds, so differences between
/// rows come from the layout alone.
pub fn distance_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, ConfigError> {
    let master = seed::derive(config.master_seed, &[seed::domain::SWEEP]);
    let base = ExperimentConfig {
        master_seed: master,
        techniques: vec![Technique::Lattice],
        structures: vec![config.structure.clone()],
        sizes: vec![config.size],
        noise: config.noise,
        ..Default::default()
    };
    base.validate()?;
    let s = &config.structure;
    let mut jobs = Vec::new();
    for unit in 0..config.units {
        for (slot, target) in unit_paths(&base, s, unit)?.into_iter().enumerate() {
            jobs.push((unit, slot, target));
        }
    }
    let menu = MenuSpec::build(s.breadth, s.depth, master, false)?;
    config
        .margins
        .iter()
        .map(|&margin| {
            let exp = ExperimentConfig { label_margin: margin, ..base.clone() };
            if let Err(e) = exp.validate() {
                return Err(e);
            }
            let session = exp.session_config(Technique::Lattice, menu.clone(), config.size);
            let errors = jobs
                .par_iter()
                .filter(|(unit, slot, target)| {
                    let seed = trial_seed(master, s.breadth, s.depth, config.size, *unit, *slot, 1);
                    !run_trial(&session, target, 1, Expertise::Novice, &config.noise, seed).correct
                })
                .count();
            Ok(SweepRow { margin, trials: jobs.len(), errors, er: errors as f64 / jobs.len() as f64 })
        })
        .collect()
}
