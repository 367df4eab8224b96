use std::io::Write;

use rayon::prelude::*;

use super::config::{ConfigError, ExperimentConfig, Structure};
use super::trial::{run_trial, TrialRecord};
use crate::engine::Technique;
use crate::menu::{ItemPath, MenuSpec};
use crate::seed;
use crate::synth::Expertise;

/// Trials evaluated in parallel before their records are written out.
const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub index: u64,
    pub technique: Technique,
    pub structure: usize,
    pub size: f64,
    pub unit: u32,
    pub slot: usize,
    pub repetition: u32,
    pub target: ItemPath,
    pub seed: u64,
}

/// Seed of one trial. Technique is deliberately not part of the key, so
/// techniques are compared on identical noise draws.
pub fn trial_seed(master: u64, breadth: usize, depth: usize, size: f64, unit: u32, slot: usize, repetition: u32) -> u64 {
    seed::derive(
        master,
        &[seed::domain::TRIAL, breadth as u64, depth as u64, size.to_bits(), unit as u64, slot as u64, repetition as u64],
    )
}

/// Target paths of sampling unit `unit`; shared by all techniques and sizes.
pub fn unit_paths(config: &ExperimentConfig, structure: &Structure, unit: u32) -> Result<Vec<ItemPath>, ConfigError> {
    let menu = MenuSpec::build(structure.breadth, structure.depth, 0, config.back_reserved)?;
    let s = seed::derive(
        config.master_seed,
        &[seed::domain::PATHS, structure.breadth as u64, structure.depth as u64, unit as u64],
    );
    Ok(menu.sample_target_paths(&structure.mix_map(), s, config.exclude_reversals)?)
}

/// Full factorial schedule in canonical order: technique, structure, size,
/// unit, path slot, repetition.
pub fn schedule(config: &ExperimentConfig) -> Result<Vec<TrialSpec>, ConfigError> {
    let mut paths = Vec::new();
    for structure in &config.structures {
        let units: Result<Vec<_>, _> = (0..config.trials_scale).map(|u| unit_paths(config, structure, u)).collect();
        paths.push(units?);
    }
    let mut out = Vec::with_capacity(config.trial_count());
    for &technique in &config.techniques {
        for (si, structure) in config.structures.iter().enumerate() {
            for &size in &config.sizes {
                for (unit, unit_paths) in paths[si].iter().enumerate() {
                    for (slot, target) in unit_paths.iter().enumerate() {
                        for repetition in 1..=config.repetitions {
                            out.push(TrialSpec {
                                index: out.len() as u64,
                                technique,
                                structure: si,
                                size,
                                unit: unit as u32,
                                slot,
                                repetition,
                                target: target.clone(),
                                seed: trial_seed(
                                    config.master_seed,
                                    structure.breadth,
                                    structure.depth,
                                    size,
                                    unit as u32,
                                    slot,
                                    repetition,
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn menu_for(config: &ExperimentConfig, structure: &Structure, unit: u32) -> MenuSpec {
    let label_seed =
        seed::derive(config.master_seed, &[seed::domain::LABELS, structure.breadth as u64, structure.depth as u64, unit as u64]);
    MenuSpec::build(structure.breadth, structure.depth, label_seed, config.back_reserved).expect("validated structure")
}

pub fn execute(config: &ExperimentConfig, spec: &TrialSpec) -> TrialRecord {
    let structure = &config.structures[spec.structure];
    let session = config.session_config(spec.technique, menu_for(config, structure, spec.unit), spec.size);
    let mut record = run_trial(
        &session,
        &spec.target,
        spec.repetition,
        Expertise::for_repetition(spec.repetition),
        &config.noise,
        spec.seed,
    );
    record.index = spec.index;
    record.unit = spec.unit;
    record.slot = spec.slot;
    record
}

/// Runs every trial of `config` in parallel. When `sink` is given, records
/// are streamed to it as JSON Lines in index order while the run progresses.
pub fn run_experiment(config: &ExperimentConfig, mut sink: Option<&mut dyn Write>) -> Result<Vec<TrialRecord>, ConfigError> {
    config.validate()?;
    let specs = schedule(config)?;
    let mut records = Vec::with_capacity(specs.len());
    for chunk in specs.chunks(CHUNK) {
        let done: Vec<TrialRecord> = chunk.par_iter().map(|s| execute(config, s)).collect();
        if let Some(w) = sink.as_deref_mut() {
            for r in &done {
                serde_json::to_writer(&mut *w, r).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        records.extend(done);
    }
    Ok(records)
}

/// Serial reference implementation used to check order invariance.
pub fn run_experiment_serial(config: &ExperimentConfig) -> Result<Vec<TrialRecord>, ConfigError> {
    config.validate()?;
    Ok(schedule(config)?.iter().map(|s| execute(config, s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::NoiseProfile;
    use std::collections::BTreeSet;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 11,
            sizes: vec![10.0],
            structures: vec![Structure::new(4, 2, vec![1, 3])],
            ..Default::default()
        }
    }

    #[test]
    fn schedule_covers_the_factorial_grid() {
        let c = ExperimentConfig { trials_scale: 2, ..ExperimentConfig::default() };
        let s = schedule(&c).unwrap();
        assert_eq!(s.len(), 2 * 768);
        assert!(s.iter().enumerate().all(|(i, t)| t.index == i as u64));
        let seeds: BTreeSet<u64> = s.iter().filter(|t| t.technique == Technique::Lattice).map(|t| t.seed).collect();
        assert_eq!(seeds.len(), s.len() / 2);
    }

    #[test]
    fn units_resample_paths() {
        let c = ExperimentConfig::default();
        let a = unit_paths(&c, &c.structures[0], 0).unwrap();
        let b = unit_paths(&c, &c.structures[0], 1).unwrap();
        assert_eq!(a.len(), 16);
        assert_ne!(a, b);
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let c = small();
        let mut buf = Vec::new();
        let par = run_experiment(&c, Some(&mut buf)).unwrap();
        assert_eq!(par, run_experiment_serial(&c).unwrap());
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), par.len());
    }

    #[test]
    fn filtering_techniques_keeps_trial_seeds() {
        let c = small();
        let only = ExperimentConfig { techniques: vec![Technique::BorderPie], ..small() };
        let full = run_experiment(&c, None).unwrap();
        let part = run_experiment(&only, None).unwrap();
        let full_pie: Vec<u64> = full.iter().filter(|r| r.technique == Technique::BorderPie).map(|r| r.seed).collect();
        assert_eq!(full_pie, part.iter().map(|r| r.seed).collect::<Vec<_>>());
    }

    #[test]
    fn zero_noise_run_is_error_free() {
        let c = ExperimentConfig { noise: NoiseProfile::noiseless(), ..small() };
        assert!(run_experiment(&c, None).unwrap().iter().all(|r| r.correct));
    }
}
