//! Landing dispersion: how tightly saccade landings follow the ideal path.
//!
//! For one trial the ideal path is the polyline root → anchor₁ → … →
//! anchor_depth. Each landing contributes its distance to that polyline
//! divided by d3; the measure of a condition is the mean over all landings of
//! its Experienced trials.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::summary::{by_index, mean_sd, ConditionKey};
use super::trial::TrialRecord;
use crate::engine::Technique;
use crate::geometry::{lattice_points, polyline_distance, LayoutParams, Point2};
use crate::synth::Expertise;

/// Root center used by the simulation harness.
pub const ROOT: Point2<f64> = Point2 { x: 0.0, y: 0.0 };

pub fn ideal_polyline(r: &TrialRecord) -> Vec<Point2<f64>> {
    let params = LayoutParams::for_size(r.size);
    let mut v = vec![ROOT];
    v.extend(lattice_points(ROOT, &r.target, r.breadth, &params).unwrap_or_default());
    v
}

/// Normalized distances of every landing in `r`.
pub fn landing_distances(r: &TrialRecord) -> Vec<f64> {
    let poly = ideal_polyline(r);
    r.saccade_landings.iter().map(|&p| polyline_distance(p, &poly) / r.size).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub technique: Technique,
    pub structure: String,
    pub size: f64,
    pub trials: usize,
    pub landings: usize,
    pub dispersion: Option<f64>,
    /// Mean and SD of per-trial means, for between-condition tests.
    pub trial_mean: Option<f64>,
    pub trial_sd: Option<f64>,
}

#[derive(Default)]
struct Acc {
    trials: usize,
    sum: f64,
    landings: usize,
    per_trial: Vec<f64>,
}

pub fn dispersion_table(records: &[TrialRecord]) -> Vec<DispersionRow> {
    let mut groups: BTreeMap<ConditionKey, Acc> = BTreeMap::new();
    for r in by_index(records) {
        let acc = groups.entry(ConditionKey::of(r)).or_default();
        if r.expertise != Expertise::Experienced {
            continue;
        }
        acc.trials += 1;
        let d = landing_distances(r);
        if !d.is_empty() {
            acc.sum += d.iter().sum::<f64>();
            acc.landings += d.len();
            acc.per_trial.push(d.iter().sum::<f64>() / d.len() as f64);
        }
    }
    groups
        .into_iter()
        .map(|(key, acc)| {
            let (trial_mean, trial_sd) = mean_sd(&acc.per_trial);
            DispersionRow {
                technique: key.technique,
                structure: key.structure(),
                size: key.size(),
                trials: acc.trials,
                landings: acc.landings,
                dispersion: (acc.landings > 0).then(|| acc.sum / acc.landings as f64),
                trial_mean,
                trial_sd,
            }
        })
        .collect()
}

/// Dispersion of the Experienced trials matching `key`.
pub fn dispersion(records: &[TrialRecord], key: &ConditionKey) -> Option<f64> {
    let (sum, n) = by_index(records)
        .into_iter()
        .filter(|r| r.expertise == Expertise::Experienced && ConditionKey::of(r) == *key)
        .flat_map(landing_distances)
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, Structure};
    use crate::harness::experiment::run_experiment;
    use crate::synth::NoiseProfile;

    #[test]
    fn zero_noise_lattice_dispersion_is_zero() {
        let c = ExperimentConfig {
            techniques: vec![Technique::Lattice],
            structures: vec![Structure::standard(4)],
            noise: NoiseProfile::noiseless(),
            ..Default::default()
        };
        let records = run_experiment(&c, None).unwrap();
        for row in dispersion_table(&records) {
            assert_eq!(row.dispersion, Some(0.0), "{row:?}");
        }
        assert_eq!(dispersion(&records, &ConditionKey::new(Technique::Lattice, 4, 3, 10.0)), Some(0.0));
        assert_eq!(dispersion(&records, &ConditionKey::new(Technique::BorderPie, 4, 3, 10.0)), None);
    }

    #[test]
    fn landing_on_the_path_is_zero_off_path_is_normalized() {
        let c = ExperimentConfig::default();
        let mut r = crate::harness::experiment::execute(&c, &crate::harness::experiment::schedule(&c).unwrap()[0]);
        r.size = 10.0;
        r.target = vec![0, 0, 0];
        r.breadth = 4;
        r.saccade_landings = vec![Point2::new(0.0, 5.0), Point2::new(2.0, 25.0)];
        assert_eq!(landing_distances(&r), vec![0.0, 0.2]);
    }
}
