use std::collections::BTreeSet;

use lattice_core::harness::experiment::execute;
use lattice_core::harness::*;
use lattice_core::menu::MenuSpec;
use lattice_core::synth::{plan_scanpath, Expertise, NoiseProfile};
use lattice_core::Technique;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn noiseless() -> ExperimentConfig {
    ExperimentConfig {
        master_seed: 5,
        techniques: Technique::ALL.to_vec(),
        noise: NoiseProfile::noiseless(),
        ..Default::default()
    }
}

#[test]
fn zero_noise_ct_is_the_closed_form_sum() {
    let c = noiseless();
    let records = run_experiment(&c, None).unwrap();
    assert!(records.iter().all(|r| r.correct));
    for r in records.iter().filter(|r| r.technique == Technique::Lattice && r.expertise == Expertise::Experienced) {
        let menu = MenuSpec::build(r.breadth, r.depth, 0, false).unwrap();
        let session = c.session_config(r.technique, menu, r.size);
        let plan = plan_scanpath(&session, &r.target.clone().into(), r.expertise, &c.noise.fixation_dwell_ms, r.seed);
        assert!((r.ct_ms.unwrap() - plan.noiseless_duration_ms(&c.noise)).abs() < 1e-9, "{r:?}");
        if r.bent_class == 0 && r.size == 10.0 {
            assert_eq!(r.ct_ms, Some(1329.0));
        }
    }
}

#[test]
fn logs_are_byte_identical_for_one_seed() {
    let c = ExperimentConfig { master_seed: 9, ..Default::default() };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    run_experiment(&c, Some(&mut a)).unwrap();
    run_experiment(&c, Some(&mut b)).unwrap();
    assert_eq!(a, b);
    let mut other = Vec::new();
    run_experiment(&ExperimentConfig { master_seed: 10, ..c }, Some(&mut other)).unwrap();
    assert_ne!(a, other);
}

#[test]
fn trials_scale_multiplies_trials_with_disjoint_seeds() {
    let c = ExperimentConfig { trials_scale: 10, techniques: vec![Technique::Lattice], ..Default::default() };
    let s = schedule(&c).unwrap();
    assert_eq!(s.len(), 10 * 384);
    let seeds: BTreeSet<u64> = s.iter().map(|t| t.seed).collect();
    assert_eq!(seeds.len(), s.len());
}

#[test]
fn summaries_ignore_record_order() {
    let c = ExperimentConfig { master_seed: 3, ..Default::default() };
    let mut records = run_experiment(&c, None).unwrap();
    let before = (summarize(&records), dispersion_table(&records));
    records.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
    assert_eq!(before, (summarize(&records), dispersion_table(&records)));
}

#[test]
fn more_noise_spreads_landings() {
    let run = |k: f64| {
        let c = ExperimentConfig {
            master_seed: 4,
            trials_scale: 4,
            noise: NoiseProfile::default().with_scale(k),
            ..Default::default()
        };
        dispersion_table(&run_experiment(&c, None).unwrap())
    };
    let (one, two) = (run(1.0), run(2.0));
    for (a, b) in one.iter().zip(&two) {
        assert!(a.dispersion.unwrap() < b.dispersion.unwrap(), "{a:?} {b:?}");
    }
}

#[test]
fn training_repetition_is_planned_as_experienced() {
    let c = ExperimentConfig { master_seed: 2, noise: NoiseProfile::noiseless(), ..Default::default() };
    let spec = schedule(&c).unwrap().into_iter().find(|s| s.repetition == 2).unwrap();
    let training = execute(&c, &spec);
    let next = execute(&c, &TrialSpec { repetition: 3, ..spec });
    assert_eq!(training.expertise, Expertise::Training);
    assert_eq!(training.ct_ms, next.ct_ms);
}
