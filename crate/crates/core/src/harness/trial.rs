use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, EventKind, GazeSample, Session, SessionConfig, SessionEvent, Technique};
use crate::geometry::Point2;
use crate::menu::ItemPath;
use crate::synth::{plan_scanpath, Expertise, GazeSynthesizer, NoiseProfile, Slot};

/// Longest time a simulated user keeps trying to open the menu.
pub const START_TIMEOUT_MS: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// A leaf was selected (right or wrong).
    Leaf,
    Cancelled,
    /// The scanpath ended without a leaf selection.
    Incomplete,
    /// The menu never opened.
    NotOpened,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub technique: Technique,
    pub breadth: usize,
    pub depth: usize,
    pub size: f64,
    pub unit: u32,
    pub slot: usize,
    pub repetition: u32,
    pub expertise: Expertise,
    pub seed: u64,
    pub target: Vec<usize>,
    pub bent_class: usize,
    pub selected: Option<Vec<usize>>,
    pub outcome: Outcome,
    pub correct: bool,
    /// Menu opening to completion of the fixation that selected the leaf.
    pub ct_ms: Option<f64>,
    pub open_time_ms: Option<f64>,
    pub events: Vec<SessionEvent<f64>>,
    pub saccade_landings: Vec<Point2<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn structure_name(&self) -> String {
        vec![self.breadth.to_string(); self.depth].join("x")
    }
}

/// A trial record together with the exact samples fed to the decoder.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub record: TrialRecord,
    pub samples: Vec<GazeSample<f64>>,
}

pub fn run_trial(
    config: &SessionConfig<f64>,
    target: &ItemPath,
    repetition: u32,
    expertise: Expertise,
    noise: &NoiseProfile,
    seed: u64,
) -> TrialRecord {
    run_trial_with_samples(config, target, repetition, expertise, noise, seed).record
}

/// Runs one simulated selection.
///
/// The start phase is closed-loop: the simulated user fixates the start
/// button until the decoder reports the menu open, then follows the planned
/// scanpath from that moment. Completion time is measured to the end of the
/// planned fixation during which the leaf was selected, i.e. the moment the
/// user would move on.
pub fn run_trial_with_samples(
    config: &SessionConfig<f64>,
    target: &ItemPath,
    repetition: u32,
    expertise: Expertise,
    noise: &NoiseProfile,
    seed: u64,
) -> TrialRun {
    let mut record = TrialRecord {
        index: 0,
        technique: config.technique,
        breadth: config.menu.breadth,
        depth: config.menu.depth,
        size: config.params.d3_effective_radius,
        unit: 0,
        slot: 0,
        repetition,
        expertise,
        seed,
        target: target.indices.clone(),
        bent_class: target.bent_class,
        selected: None,
        outcome: Outcome::Incomplete,
        correct: false,
        ct_ms: None,
        open_time_ms: None,
        events: Vec::new(),
        saccade_landings: Vec::new(),
        error: None,
    };
    let mut samples = Vec::new();
    if let Err(e) = drive(config, target, expertise, noise, seed, &mut record, &mut samples) {
        record.outcome = Outcome::Error;
        record.correct = false;
        record.error = Some(e.to_string());
    }
    TrialRun { record, samples }
}

fn drive(
    config: &SessionConfig<f64>,
    target: &ItemPath,
    expertise: Expertise,
    noise: &NoiseProfile,
    seed: u64,
    record: &mut TrialRecord,
    samples: &mut Vec<GazeSample<f64>>,
) -> Result<(), EngineError> {
    config.menu.validate_path(target)?;
    let mut session = Session::open(config.clone())?;
    let plan = plan_scanpath(config, target, expertise, &noise.fixation_dwell_ms, seed);
    let mut synth = GazeSynthesizer::new(noise, seed, config.root_center);

    let mut push = |session: &mut Session<f64>, s: GazeSample<f64>, record: &mut TrialRecord| {
        samples.push(s);
        let events = session.feed_sample(s)?;
        record.events.extend(events.into_iter().filter(|e| !e.is_telemetry()));
        Ok::<(), EngineError>(())
    };

    let t_open = loop {
        let s = synth.hold_sample();
        push(&mut session, s, record)?;
        if session.is_menu_open() {
            break s.t;
        }
        if s.t > config.dwell_ms + START_TIMEOUT_MS {
            record.outcome = Outcome::NotOpened;
            return Ok(());
        }
    };
    record.open_time_ms = Some(t_open);
    synth.set_clock(t_open);

    let mut slots: Vec<Slot> = Vec::new();
    let mut buf = Vec::new();
    'plan: for (i, fixation) in plan.fixations.iter().enumerate() {
        buf.clear();
        slots.push(synth.execute(i, fixation, &mut buf));
        for &s in &buf {
            push(&mut session, s, record)?;
            if session.is_closed() {
                break 'plan;
            }
        }
    }
    let t_close = session.last_time().unwrap_or(t_open);
    record.saccade_landings =
        synth.landings().iter().filter(|l| l.t_start <= t_close).map(|l| l.point).collect();

    for e in &record.events {
        match &e.kind {
            EventKind::LeafSelected { path } => {
                record.outcome = Outcome::Leaf;
                record.correct = *path == target.indices;
                record.selected = Some(path.clone());
                let slot = slots.iter().find(|s| e.t >= s.t_start && e.t < s.t_end).or(slots.last());
                record.ct_ms = slot.map(|s| s.t_end - t_open);
            }
            EventKind::Cancelled => record.outcome = Outcome::Cancelled,
            _ => {}
        }
    }
    Ok(())
}
