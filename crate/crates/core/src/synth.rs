//! Synthetic gaze generation.
//!
//! A [`Scanpath`] lists the fixation targets a simulated user visits; the
//! [`GazeSynthesizer`] turns it into a 2D sample stream with an oculomotor
//! noise model:
//!
//! * fixations: Gaussian jitter around the true eye position,
//! * saccades: main-sequence duration `base + slope * amplitude`, minimum-jerk
//!   position profile, Gaussian landing error proportional to amplitude,
//! * one corrective saccade when the landing error exceeds a threshold,
//! * a constant per-trial tracker bias added to every reported sample.
//!
//! Saccades toward targets without a visual marker (border-exit points) use
//! endpoint noise multiplied by `untargeted_gain`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::{GazeSample, SessionConfig, Technique};
use crate::geometry::{anchor_position, label_position, Point2};
use crate::menu::ItemPath;
use crate::seed;

type Point = Point2<f64>;

/// Overshoot past the selection border planned for border-crossing gestures.
pub const BORDER_EXIT_OVERSHOOT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationDwell {
    pub novice_label_read: f64,
    pub experienced_anchor: f64,
    pub initial: f64,
}

impl Default for FixationDwell {
    fn default() -> Self {
        Self { novice_label_read: 300.0, experienced_anchor: 300.0, initial: 300.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseProfile {
    pub sample_rate_hz: f64,
    /// Per-axis SD of fixation jitter, degrees.
    pub fixation_jitter_sd: f64,
    /// Landing error SD as a fraction of saccade amplitude.
    pub endpoint_noise_coeff: f64,
    /// Amplitude-independent landing error SD, degrees.
    pub endpoint_noise_floor: f64,
    /// Radius of the disk the per-trial tracker bias is drawn from.
    pub tracker_bias_max: f64,
    /// Fixed tracker bias used instead of a random draw.
    pub tracker_bias: Option<Point>,
    pub saccade_base_ms: f64,
    pub saccade_ms_per_deg: f64,
    pub corrective_threshold: f64,
    pub corrective_latency_ms: f64,
    pub fixation_dwell_ms: FixationDwell,
    /// Endpoint noise multiplier for saccades toward unmarked locations.
    pub untargeted_gain: f64,
    /// Global multiplier on jitter, endpoint noise and bias.
    pub noise_scale: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            sample_rate_hz: 120.0,
            fixation_jitter_sd: 0.3,
            endpoint_noise_coeff: 0.05,
            endpoint_noise_floor: 0.1,
            tracker_bias_max: 1.0,
            tracker_bias: None,
            saccade_base_ms: 21.0,
            saccade_ms_per_deg: 2.2,
            corrective_threshold: 1.5,
            corrective_latency_ms: 150.0,
            fixation_dwell_ms: FixationDwell::default(),
            untargeted_gain: 3.0,
            noise_scale: 1.0,
        }
    }
}

impl NoiseProfile {
    pub fn noiseless() -> Self {
        Self { noise_scale: 0.0, ..Self::default() }
    }

    pub fn with_scale(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn saccade_duration_ms(&self, amplitude: f64) -> f64 {
        self.saccade_base_ms + self.saccade_ms_per_deg * amplitude
    }

    pub fn sample_period_ms(&self) -> f64 {
        1000.0 / self.sample_rate_hz
    }

    /// Per-axis landing error SD for a saccade of `amplitude` degrees.
    pub fn endpoint_sd(&self, amplitude: f64, marked: bool) -> f64 {
        let gain = if marked { 1.0 } else { self.untargeted_gain };
        self.noise_scale * (self.endpoint_noise_coeff * amplitude + self.endpoint_noise_floor) * gain
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("sample_rate_hz", self.sample_rate_hz),
            ("saccade_base_ms", self.saccade_base_ms),
            ("corrective_latency_ms", self.corrective_latency_ms),
            ("fixation_dwell_ms.novice_label_read", self.fixation_dwell_ms.novice_label_read),
            ("fixation_dwell_ms.experienced_anchor", self.fixation_dwell_ms.experienced_anchor),
            ("fixation_dwell_ms.initial", self.fixation_dwell_ms.initial),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("noise_scale", self.noise_scale),
            ("fixation_jitter_sd", self.fixation_jitter_sd),
            ("endpoint_noise_coeff", self.endpoint_noise_coeff),
            ("endpoint_noise_floor", self.endpoint_noise_floor),
            ("tracker_bias_max", self.tracker_bias_max),
            ("saccade_ms_per_deg", self.saccade_ms_per_deg),
            ("corrective_threshold", self.corrective_threshold),
            ("untargeted_gain", self.untargeted_gain),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expertise {
    Novice,
    Training,
    Experienced,
}

impl Expertise {
    /// Repetition 1 is a novice trial, 2 is training, 3 and later are
    /// experienced trials.
    pub fn for_repetition(repetition: u32) -> Self {
        match repetition {
            0 | 1 => Expertise::Novice,
            2 => Expertise::Training,
            _ => Expertise::Experienced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixationTag {
    Start,
    LabelRead,
    Anchor,
    BorderExit,
}

impl FixationTag {
    /// Whether the target carries a visible marker the eye can aim at.
    pub fn is_marked(self) -> bool {
        !matches!(self, FixationTag::BorderExit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedFixation {
    pub target: Point,
    pub dwell_ms: f64,
    pub tag: FixationTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scanpath {
    /// Start-button dwell preceding the first fixation.
    pub start_dwell_ms: f64,
    pub fixations: Vec<PlannedFixation>,
}

impl Scanpath {
    pub fn targets(&self) -> Vec<Point> {
        self.fixations.iter().map(|f| f.target).collect()
    }

    /// Planned duration from menu opening to the end of the last fixation
    /// when every saccade lands exactly on target.
    pub fn noiseless_duration_ms(&self, noise: &NoiseProfile) -> f64 {
        let mut eye = match self.fixations.first() {
            Some(f) => f.target,
            None => return 0.0,
        };
        let mut total = 0.0;
        for f in &self.fixations {
            if f.tag != FixationTag::Start {
                total += noise.saccade_duration_ms(f.target.distance(eye));
                eye = f.target;
            }
            total += f.dwell_ms;
        }
        total
    }
}

/// Plans the fixation sequence a simulated user follows to select `target`.
///
/// Experienced users go straight from the start button through each target
/// (the anchor, or a point just beyond the border for border-crossing
/// techniques). Novices first read between one and `breadth - 1` labels per
/// level, always finishing on the target label.
pub fn plan_scanpath(
    config: &SessionConfig<f64>,
    target: &ItemPath,
    expertise: Expertise,
    dwell: &FixationDwell,
    plan_seed: u64,
) -> Scanpath {
    let menu = &config.menu;
    let breadth = menu.breadth;
    let params = &config.params;
    let mut rng = seed::rng(seed::derive(plan_seed, &[seed::domain::PLAN]));
    let mut fixations =
        vec![PlannedFixation { target: config.root_center, dwell_ms: dwell.initial, tag: FixationTag::Start }];
    let mut center = config.root_center;
    for (level, &index) in target.indices.iter().enumerate() {
        let prefix = &target.indices[..level];
        if expertise == Expertise::Novice {
            let mut others: Vec<usize> =
                (0..breadth).filter(|&i| i != index && !menu.is_back_item(prefix, i)).collect();
            let reads = rng.random_range(1..breadth.max(2));
            let extra = (reads - 1).min(others.len());
            rand::seq::SliceRandom::shuffle(others.as_mut_slice(), &mut rng);
            for &i in others.iter().take(extra).chain(std::iter::once(&index)) {
                if let Ok(p) = label_position(center, i, breadth, params) {
                    fixations.push(PlannedFixation {
                        target: p,
                        dwell_ms: dwell.novice_label_read,
                        tag: FixationTag::LabelRead,
                    });
                }
            }
        }
        let anchor = anchor_position(center, index, breadth, params).expect("validated path");
        let (point, tag) = match config.technique {
            Technique::Lattice => (anchor, FixationTag::Anchor),
            Technique::BorderPie | Technique::PEye => {
                let dir = crate::engine::direction::<f64>(index, breadth);
                (center + dir * (params.d3_effective_radius + BORDER_EXIT_OVERSHOOT), FixationTag::BorderExit)
            }
        };
        fixations.push(PlannedFixation { target: point, dwell_ms: dwell.experienced_anchor, tag });
        center = anchor;
    }
    Scanpath { start_dwell_ms: config.dwell_ms, fixations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landing {
    /// Landing point as reported by the tracker (eye position plus bias).
    pub point: Point,
    pub t_start: f64,
    pub t_end: f64,
    pub corrective: bool,
}

/// Time span of one executed scanpath fixation: the saccade into it, any
/// corrective saccade, and the dwell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub fixation: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone)]
pub struct GazeSynthesizer {
    noise: NoiseProfile,
    rng: ChaCha8Rng,
    bias: Point,
    eye: Point,
    clock: f64,
    next_index: u64,
    landings: Vec<Landing>,
}

impl GazeSynthesizer {
    pub fn new(noise: &NoiseProfile, noise_seed: u64, eye: Point) -> Self {
        let mut rng = seed::rng(seed::derive(noise_seed, &[seed::domain::NOISE]));
        let k = noise.noise_scale;
        let bias = match noise.tracker_bias {
            Some(b) => b * k,
            None => {
                let radius = noise.tracker_bias_max * k * rng.random::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                Point2::new(radius * theta.cos(), radius * theta.sin())
            }
        };
        Self { noise: *noise, rng, bias, eye, clock: 0.0, next_index: 0, landings: Vec::new() }
    }

    pub fn bias(&self) -> Point {
        self.bias
    }

    pub fn eye(&self) -> Point {
        self.eye
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn landings(&self) -> &[Landing] {
        &self.landings
    }

    fn sample_time(&self, index: u64) -> f64 {
        index as f64 * 1000.0 / self.noise.sample_rate_hz
    }

    fn gaussian(&mut self, sd: f64) -> f64 {
        if sd > 0.0 {
            Normal::new(0.0, sd).expect("finite sd").sample(&mut self.rng)
        } else {
            0.0
        }
    }

    fn fixation_point(&mut self) -> Point {
        let sd = self.noise.fixation_jitter_sd * self.noise.noise_scale;
        let jitter = Point2::new(self.gaussian(sd), self.gaussian(sd));
        self.eye + self.bias + jitter
    }

    /// Emits the next sample while the eye holds still and moves the clock to
    /// its timestamp. Used to wait for external state such as the menu opening.
    pub fn hold_sample(&mut self) -> GazeSample<f64> {
        let t = self.sample_time(self.next_index);
        self.next_index += 1;
        self.clock = self.clock.max(t);
        GazeSample::new(t, self.fixation_point())
    }

    /// Re-anchors the continuous clock, e.g. at the moment the menu opened.
    pub fn set_clock(&mut self, t: f64) {
        self.clock = t;
    }

    /// Holds the eye still for `duration_ms`.
    pub fn fixate(&mut self, duration_ms: f64, out: &mut Vec<GazeSample<f64>>) {
        let end = self.clock + duration_ms;
        while self.sample_time(self.next_index) < end {
            if self.sample_time(self.next_index) < self.clock {
                self.next_index += 1;
                continue;
            }
            let t = self.sample_time(self.next_index);
            self.next_index += 1;
            let p = self.fixation_point();
            out.push(GazeSample::new(t, p));
        }
        self.clock = end;
    }

    /// Saccade toward `target`; returns the true landing error (retinal error).
    pub fn saccade(&mut self, target: Point, marked: bool, corrective: bool, out: &mut Vec<GazeSample<f64>>) -> f64 {
        let from = self.eye;
        let sd = self.noise.endpoint_sd(target.distance(from), marked);
        let landing = target + Point2::new(self.gaussian(sd), self.gaussian(sd));
        let duration = self.noise.saccade_duration_ms(landing.distance(from));
        let start = self.clock;
        let end = start + duration;
        while self.sample_time(self.next_index) < end {
            let t = self.sample_time(self.next_index);
            self.next_index += 1;
            if t < start {
                continue;
            }
            let tau = (t - start) / duration;
            let s = tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
            out.push(GazeSample::new(t, from.lerp(landing, s) + self.bias));
        }
        self.eye = landing;
        self.clock = end;
        self.landings.push(Landing { point: landing + self.bias, t_start: start, t_end: end, corrective });
        landing.distance(target)
    }

    /// Executes one planned fixation and returns its time slot.
    pub fn execute(&mut self, index: usize, fixation: &PlannedFixation, out: &mut Vec<GazeSample<f64>>) -> Slot {
        let t_start = self.clock;
        if fixation.tag != FixationTag::Start {
            let marked = fixation.tag.is_marked();
            let error = self.saccade(fixation.target, marked, false, out);
            if error > self.noise.corrective_threshold {
                self.fixate(self.noise.corrective_latency_ms, out);
                self.saccade(fixation.target, marked, true, out);
            }
        }
        self.fixate(fixation.dwell_ms, out);
        Slot { fixation: index, t_start, t_end: self.clock }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTrace {
    pub samples: Vec<GazeSample<f64>>,
    pub slots: Vec<Slot>,
    pub landings: Vec<Landing>,
    pub bias: Point,
    /// Time at which the start-button dwell completes.
    pub open_time_ms: f64,
}

/// Open-loop synthesis: holds the start button for the scanpath's start dwell
/// (including the sample that completes it), then executes every fixation.
pub fn synthesize(scanpath: &Scanpath, noise: &NoiseProfile, noise_seed: u64) -> SynthTrace {
    let start = scanpath.fixations.first().map_or(Point2::origin(), |f| f.target);
    let mut synth = GazeSynthesizer::new(noise, noise_seed, start);
    let mut samples = Vec::new();
    loop {
        let s = synth.hold_sample();
        let done = s.t >= scanpath.start_dwell_ms;
        samples.push(s);
        if done {
            break;
        }
    }
    let open_time_ms = synth.clock();
    let slots = scanpath.fixations.iter().enumerate().map(|(i, f)| synth.execute(i, f, &mut samples)).collect();
    SynthTrace { samples, slots, landings: synth.landings, bias: synth.bias, open_time_ms }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    /// Mean of the per-point mean offsets.
    pub estimated_bias: Point,
    /// Mean magnitude of the per-point mean offsets.
    pub mean_error: f64,
    pub pass: bool,
}

pub const SCREEN_THRESHOLD_DEG: f64 = 2.0;

/// Nine-point accuracy screen on a 3x3 grid spanning ±10°: the user fixates
/// each point for `samples_per_point` samples and the tracker reports them
/// with the trial bias and jitter. Passes when the mean offset magnitude is
/// at most 2°.
pub fn nine_point_screen(noise: &NoiseProfile, samples_per_point: usize, screen_seed: u64) -> ScreenResult {
    let mut synth = GazeSynthesizer::new(noise, seed::derive(screen_seed, &[seed::domain::SCREEN]), Point2::origin());
    let mut sum = Point2::origin();
    let mut magnitude = 0.0;
    let grid = [-10.0, 0.0, 10.0];
    for &y in &grid {
        for &x in &grid {
            let target = Point2::new(x, y);
            synth.eye = target;
            let mut acc = Point2::origin();
            for _ in 0..samples_per_point.max(1) {
                acc += synth.hold_sample().p - target;
            }
            let mean = acc * (1.0 / samples_per_point.max(1) as f64);
            sum += mean;
            magnitude += mean.norm();
        }
    }
    let mean_error = magnitude / 9.0;
    ScreenResult { estimated_bias: sum * (1.0 / 9.0), mean_error, pass: mean_error <= SCREEN_THRESHOLD_DEG }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LayoutParams;
    use crate::menu::MenuSpec;

    fn config(technique: Technique) -> SessionConfig<f64> {
        SessionConfig::new(technique, MenuSpec::build(4, 3, 1, false).unwrap(), LayoutParams::for_size(10.0))
    }

    #[test]
    fn experienced_lattice_targets_follow_the_lattice() {
        let plan = plan_scanpath(
            &config(Technique::Lattice),
            &ItemPath::new(vec![0, 0, 0]),
            Expertise::Experienced,
            &FixationDwell::default(),
            1,
        );
        let expected = [(0.0, 0.0), (0.0, 10.0), (0.0, 20.0), (0.0, 30.0)];
        let got = plan.targets();
        assert_eq!(got.len(), 4);
        for (g, (x, y)) in got.iter().zip(expected) {
            assert!(g.distance(Point2::new(x, y)) < 1e-9);
        }
        assert_eq!(plan.noiseless_duration_ms(&NoiseProfile::default()), 1329.0);
    }

    #[test]
    fn border_pie_exit_target_overshoots_by_two_degrees() {
        let menu = MenuSpec::build(4, 1, 1, false).unwrap();
        let cfg = SessionConfig::new(Technique::BorderPie, menu, LayoutParams::for_size(10.0));
        let plan = plan_scanpath(&cfg, &ItemPath::new(vec![0]), Expertise::Experienced, &FixationDwell::default(), 1);
        assert!(plan.fixations[1].target.distance(Point2::new(0.0, 12.0)) < 1e-9);
        assert_eq!(plan.fixations[1].tag, FixationTag::BorderExit);
    }

    #[test]
    fn novices_read_at_least_one_label_per_level() {
        for s in 0..50 {
            let plan = plan_scanpath(
                &config(Technique::Lattice),
                &ItemPath::new(vec![0, 1, 1]),
                Expertise::Novice,
                &FixationDwell::default(),
                s,
            );
            let reads = plan.fixations.iter().filter(|f| f.tag == FixationTag::LabelRead).count();
            assert!((3..=9).contains(&reads), "{reads}");
            // the read right before each anchor is the target label
            for (i, f) in plan.fixations.iter().enumerate() {
                if f.tag == FixationTag::Anchor {
                    let label = plan.fixations[i - 1];
                    assert_eq!(label.tag, FixationTag::LabelRead);
                    assert!(label.target.distance(f.target) < 5.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn noiseless_saccade_lands_on_target() {
        let plan = Scanpath {
            start_dwell_ms: 1000.0,
            fixations: vec![
                PlannedFixation { target: Point2::origin(), dwell_ms: 300.0, tag: FixationTag::Start },
                PlannedFixation { target: Point2::new(0.0, 10.0), dwell_ms: 300.0, tag: FixationTag::Anchor },
            ],
        };
        let trace = synthesize(&plan, &NoiseProfile::noiseless(), 3);
        assert_eq!(trace.landings.len(), 1);
        assert_eq!(trace.landings[0].point, Point2::new(0.0, 10.0));
        assert_eq!(trace.landings[0].t_end - trace.landings[0].t_start, 43.0);
        assert_eq!(trace.open_time_ms, 1000.0);
        assert_eq!(trace.slots[1].t_end, 1000.0 + 300.0 + 43.0 + 300.0);
        assert_eq!(trace.bias, Point2::origin());
    }

    #[test]
    fn timestamps_follow_the_sample_clock() {
        let plan = plan_scanpath(
            &config(Technique::Lattice),
            &ItemPath::new(vec![0, 1, 2]),
            Expertise::Novice,
            &FixationDwell::default(),
            4,
        );
        let trace = synthesize(&plan, &NoiseProfile::default(), 9);
        let period = 1000.0 / 120.0;
        for (k, s) in trace.samples.iter().enumerate() {
            assert!((s.t - k as f64 * period).abs() < 1e-9);
        }
        assert_eq!(trace, synthesize(&plan, &NoiseProfile::default(), 9));
        assert_ne!(trace.samples, synthesize(&plan, &NoiseProfile::default(), 10).samples);
    }

    #[test]
    fn no_correctives_without_noise() {
        for path in [vec![0, 1, 2], vec![3, 3, 0]] {
            for tech in Technique::ALL {
                let plan =
                    plan_scanpath(&config(tech), &ItemPath::new(path.clone()), Expertise::Novice, &FixationDwell::default(), 2);
                let trace = synthesize(&plan, &NoiseProfile::noiseless(), 1);
                assert!(trace.landings.iter().all(|l| !l.corrective));
            }
        }
    }

    #[test]
    fn endpoint_error_grows_with_noise_scale() {
        let mut means = Vec::new();
        for k in [0.5, 1.0, 2.0] {
            let noise = NoiseProfile { tracker_bias_max: 0.0, corrective_threshold: f64::INFINITY, ..NoiseProfile::default() }
                .with_scale(k);
            let mut synth = GazeSynthesizer::new(&noise, 77, Point2::origin());
            let mut sink = Vec::new();
            let mut total = 0.0;
            let n = 10_000;
            for i in 0..n {
                let target = if i % 2 == 0 { Point2::new(10.0, 0.0) } else { Point2::origin() };
                total += synth.saccade(target, true, false, &mut sink);
                sink.clear();
            }
            means.push(total / n as f64);
        }
        assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    }

    #[test]
    fn screening_examples() {
        let exact = NoiseProfile {
            fixation_jitter_sd: 0.0,
            tracker_bias: Some(Point2::new(0.5, 0.0)),
            ..NoiseProfile::default()
        };
        let r = nine_point_screen(&exact, 120, 1);
        assert!(r.estimated_bias.distance(Point2::new(0.5, 0.0)) < 1e-12);
        assert!(r.pass);

        let off = NoiseProfile { tracker_bias: Some(Point2::new(2.5, 0.0)), ..NoiseProfile::default() };
        assert!(!nine_point_screen(&off, 120, 1).pass);
    }

    #[test]
    fn screening_estimate_is_tight_without_bias() {
        let noise = NoiseProfile { tracker_bias: Some(Point2::origin()), ..NoiseProfile::default() };
        let within = (0..1000).filter(|&s| nine_point_screen(&noise, 120, s).estimated_bias.norm() < 0.1).count();
        assert!(within >= 990, "{within}");
    }

    #[test]
    fn profile_round_trips_through_toml() {
        let p = NoiseProfile::default();
        let text = toml::to_string(&p).unwrap();
        let back: NoiseProfile = toml::from_str(&text).unwrap();
        assert_eq!(back, p);
        let partial: NoiseProfile = toml::from_str("noise_scale = 2.0").unwrap();
        assert_eq!(partial.noise_scale, 2.0);
        assert_eq!(partial.sample_rate_hz, 120.0);
        assert!(NoiseProfile { noise_scale: -1.0, ..p }.validate().is_err());
    }
}
