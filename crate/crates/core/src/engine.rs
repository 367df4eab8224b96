//! Streaming selection decoders.
//!
//! A [`Session`] consumes gaze samples one at a time and emits menu events.
//! Three techniques share the session lifecycle (dwell on the start button,
//! navigate `depth` levels, close on a leaf or a cancel):
//!
//! * `Lattice`: entering the selection zone of a current-level anchor selects
//!   that item immediately; the anchor becomes the next submenu center.
//! * `BorderPie`: the segment between consecutive valid samples is tested for
//!   an outward crossing of the current circle of radius `d3`; the crossing
//!   sector is selected and the next submenu is centred on the crossing point.
//! * `PEye`: a sample inside the crust annulus selects its sector.
//!
//! Sessions never look ahead, so feeding samples one by one or in batches
//! yields the same events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    anchor_position, crust_contains, item_direction, segment_circle_crossing, selection_zone_contains,
    validate_layout, LayoutParams, Point2, Violation,
};
use crate::menu::{MenuError, MenuSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Lattice,
    BorderPie,
    #[serde(rename = "peye")]
    PEye,
}

impl Technique {
    pub const ALL: [Technique; 3] = [Technique::Lattice, Technique::BorderPie, Technique::PEye];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Lattice => "lattice",
            Technique::BorderPie => "border_pie",
            Technique::PEye => "peye",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lattice" => Some(Technique::Lattice),
            "border_pie" | "borderpie" | "border" => Some(Technique::BorderPie),
            "peye" | "p_eye" => Some(Technique::PEye),
            _ => None,
        }
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnfoldMode {
    #[default]
    Progressive,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GazeSample<T> {
    /// Milliseconds, strictly increasing within a session.
    pub t: T,
    #[serde(flatten)]
    pub p: Point2<T>,
    pub valid: bool,
}

impl<T: Real> GazeSample<T> {
    pub fn new(t: T, p: Point2<T>) -> Self {
        Self { t, p, valid: true }
    }

    pub fn invalid(t: T) -> Self {
        Self { t, p: Point2::origin(), valid: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Real")]
pub enum EventKind<T> {
    DwellProgress {
        progress: T,
    },
    MenuOpened,
    LevelSelected {
        level: usize,
        index: usize,
        /// Landing point that triggered the selection.
        x: T,
        y: T,
        anchor_x: T,
        anchor_y: T,
    },
    LeafSelected {
        path: Vec<usize>,
    },
    BackTaken {
        level: usize,
    },
    Cancelled,
    /// Level 0 denotes the start button.
    ZoneEntered {
        level: usize,
        index: usize,
    },
    ZoneExited {
        level: usize,
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SessionEvent<T> {
    pub t: T,
    #[serde(flatten)]
    pub kind: EventKind<T>,
}

impl<T: Real> SessionEvent<T> {
    /// Dwell progress and zone enter/exit notifications only drive the UI.
    pub fn is_telemetry(&self) -> bool {
        matches!(
            self.kind,
            EventKind::DwellProgress { .. } | EventKind::ZoneEntered { .. } | EventKind::ZoneExited { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SessionConfig<T> {
    pub technique: Technique,
    pub mode: UnfoldMode,
    pub menu: MenuSpec,
    pub params: LayoutParams<T>,
    pub root_center: Point2<T>,
    pub dwell_ms: T,
    pub cancel_blink_ms: T,
}

impl<T: Real> SessionConfig<T> {
    pub fn new(technique: Technique, menu: MenuSpec, params: LayoutParams<T>) -> Self {
        Self {
            technique,
            mode: UnfoldMode::Progressive,
            menu,
            params,
            root_center: Point2::origin(),
            dwell_ms: T::lit(1000.0),
            cancel_blink_ms: T::lit(700.0),
        }
    }

    pub fn with_mode(mut self, mode: UnfoldMode) -> Self {
        self.mode = mode;
        self
    }

    /// Radius of the start button disk.
    pub fn start_radius(&self) -> T {
        self.params.zone_radius()
    }

    /// Radius whose outward crossing (BorderPie) or inner edge (pEYE)
    /// triggers a selection.
    pub fn selection_radius(&self) -> T {
        self.params.d3_effective_radius
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid layout: {0:?}")]
    InvalidLayout(Vec<Violation>),
    #[error("invalid timing: {0}")]
    InvalidTiming(String),
    #[error(transparent)]
    Menu(#[from] MenuError),
    #[error("session is closed")]
    Closed,
    #[error("sample time {got} does not follow previous time {prev}")]
    NonMonotonicTime { prev: f64, got: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloseReason {
    Leaf,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq)]
enum Phase<T> {
    DwellWait { since: Option<T> },
    Navigating { level: usize, center: Point2<T>, prefix: Vec<usize>, previous_centers: Vec<Point2<T>> },
    Closed(CloseReason),
}

/// One anchor position as seen by a renderer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnchorView<T> {
    pub level: usize,
    pub index: usize,
    pub position: Point2<T>,
    pub visible: bool,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct Session<T: Real> {
    config: SessionConfig<T>,
    phase: Phase<T>,
    last_t: Option<T>,
    last_point: Option<Point2<T>>,
    in_start: bool,
    dwell_progress: T,
}

impl<T: Real> Session<T> {
    pub fn open(config: SessionConfig<T>) -> Result<Self, EngineError> {
        let fatal: Vec<Violation> = validate_layout(&config.params, config.menu.breadth)
            .into_iter()
            .filter(Violation::is_fatal)
            .collect();
        if !fatal.is_empty() {
            return Err(EngineError::InvalidLayout(fatal));
        }
        if !(config.dwell_ms > T::zero()) || !(config.cancel_blink_ms > T::zero()) {
            return Err(EngineError::InvalidTiming("dwell and cancel durations must be positive".into()));
        }
        if !config.root_center.is_finite() {
            return Err(EngineError::InvalidTiming("root center must be finite".into()));
        }
        Ok(Self {
            config,
            phase: Phase::DwellWait { since: None },
            last_t: None,
            last_point: None,
            in_start: false,
            dwell_progress: T::zero(),
        })
    }

    pub fn config(&self) -> &SessionConfig<T> {
        &self.config
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.phase, Phase::Closed(_))
    }

    pub fn close_reason(&self) -> Option<CloseReason> {
        match self.phase {
            Phase::Closed(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_menu_open(&self) -> bool {
        matches!(self.phase, Phase::Navigating { .. })
    }

    /// Current level (1-based) while navigating.
    pub fn level(&self) -> Option<usize> {
        match &self.phase {
            Phase::Navigating { level, .. } => Some(*level),
            _ => None,
        }
    }

    pub fn center(&self) -> Option<Point2<T>> {
        match &self.phase {
            Phase::Navigating { center, .. } => Some(*center),
            _ => None,
        }
    }

    pub fn prefix(&self) -> &[usize] {
        match &self.phase {
            Phase::Navigating { prefix, .. } => prefix,
            _ => &[],
        }
    }

    pub fn dwell_progress(&self) -> T {
        self.dwell_progress
    }

    pub fn last_time(&self) -> Option<T> {
        self.last_t
    }

    /// Anchors a renderer should know about. Only the current level is ever
    /// active; `Full` mode additionally reveals every deeper level of the
    /// remaining subtrees. Border-crossing techniques have no visual anchors,
    /// so their sector targets are reported as invisible.
    pub fn active_anchors(&self) -> Vec<AnchorView<T>> {
        let Phase::Navigating { level, center, .. } = &self.phase else {
            return Vec::new();
        };
        let breadth = self.config.menu.breadth;
        let params = &self.config.params;
        let marked = self.config.technique == Technique::Lattice;
        let last_level = match (marked, self.config.mode) {
            (true, UnfoldMode::Full) => self.config.menu.depth,
            _ => *level,
        };
        let mut out = Vec::new();
        let mut frontier = vec![*center];
        for lvl in *level..=last_level {
            let mut next = Vec::with_capacity(frontier.len() * breadth);
            for c in &frontier {
                for index in 0..breadth {
                    let position = anchor_position(*c, index, breadth, params).expect("index < breadth");
                    out.push(AnchorView { level: lvl, index, position, visible: marked, active: lvl == *level });
                    next.push(position);
                }
            }
            frontier = next;
        }
        out
    }

    fn check_time(&mut self, t: T) -> Result<(), EngineError> {
        if self.is_closed() {
            return Err(EngineError::Closed);
        }
        if !t.is_finite() {
            return Err(EngineError::InvalidTiming("non-finite sample time".into()));
        }
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(EngineError::NonMonotonicTime { prev: prev.to_f64_lossy(), got: t.to_f64_lossy() });
            }
        }
        self.last_t = Some(t);
        Ok(())
    }

    pub fn feed_sample(&mut self, s: GazeSample<T>) -> Result<Vec<SessionEvent<T>>, EngineError> {
        self.check_time(s.t)?;
        let mut events = Vec::new();
        if !s.valid || !s.p.is_finite() {
            return Ok(events);
        }
        match self.phase {
            Phase::DwellWait { .. } => self.dwell(s, &mut events),
            Phase::Navigating { .. } => match self.config.technique {
                Technique::Lattice => self.lattice(s, &mut events),
                Technique::BorderPie => self.border_pie(s, &mut events),
                Technique::PEye => self.peye(s, &mut events),
            },
            Phase::Closed(_) => unreachable!("checked above"),
        }
        self.last_point = Some(s.p);
        Ok(events)
    }

    pub fn feed_batch(&mut self, samples: &[GazeSample<T>]) -> Result<Vec<SessionEvent<T>>, EngineError> {
        let mut out = Vec::new();
        for s in samples {
            if self.is_closed() {
                break;
            }
            out.extend(self.feed_sample(*s)?);
        }
        Ok(out)
    }

    fn dwell(&mut self, s: GazeSample<T>, events: &mut Vec<SessionEvent<T>>) {
        let inside = (s.p - self.config.root_center).norm() <= self.config.start_radius();
        let Phase::DwellWait { since } = &mut self.phase else { return };
        if inside {
            if !self.in_start {
                events.push(SessionEvent { t: s.t, kind: EventKind::ZoneEntered { level: 0, index: 0 } });
            }
            let start = *since.get_or_insert(s.t);
            let elapsed = s.t - start;
            self.dwell_progress = (elapsed / self.config.dwell_ms).min(T::one());
            events.push(SessionEvent { t: s.t, kind: EventKind::DwellProgress { progress: self.dwell_progress } });
            if elapsed >= self.config.dwell_ms {
                events.push(SessionEvent { t: s.t, kind: EventKind::MenuOpened });
                self.phase = Phase::Navigating {
                    level: 1,
                    center: self.config.root_center,
                    prefix: Vec::new(),
                    previous_centers: Vec::new(),
                };
            }
        } else if self.in_start {
            *since = None;
            self.dwell_progress = T::zero();
            events.push(SessionEvent { t: s.t, kind: EventKind::ZoneExited { level: 0, index: 0 } });
            events.push(SessionEvent { t: s.t, kind: EventKind::DwellProgress { progress: T::zero() } });
        }
        self.in_start = inside;
    }

    fn lattice(&mut self, s: GazeSample<T>, events: &mut Vec<SessionEvent<T>>) {
        let Some(center) = self.center() else { return };
        let breadth = self.config.menu.breadth;
        let params = self.config.params;
        let hit = (0..breadth).find_map(|i| {
            let anchor = anchor_position(center, i, breadth, &params).expect("index < breadth");
            selection_zone_contains(s.p, anchor, &params).then_some((i, anchor))
        });
        if let Some((index, anchor)) = hit {
            self.select(s.t, index, anchor, s.p, anchor, events);
        }
    }

    fn border_pie(&mut self, s: GazeSample<T>, events: &mut Vec<SessionEvent<T>>) {
        let Some(mut from) = self.last_point else { return };
        let breadth = self.config.menu.breadth;
        let radius = self.config.selection_radius();
        // a long segment may leave several nested circles
        while let Some(center) = self.center() {
            let Some((crossing, index)) = segment_circle_crossing(from, s.p, center, radius, breadth) else {
                break;
            };
            self.select(s.t, index, crossing, crossing, crossing, events);
            if from == crossing {
                break;
            }
            from = crossing;
        }
    }

    fn peye(&mut self, s: GazeSample<T>, events: &mut Vec<SessionEvent<T>>) {
        let Some(center) = self.center() else { return };
        let breadth = self.config.menu.breadth;
        if let Some(index) = crust_contains(s.p, center, breadth, &self.config.params) {
            let anchor = anchor_position(center, index, breadth, &self.config.params).expect("index < breadth");
            self.select(s.t, index, anchor, s.p, anchor, events);
        }
    }

    fn select(
        &mut self,
        t: T,
        index: usize,
        anchor: Point2<T>,
        landing: Point2<T>,
        next_center: Point2<T>,
        events: &mut Vec<SessionEvent<T>>,
    ) {
        let depth = self.config.menu.depth;
        let is_back = self.config.menu.is_back_item(self.prefix(), index);
        if is_back {
            self.go_back(t, events);
            return;
        }
        let Phase::Navigating { level, center, prefix, previous_centers } = &mut self.phase else { return };
        events.push(SessionEvent {
            t,
            kind: EventKind::LevelSelected {
                level: *level,
                index,
                x: landing.x,
                y: landing.y,
                anchor_x: anchor.x,
                anchor_y: anchor.y,
            },
        });
        prefix.push(index);
        previous_centers.push(*center);
        *center = next_center;
        if *level == depth {
            events.push(SessionEvent { t, kind: EventKind::LeafSelected { path: prefix.clone() } });
            self.phase = Phase::Closed(CloseReason::Leaf);
        } else {
            *level += 1;
        }
    }

    fn go_back(&mut self, t: T, events: &mut Vec<SessionEvent<T>>) {
        match &mut self.phase {
            Phase::Navigating { level, center, prefix, previous_centers } if *level >= 2 => {
                events.push(SessionEvent { t, kind: EventKind::BackTaken { level: *level } });
                *level -= 1;
                prefix.pop();
                if let Some(prev) = previous_centers.pop() {
                    *center = prev;
                }
            }
            Phase::Closed(_) => {}
            _ => self.cancel_at(t, events),
        }
    }

    fn cancel_at(&mut self, t: T, events: &mut Vec<SessionEvent<T>>) {
        events.push(SessionEvent { t, kind: EventKind::Cancelled });
        self.phase = Phase::Closed(CloseReason::Cancelled);
    }

    fn event_time(&self) -> T {
        self.last_t.unwrap_or_else(T::zero)
    }

    pub fn request_cancel(&mut self) -> Result<Vec<SessionEvent<T>>, EngineError> {
        if self.is_closed() {
            return Err(EngineError::Closed);
        }
        let mut events = Vec::new();
        self.cancel_at(self.event_time(), &mut events);
        Ok(events)
    }

    /// A blink (or wink) of `duration_ms`; long blinks cancel the menu.
    pub fn blink_event(&mut self, duration_ms: T) -> Result<Vec<SessionEvent<T>>, EngineError> {
        if self.is_closed() {
            return Err(EngineError::Closed);
        }
        let mut events = Vec::new();
        if duration_ms >= self.config.cancel_blink_ms {
            self.cancel_at(self.event_time(), &mut events);
        }
        Ok(events)
    }

    /// Explicit roll-back to the previous level. At level 1 (or before the
    /// menu opens) this cancels the session.
    pub fn request_back(&mut self) -> Result<Vec<SessionEvent<T>>, EngineError> {
        if self.is_closed() {
            return Err(EngineError::Closed);
        }
        let mut events = Vec::new();
        self.go_back(self.event_time(), &mut events);
        Ok(events)
    }
}

/// Unit direction of item `index`; re-exported for renderers.
pub fn direction<T: Real>(index: usize, breadth: usize) -> Point2<T> {
    item_direction(index, breadth).expect("index < breadth")
}
