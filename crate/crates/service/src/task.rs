//! Per-connection task flow: a target is assigned, selected four times, and
//! the user then asks for the next target, which comes with a fresh label
//! assignment.

use lattice_core::engine::{CloseReason, EventKind, GazeSample, Session, SessionConfig, SessionEvent, Technique, UnfoldMode};
use lattice_core::geometry::{label_position, LayoutParams, Point2};
use lattice_core::menu::{ItemPath, MenuSpec};
use lattice_core::seed;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::{ClientMessage, Cursor, ErrorCode, LabelView, Layout, ServerMessage, PROTOCOL_VERSION};

pub const REPETITIONS: u32 = 4;

/// Defaults applied to `configure` fields the client leaves out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub technique: Technique,
    pub mode: UnfoldMode,
    pub breadth: usize,
    pub depth: usize,
    pub size: f64,
    pub back_reserved: bool,
    pub seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            technique: Technique::Lattice,
            mode: UnfoldMode::Progressive,
            breadth: 4,
            depth: 3,
            size: 10.0,
            back_reserved: false,
            seed: 0,
        }
    }
}

/// Reply to one client message.
#[derive(Debug, Default)]
pub struct Reply {
    pub messages: Vec<ServerMessage>,
    pub close: bool,
}

impl Reply {
    fn one(m: ServerMessage) -> Self {
        Self { messages: vec![m], close: false }
    }

    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Self::one(ServerMessage::Error { code, message: message.into() })
    }
}

struct Task {
    config: SessionConfig<f64>,
    target: ItemPath,
    repetition: u32,
    session: Session<f64>,
    opened_at: Option<f64>,
    /// All repetitions of the current target are done.
    finished: bool,
}

pub struct Connection {
    defaults: ServiceConfig,
    rng: ChaCha8Rng,
    task: Option<Task>,
}

impl Connection {
    pub fn new(defaults: ServiceConfig, connection_seed: u64) -> Self {
        Self { defaults, rng: seed::rng(connection_seed), task: None }
    }

    pub fn handle_text(&mut self, text: &str) -> Reply {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => self.handle(m),
            Err(e) => Reply { close: true, ..Reply::error(ErrorCode::Malformed, e.to_string()) },
        }
    }

    pub fn handle(&mut self, message: ClientMessage) -> Reply {
        match message {
            ClientMessage::Hello { protocol_version } if protocol_version == PROTOCOL_VERSION => Reply::default(),
            ClientMessage::Hello { protocol_version } => Reply {
                close: true,
                ..Reply::error(
                    ErrorCode::VersionMismatch,
                    format!("server speaks protocol {PROTOCOL_VERSION}, client sent {protocol_version}"),
                )
            },
            ClientMessage::Configure { technique, mode, breadth, depth, size, back_reserved, seed } => {
                let d = &self.defaults;
                let settings = ServiceConfig {
                    technique: technique.unwrap_or(d.technique),
                    mode: mode.unwrap_or(d.mode),
                    breadth: breadth.unwrap_or(d.breadth),
                    depth: depth.unwrap_or(d.depth),
                    size: size.unwrap_or(d.size),
                    back_reserved: back_reserved.unwrap_or(d.back_reserved),
                    seed: seed.unwrap_or(d.seed),
                };
                if let Some(s) = seed {
                    self.rng = seed::rng(s);
                }
                self.configure(settings)
            }
            ClientMessage::Sample { t, x, y, valid } => {
                let sample = if valid { GazeSample::new(t, Point2::new(x, y)) } else { GazeSample::invalid(t) };
                self.sample(sample)
            }
            ClientMessage::Blink { duration } => self.with_session(|s| s.blink_event(duration)),
            ClientMessage::KeyNext => match &self.task {
                None => Reply::error(ErrorCode::NotConfigured, "configure first"),
                Some(task) if !task.finished => Reply::error(
                    ErrorCode::TaskIncomplete,
                    format!("repetition {} of {REPETITIONS} not completed", task.repetition),
                ),
                Some(task) => {
                    let settings = settings_of(&task.config, self.defaults.seed);
                    self.configure(settings)
                }
            },
            ClientMessage::Reset => match self.task.as_mut() {
                None => Reply::error(ErrorCode::NotConfigured, "configure first"),
                Some(task) => {
                    task.finished = false;
                    restart(task);
                    Reply::one(assignment(task))
                }
            },
        }
    }

    /// New target with a fresh label assignment.
    fn configure(&mut self, settings: ServiceConfig) -> Reply {
        let label_seed = self.rng.random();
        let menu = match MenuSpec::build(settings.breadth, settings.depth, label_seed, settings.back_reserved) {
            Ok(m) => m,
            Err(e) => return Reply::error(ErrorCode::InvalidConfig, e.to_string()),
        };
        if !(settings.size.is_finite() && settings.size > 0.0) {
            return Reply::error(ErrorCode::InvalidConfig, format!("size must be positive, got {}", settings.size));
        }
        let config = SessionConfig::new(settings.technique, menu, LayoutParams::for_size(settings.size))
            .with_mode(settings.mode);
        let session = match Session::open(config.clone()) {
            Ok(s) => s,
            Err(e) => return Reply::error(ErrorCode::InvalidConfig, e.to_string()),
        };
        let pool: Vec<ItemPath> = config.menu.path_pools(true).into_values().flatten().collect();
        let Some(target) = pool.choose(&mut self.rng).cloned() else {
            return Reply::error(ErrorCode::InvalidConfig, "menu has no selectable targets");
        };
        let task = Task { config, target, repetition: 1, session, opened_at: None, finished: false };
        let configured = ServerMessage::Configured {
            protocol_version: PROTOCOL_VERSION,
            layout: layout(&task.config),
            labels: labels(&task.config, &[], task.config.root_center),
        };
        let assigned = assignment(&task);
        self.task = Some(task);
        Reply { messages: vec![configured, assigned], close: false }
    }

    fn with_session(
        &mut self,
        f: impl FnOnce(&mut Session<f64>) -> Result<Vec<SessionEvent<f64>>, lattice_core::EngineError>,
    ) -> Reply {
        let Some(task) = self.task.as_mut() else {
            return Reply::error(ErrorCode::NotConfigured, "configure first");
        };
        if task.finished {
            return Reply::default();
        }
        match f(&mut task.session) {
            Ok(events) => {
                let mut reply = Reply::default();
                after_events(task, events, &mut reply);
                reply
            }
            Err(e) => Reply::error(ErrorCode::Engine, e.to_string()),
        }
    }

    fn sample(&mut self, sample: GazeSample<f64>) -> Reply {
        let Some(task) = self.task.as_mut() else {
            return Reply::error(ErrorCode::NotConfigured, "configure first");
        };
        let mut reply = Reply::default();
        if !task.finished {
            match task.session.feed_sample(sample) {
                Ok(events) => after_events(task, events, &mut reply),
                Err(e) => return Reply::error(ErrorCode::Engine, e.to_string()),
            }
        }
        let task = self.task.as_ref().expect("configured");
        reply.messages.push(state(task, sample));
        reply
    }
}

fn settings_of(config: &SessionConfig<f64>, seed: u64) -> ServiceConfig {
    ServiceConfig {
        technique: config.technique,
        mode: config.mode,
        breadth: config.menu.breadth,
        depth: config.menu.depth,
        size: config.params.d3_effective_radius,
        back_reserved: config.menu.back_reserved,
        seed,
    }
}

fn restart(task: &mut Task) {
    task.session = Session::open(task.config.clone()).expect("configuration was accepted before");
    task.opened_at = None;
}

/// Forwards events, then handles the end of a trial: results after a leaf,
/// the next repetition (or the end of the block), and a silent retry of the
/// same repetition after a cancel.
fn after_events(task: &mut Task, events: Vec<SessionEvent<f64>>, reply: &mut Reply) {
    for event in events {
        match &event.kind {
            EventKind::MenuOpened => task.opened_at = Some(event.t),
            EventKind::LeafSelected { path } => {
                let selected = ItemPath::new(path.clone());
                reply.messages.push(ServerMessage::Event { event: event.clone() });
                reply.messages.push(ServerMessage::TrialResult {
                    correct: selected.indices == task.target.indices,
                    ct_ms: event.t - task.opened_at.unwrap_or(event.t),
                    selected_labels: task.config.menu.path_labels(&selected),
                    selected_path: selected.indices,
                    repetition: task.repetition,
                });
                continue;
            }
            _ => {}
        }
        reply.messages.push(ServerMessage::Event { event });
    }
    match task.session.close_reason() {
        Some(CloseReason::Leaf) if task.repetition >= REPETITIONS => task.finished = true,
        Some(CloseReason::Leaf) => {
            task.repetition += 1;
            restart(task);
            reply.messages.push(assignment(task));
        }
        Some(CloseReason::Cancelled) => {
            restart(task);
            reply.messages.push(assignment(task));
        }
        None => {}
    }
}

fn assignment(task: &Task) -> ServerMessage {
    ServerMessage::TaskAssigned {
        target_labels: task.config.menu.path_labels(&task.target),
        target_path: task.target.indices.clone(),
        repetition: task.repetition,
        repetitions: REPETITIONS,
    }
}

fn layout(c: &SessionConfig<f64>) -> Layout {
    let p = &c.params;
    Layout {
        technique: c.technique,
        mode: c.mode,
        breadth: c.menu.breadth,
        depth: c.menu.depth,
        back_reserved: c.menu.back_reserved,
        root: c.root_center,
        start_radius: c.start_radius(),
        anchor_width: p.d1_anchor_width,
        zone_radius: p.zone_radius(),
        effective_radius: p.d3_effective_radius,
        pie_radius: p.d4_pie_radius,
        crust_width: p.crust_width,
        label_radius: p.label_radius(),
        dwell_ms: c.dwell_ms,
        cancel_blink_ms: c.cancel_blink_ms,
    }
}

fn labels(c: &SessionConfig<f64>, prefix: &[usize], center: Point2<f64>) -> Vec<LabelView> {
    c.menu
        .submenu_labels(prefix)
        .into_iter()
        .enumerate()
        .filter_map(|(index, text)| {
            let position = label_position(center, index, c.menu.breadth, &c.params).ok()?;
            Some(LabelView { index, text: text.to_string(), position })
        })
        .collect()
}

fn state(task: &Task, sample: GazeSample<f64>) -> ServerMessage {
    let s = &task.session;
    let center = s.center();
    ServerMessage::State {
        t: sample.t,
        menu_open: s.is_menu_open(),
        level: s.level(),
        center,
        dwell_progress: s.dwell_progress(),
        cursor: Cursor { x: sample.p.x, y: sample.p.y, valid: sample.valid },
        anchors: s.active_anchors(),
        labels: center.map(|c| labels(&task.config, s.prefix(), c)).unwrap_or_default(),
    }
}
