//! Wire messages. Every frame is a JSON object whose `type` field names the
//! message; field names are snake_case and all coordinates are degrees.

use lattice_core::engine::{AnchorView, SessionEvent, Technique, UnfoldMode};
use lattice_core::geometry::Point2;
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Hello {
        protocol_version: u32,
    },
    /// Any omitted field falls back to the server default.
    Configure {
        #[serde(default)]
        technique: Option<Technique>,
        #[serde(default)]
        mode: Option<UnfoldMode>,
        #[serde(default)]
        breadth: Option<usize>,
        #[serde(default)]
        depth: Option<usize>,
        #[serde(default)]
        size: Option<f64>,
        #[serde(default)]
        back_reserved: Option<bool>,
        /// Seeds target and label randomization for this connection.
        #[serde(default)]
        seed: Option<u64>,
    },
    Sample {
        t: f64,
        x: f64,
        y: f64,
        #[serde(default = "yes")]
        valid: bool,
    },
    Blink {
        duration: f64,
    },
    KeyNext,
    Reset,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub technique: Technique,
    pub mode: UnfoldMode,
    pub breadth: usize,
    pub depth: usize,
    pub back_reserved: bool,
    pub root: Point2<f64>,
    pub start_radius: f64,
    pub anchor_width: f64,
    pub zone_radius: f64,
    pub effective_radius: f64,
    pub pie_radius: f64,
    pub crust_width: f64,
    pub label_radius: f64,
    pub dwell_ms: f64,
    pub cancel_blink_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelView {
    pub index: usize,
    pub text: String,
    pub position: Point2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cursor {
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Configured {
        protocol_version: u32,
        layout: Layout,
        /// Labels of the root submenu.
        labels: Vec<LabelView>,
    },
    TaskAssigned {
        target_labels: Vec<String>,
        target_path: Vec<usize>,
        repetition: u32,
        repetitions: u32,
    },
    State {
        t: f64,
        menu_open: bool,
        level: Option<usize>,
        center: Option<Point2<f64>>,
        dwell_progress: f64,
        cursor: Cursor,
        anchors: Vec<AnchorView<f64>>,
        labels: Vec<LabelView>,
    },
    Event {
        event: SessionEvent<f64>,
    },
    TrialResult {
        correct: bool,
        ct_ms: f64,
        selected_path: Vec<usize>,
        selected_labels: Vec<String>,
        repetition: u32,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    VersionMismatch,
    NotConfigured,
    InvalidConfig,
    TaskIncomplete,
    Engine,
}
