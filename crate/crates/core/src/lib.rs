//! Gaze-driven marking menus.
//!
//! The [`engine`] decodes a stream of gaze samples into menu selections for
//! three techniques: lattice menus (anchors placed on a lattice, selection by
//! entering a small zone around the anchor), border-crossing pie menus, and
//! crust-based pie menus. [`synth`] generates synthetic gaze for simulated
//! users and [`harness`] runs whole experiments on top of both.
//!
//! Geometry and the decoder are generic over the scalar type; the aliases
//! below fix it to `f64` (or `f32` with the `F32` suffix).

pub mod engine;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod menu;
pub mod scalar;
pub mod seed;
pub mod synth;

pub use engine::{
    CloseReason, EngineError, EventKind, SessionEvent, Technique, UnfoldMode,
};
pub use geometry::{GeometryError, Violation};
pub use menu::{ItemPath, MenuError, MenuSpec};
pub use scalar::Real;

pub type Point = geometry::Point2<f64>;
pub type Layout = geometry::LayoutParams<f64>;
pub type Config = engine::SessionConfig<f64>;
pub type Event = engine::SessionEvent<f64>;
pub type Sample = engine::GazeSample<f64>;
pub type EngineSession = engine::Session<f64>;

pub type PointF32 = geometry::Point2<f32>;
pub type LayoutF32 = geometry::LayoutParams<f32>;
pub type ConfigF32 = engine::SessionConfig<f32>;
pub type SampleF32 = engine::GazeSample<f32>;
pub type EngineSessionF32 = engine::Session<f32>;
