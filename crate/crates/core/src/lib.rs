//! Core library for the knowran warehouse simulator.
//!
//! The crate models a private-campus radio deployment where fixed
//! infrastructure sensors (UWB anchors, ceiling cameras) feed a knowledge
//! agent that steers a mmWave antenna, authenticates radios by physical
//! position, and predicts channel changes from tracked motion. Everything
//! is deterministic: a scenario file plus a seed reproduces every byte of
//! output.
//!
//! Module layout:
//! - [`scene`]: static geometry, geofence, routes, intersection predicates
//! - [`raytrace`]: image-method path tracing and channel impulse responses
//! - [`sensors`]: UWB and vision measurement models, frame conversion
//! - [`ran`]: antenna array model, beam sweeps, control-plane verbs
//! - [`ka`]: sensor fusion, position authentication, beam/channel services
//! - [`sim`]: scenario configs, the step engine, metrics and trace output

pub mod error;
pub mod ka;
pub mod ran;
pub mod raytrace;
pub mod scene;
pub mod sensors;
pub mod sim;

pub use error::{Error, Result};
